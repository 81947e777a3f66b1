#pragma once

#include <array>
#include <string>
#include <string_view>

#include "beamsafe/errors.hpp"
#include "beamsafe/transverse_modes.hpp"

namespace beamsafe {

// Named LG combinations over the first six LG modes, as power coefficients.
struct ModePreset {
    std::string_view name;
    std::array<double, 6> coefficients;
    double published_divergence_ratio;  // tabulated theta_R / theta
};

// Mode k of the preset tables, as (l, m).
inline constexpr std::array<std::array<int, 2>, 6> kPresetModes = {{{0, 0}, {1, 0}, {2, 0}, {0, 1}, {3, 0}, {1, 1}}};

inline constexpr std::array<ModePreset, 7> kModePresets = {{
    {"LG-Comb 1", {1.0, 0.0, 0.0, 0.0, 0.0, 0.0}, 1.0},
    {"LG-Comb 2", {0.5, 0.5, 0.0, 0.0, 0.0, 0.0}, 1.3248},
    {"LG-Comb 3", {0.0, 0.5, 0.25, 0.0, 0.25, 0.0}, 1.7346},
    {"LG-Comb 4", {0.0, 0.0, 0.25, 0.25, 0.25, 0.25}, 1.9451},
    {"LG-Comb 5", {0.125, 0.75, 0.0625, 0.0, 0.0625, 0.0}, 1.5432},
    {"LG-Comb 6", {0.0, 0.125, 0.375, 0.0625, 0.375, 0.0625}, 1.7511},
    {"LG-Comb 7", {0.06, 0.44, 0.22, 0.03, 0.22, 0.03}, 1.7237},
}};

inline const ModePreset& find_mode_preset(std::string_view name) {
    for (const auto& preset : kModePresets) {
        if (preset.name == name) return preset;
    }
    throw ParameterError("unknown mode preset '" + std::string(name) + "'");
}

// Zero-coefficient modes are dropped.
inline ModeCombination make_preset_combination(const ModePreset& preset) {
    std::vector<ModeEntry> entries;
    for (std::size_t k = 0; k < preset.coefficients.size(); ++k) {
        if (preset.coefficients[k] == 0.0) continue;
        entries.push_back({{ModeFamily::LaguerreGaussian, kPresetModes[k][0], kPresetModes[k][1]},
                           preset.coefficients[k]});
    }
    return ModeCombination::make(std::move(entries));
}

inline ModeCombination preset_combination(std::string_view name) {
    return make_preset_combination(find_mode_preset(name));
}

} // namespace beamsafe
