#pragma once

// JSON scenario configs for the command-line tool. Units live in the key names and are
// converted to SI here; nothing past this file sees mm, um, nm or degrees.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "beamsafe/beamsafe.hpp"

namespace beamsafe::cli {

using nlohmann::json;

// Malformed or inconsistent configuration. path is a JSON pointer to the offending field.
class ConfigError : public ParameterError {
public:
    ConfigError(const std::string& path, const std::string& what)
        : ParameterError(path + ": " + what), path_(path) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum class Tissue { Eye, Skin };
enum class MethodChoice { Auto, MSquared, Decomposition, DecompositionScan };
enum class OpticsKind { None, ThinLens, ThickLens, Diffuser, Array };

struct Scenario {
    BeamParams beam;
    double transmit_power = 1.0;
    std::optional<ModeCombination> combo;
    std::optional<double> divergence_ratio;

    OpticsKind optics = OpticsKind::None;
    ThinLensSpec thin_lens;
    ThickLensSpec thick_lens;
    double object_distance = 0.0;
    std::optional<DiffuserSpec> diffuser;
    int side_count = 1;
    double pitch = 0.0;

    ExposureContext exposure;
    Tissue tissue = Tissue::Eye;
    double shield_distance = 0.0;
    double z_haz = kClosestViewingDistance;
    double z_upper = 10.0;
    MethodChoice method = MethodChoice::Auto;
};

namespace detail {

class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
    }

    bool has(const char* key) const {
        seen_.insert(key);
        return obj_.contains(key);
    }

    std::string at(const char* key) const { return path_ + "/" + key; }

    double number(const char* key) const {
        if (!has(key)) throw ConfigError(at(key), "required field is missing");
        const json& v = obj_.at(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(at(key), "must be finite");
        return d;
    }

    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    double positive(const char* key) const {
        const double d = number(key);
        if (!(d > 0.0)) throw ConfigError(at(key), "must be > 0");
        return d;
    }

    double positive(const char* key, double fallback) const { return has(key) ? positive(key) : fallback; }

    int integer(const char* key) const {
        if (!has(key)) throw ConfigError(at(key), "required field is missing");
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        return v.get<int>();
    }

    std::string text(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }

    const json& child(const char* key) const {
        if (!has(key)) throw ConfigError(at(key), "required block is missing");
        return obj_.at(key);
    }

    // Rejects keys that were never looked at, which catches typos and unit-suffix mistakes.
    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(path_ + "/" + it.key(), "unknown field");
        }
    }

private:
    const json& obj_;
    std::string path_;
    mutable std::set<std::string> seen_;
};

inline ModeCombination parse_modes(const json& modes, const std::string& path) {
    if (!modes.is_array() || modes.empty()) throw ConfigError(path, "expected a non-empty array of modes");
    std::vector<ModeEntry> entries;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const std::string p = path + "/" + std::to_string(k);
        Reader r(modes[k], p);
        const std::string family = r.text("family", "LG");
        ModeEntry e;
        if (family == "LG") {
            e.mode.family = ModeFamily::LaguerreGaussian;
        } else if (family == "HG") {
            e.mode.family = ModeFamily::HermiteGaussian;
        } else {
            throw ConfigError(r.at("family"), "expected \"LG\" or \"HG\"");
        }
        e.mode.l = r.integer("l");
        e.mode.m = r.integer("m");
        e.coefficient = r.number("coefficient");
        r.finish();
        entries.push_back(e);
    }
    try {
        return ModeCombination::make(std::move(entries));
    } catch (const ParameterError& err) {
        throw ConfigError(path, err.what());
    }
}

inline void parse_source(const json& j, Scenario& s) {
    Reader r(j, "/source");
    const double wavelength = r.positive("wavelength_nm") * units::nm;
    if (r.has("waist_um") && r.has("divergence_deg")) {
        throw ConfigError("/source", "give either waist_um or divergence_deg, not both");
    }
    if (r.has("divergence_deg")) {
        const double theta = units::deg_to_rad(r.positive("divergence_deg"));
        s.beam = BeamParams::from_divergence(wavelength, theta);
    } else {
        s.beam = BeamParams::make(wavelength, r.positive("waist_um") * units::um);
    }
    s.transmit_power = r.positive("transmit_power_W", 1.0);
    if (r.has("preset") && r.has("modes")) throw ConfigError("/source", "give either preset or modes, not both");
    if (r.has("preset")) {
        try {
            s.combo = preset_combination(r.text("preset", ""));
        } catch (const ParameterError& err) {
            throw ConfigError(r.at("preset"), err.what());
        }
    }
    if (r.has("modes")) s.combo = parse_modes(r.child("modes"), r.at("modes"));
    if (r.has("divergence_ratio")) {
        const double ratio = r.positive("divergence_ratio");
        if (ratio < 1.0) throw ConfigError(r.at("divergence_ratio"), "must be >= 1");
        s.divergence_ratio = ratio;
    }
    r.finish();
}

inline void parse_optics(const json& j, Scenario& s) {
    Reader r(j, "/optics");
    const std::string kind = r.text("kind", "none");
    if (kind == "none") {
        s.optics = OpticsKind::None;
    } else if (kind == "thin_lens") {
        s.optics = OpticsKind::ThinLens;
        s.thin_lens.focal_length = r.number("focal_length_mm") * units::mm;
        if (s.thin_lens.focal_length == 0.0) throw ConfigError(r.at("focal_length_mm"), "must be nonzero");
        s.object_distance = r.positive("d1_mm") * units::mm;
        s.thin_lens.object_distance = s.object_distance;
    } else if (kind == "thick_lens") {
        s.optics = OpticsKind::ThickLens;
        s.thick_lens.refractive_index = r.number("refractive_index");
        s.thick_lens.thickness = r.number("thickness_mm") * units::mm;
        s.thick_lens.front_radius = r.number("front_radius_mm") * units::mm;
        s.thick_lens.back_radius = r.number("back_radius_mm") * units::mm;
        s.object_distance = r.positive("d1_mm") * units::mm;
    } else if (kind == "diffuser") {
        const std::string type = r.text("type", "");
        const double diameter = r.positive("diameter_mm") * units::mm;
        const double focal = r.positive("focal_length_mm") * units::mm;
        s.optics = OpticsKind::Diffuser;
        try {
            if (type == "lambertian") {
                s.diffuser = DiffuserSpec::lambertian(r.number("order", 1.0), diameter, focal);
            } else if (type == "uniform") {
                s.diffuser = DiffuserSpec::uniform(units::deg_to_rad(r.positive("theta_d_deg")), diameter, focal);
            } else {
                throw ConfigError(r.at("type"), "expected \"lambertian\" or \"uniform\"");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const ParameterError& err) {
            throw ConfigError("/optics", err.what());
        }
    } else if (kind == "array") {
        s.optics = OpticsKind::Array;
        s.side_count = r.integer("side_count");
        if (s.side_count < 1) throw ConfigError(r.at("side_count"), "must be >= 1");
        s.pitch = r.number("pitch_um") * units::um;
        if (s.pitch < 0.0) throw ConfigError(r.at("pitch_um"), "must be >= 0");
    } else {
        throw ConfigError(r.at("kind"), "expected none, thin_lens, thick_lens, diffuser or array");
    }
    r.finish();
}

inline void parse_exposure(const json& j, Scenario& s) {
    Reader r(j, "/exposure");
    const double t = r.positive("t_ex_s");
    const double pupil = r.positive("pupil_radius_mm", kDefaultPupilRadius / units::mm) * units::mm;
    s.exposure = ExposureContext::make(s.beam.wavelength, t, pupil);
    const std::string tissue = r.text("tissue", "eye");
    if (tissue == "eye") {
        s.tissue = Tissue::Eye;
    } else if (tissue == "skin") {
        s.tissue = Tissue::Skin;
    } else {
        throw ConfigError(r.at("tissue"), "expected \"eye\" or \"skin\"");
    }
    s.shield_distance = r.number("shield_distance_m", 0.0);
    if (s.shield_distance < 0.0) throw ConfigError(r.at("shield_distance_m"), "must be >= 0");
    s.z_haz = r.positive("z_haz_m", kClosestViewingDistance);
    s.z_upper = r.positive("z_upper_m", 10.0);
    r.finish();
}

} // namespace detail

inline Scenario parse_scenario(const json& j) {
    Scenario s;
    detail::Reader r(j, "");
    detail::parse_source(r.child("source"), s);
    if (r.has("optics")) detail::parse_optics(r.child("optics"), s);
    detail::parse_exposure(r.child("exposure"), s);
    const std::string method = r.text("method", "auto");
    if (method == "auto") {
        s.method = MethodChoice::Auto;
    } else if (method == "msquared") {
        s.method = MethodChoice::MSquared;
    } else if (method == "decomposition") {
        s.method = MethodChoice::Decomposition;
    } else if (method == "decomposition_scan") {
        s.method = MethodChoice::DecompositionScan;
    } else {
        throw ConfigError("/method", "expected auto, msquared, decomposition or decomposition_scan");
    }
    r.finish();

    const bool multimode = s.combo.has_value();
    if (s.tissue == Tissue::Skin && s.optics != OpticsKind::None) {
        throw ConfigError("/optics", "skin evaluation supports optics kind none only");
    }
    if (multimode && (s.optics == OpticsKind::ThinLens || s.optics == OpticsKind::ThickLens ||
                      s.optics == OpticsKind::Diffuser)) {
        throw ConfigError("/source", "mode combinations are supported with optics none or array");
    }
    if (s.method != MethodChoice::Auto && s.optics != OpticsKind::None) {
        throw ConfigError("/method", "method selection applies to optics none only");
    }
    if ((s.method == MethodChoice::Decomposition || s.method == MethodChoice::DecompositionScan) && !multimode) {
        throw ConfigError("/method", "decomposition needs a preset or modes list");
    }
    if (s.method == MethodChoice::MSquared && !multimode && !s.divergence_ratio) {
        throw ConfigError("/method", "msquared needs a preset, modes list or divergence_ratio");
    }
    if (s.divergence_ratio && s.method != MethodChoice::MSquared) {
        throw ConfigError("/source/divergence_ratio", "only used with method msquared");
    }
    return s;
}

inline SafetyResult evaluate(const Scenario& s) {
    if (s.tissue == Tissue::Skin) {
        const ShieldContext shield{s.shield_distance};
        if (s.combo) return ptmax_skin_multimode(*s.combo, s.beam, shield, s.exposure);
        return ptmax_skin_gaussian(s.beam, shield, s.exposure);
    }
    switch (s.optics) {
    case OpticsKind::ThinLens: return ptmax_with_lens(s.beam, s.thin_lens, s.exposure);
    case OpticsKind::ThickLens:
        return ptmax_with_abcd_lens(s.beam, thick_lens_abcd(s.thick_lens), s.object_distance, s.exposure);
    case OpticsKind::Diffuser:
        if (s.diffuser->kind == DiffuserKind::Lambertian) {
            return ptmax_lambertian_diffuser(*s.diffuser, s.beam, s.exposure, s.z_haz);
        }
        return ptmax_uniform_diffuser(*s.diffuser, s.beam, s.exposure, s.z_haz);
    case OpticsKind::Array: return ptmax_array({s.side_count, s.pitch, s.beam, s.combo}, s.exposure);
    case OpticsKind::None: break;
    }
    switch (s.method) {
    case MethodChoice::MSquared:
        if (s.divergence_ratio) {
            return ptmax_multimode_msquared(*s.divergence_ratio * paraxial_divergence(s.beam), s.exposure);
        }
        return ptmax_multimode_msquared(*s.combo, s.beam, s.exposure);
    case MethodChoice::DecompositionScan:
        return ptmax_multimode_decomposition_scan(*s.combo, s.beam, s.exposure, s.z_upper);
    case MethodChoice::Decomposition: return ptmax_multimode_decomposition(*s.combo, s.beam, s.exposure, s.z_haz);
    case MethodChoice::Auto:
        if (s.combo) return ptmax_multimode_decomposition(*s.combo, s.beam, s.exposure, s.z_haz);
        return ptmax_single_mode(s.beam, s.exposure);
    }
    return ptmax_single_mode(s.beam, s.exposure);
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline json to_json(const SafetyResult& r) {
    return json{{"method", to_string(r.method)},
                {"p_t_max_W", r.p_t_max},
                {"z_haz_m", r.z_haz},
                {"alpha_rad", r.alpha},
                {"eta_or_fraction", r.eta_or_fraction},
                {"source_count", r.source_count},
                {"reference_area_m2", r.reference_area},
                {"mpe",
                 {{"mpe_W_m2", r.mpe.mpe},
                  {"branch_id", r.mpe.branch_id},
                  {"source_class", to_string(r.mpe.source_class)},
                  {"c4", r.mpe.c4},
                  {"c6", r.mpe.c6},
                  {"c7", r.mpe.c7},
                  {"t2_s", r.mpe.t2}}},
                {"notes", r.notes}};
}

inline std::string report(const SafetyResult& r) {
    std::string out;
    out += "method            " + std::string(to_string(r.method)) + "\n";
    out += "P_t,max           " + format_number(r.p_t_max) + " W (" + format_number(r.p_t_max * 1e3) + " mW)\n";
    out += "z_haz             " + format_number(r.z_haz) + " m\n";
    out += "alpha             " + format_number(r.alpha) + " rad\n";
    out += "eta/fraction      " + format_number(r.eta_or_fraction) + "\n";
    if (r.source_count != 1) out += "sources in pupil  " + std::to_string(r.source_count) + "\n";
    out += "MPE               " + format_number(r.mpe.mpe) + " W/m^2 [" + r.mpe.branch_id + "]\n";
    out += "  C4 " + format_number(r.mpe.c4) + "  C6 " + format_number(r.mpe.c6) + "  C7 " +
           format_number(r.mpe.c7) + "  T2 " + format_number(r.mpe.t2) + " s  (" + to_string(r.mpe.source_class) +
           " source)\n";
    for (const auto& n : r.notes) out += "note: " + n + "\n";
    return out;
}

// ---- sweeps

struct AxisInfo {
    const char* name;
    const char* section;
    const char* key;
    const char* unit;
};

inline constexpr AxisInfo kAxes[] = {
    {"t_ex", "exposure", "t_ex_s", "s"},
    {"wavelength", "source", "wavelength_nm", "nm"},
    {"divergence", "source", "divergence_deg", "deg"},
    {"focal_length", "optics", "focal_length_mm", "mm"},
    {"d1", "optics", "d1_mm", "mm"},
    {"pitch", "optics", "pitch_um", "um"},
    {"theta_d", "optics", "theta_d_deg", "deg"},
};

inline const AxisInfo& find_axis(const std::string& name) {
    for (const auto& a : kAxes) {
        if (name == a.name) return a;
    }
    throw ConfigError("--axis", "unknown axis '" + name + "'");
}

inline std::vector<double> axis_values(double from, double to, int steps, bool log_spacing) {
    if (steps < 1) throw ConfigError("--steps", "must be >= 1");
    if (log_spacing && !(from > 0.0 && to > 0.0)) throw ConfigError("--log", "log spacing needs positive bounds");
    std::vector<double> v(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const double f = steps == 1 ? 0.0 : static_cast<double>(k) / (steps - 1);
        // Interpolating the exponent keeps whole decades exact.
        v[static_cast<std::size_t>(k)] =
            log_spacing ? std::pow(10.0, std::lerp(std::log10(from), std::log10(to), f)) : std::lerp(from, to, f);
    }
    if (steps > 1) v.back() = to;
    return v;
}

// Config with the axis field overwritten. Checks that the axis applies to this scenario.
inline json with_axis_value(const json& base, const AxisInfo& axis, double value) {
    json j = base;
    const std::string section = axis.section;
    if (section == "optics") {
        if (!j.contains("optics")) throw ConfigError("--axis", std::string("axis ") + axis.name + " needs an optics block");
        const std::string kind = j["optics"].value("kind", "none");
        const std::string key = axis.key;
        const bool ok = (key == "focal_length_mm" && (kind == "thin_lens" || kind == "diffuser")) ||
                        (key == "d1_mm" && (kind == "thin_lens" || kind == "thick_lens")) ||
                        (key == "pitch_um" && kind == "array") ||
                        (key == "theta_d_deg" && kind == "diffuser" && j["optics"].value("type", "") == "uniform");
        if (!ok) throw ConfigError("--axis", std::string("axis ") + axis.name + " does not apply to optics kind " + kind);
    }
    if (!j.contains(section)) throw ConfigError("/" + section, "required block is missing");
    if (std::string(axis.key) == "divergence_deg") j[section].erase("waist_um");
    j[section][axis.key] = value;
    return j;
}

struct SweepRow {
    double axis_value = 0.0;
    std::optional<SafetyResult> result;
    std::string error;
};

inline unsigned worker_count(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BEAMSAFE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

inline std::vector<SweepRow> sweep(const json& base, const AxisInfo& axis, const std::vector<double>& values) {
    // Validate the base config once so structural errors abort instead of filling every row.
    parse_scenario(with_axis_value(base, axis, values.front()));
    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < values.size(); k = next++) {
            rows[k].axis_value = values[k];
            try {
                rows[k].result = evaluate(parse_scenario(with_axis_value(base, axis, values[k])));
            } catch (const std::exception& e) {
                rows[k].error = e.what();
            }
        }
    };
    const unsigned n = worker_count(values.size());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return rows;
}

inline constexpr const char* kSweepHeader = "axis_value,p_t_max_W,z_haz_m,alpha_rad,mpe_W_m2,branch_id";

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = std::string(kSweepHeader) + "\n";
    for (const auto& row : rows) {
        out += format_number(row.axis_value) + ",";
        if (row.result) {
            const auto& r = *row.result;
            out += format_number(r.p_t_max) + "," + format_number(r.z_haz) + "," + format_number(r.alpha) + "," +
                   format_number(r.mpe.mpe) + "," + r.mpe.branch_id + "\n";
        } else {
            std::string msg = row.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out += ",,,,error:" + msg + "\n";
        }
    }
    return out;
}

inline json sweep_json(const AxisInfo& axis, const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json rec{{"axis_value", row.axis_value}};
        if (row.result) {
            rec["result"] = to_json(*row.result);
        } else {
            rec["error"] = row.error;
        }
        arr.push_back(rec);
    }
    return json{{"axis", axis.name}, {"unit", axis.unit}, {"rows", arr}};
}

// ---- field export

inline constexpr int kMaxFieldGrid = 4096;

struct FieldGrid {
    int n = 0;
    double half_width = 0.0;
    double z = 0.0;
    std::vector<double> values;  // row-major, row index along y
    Point sample_peak;
    double sample_peak_value = 0.0;
    std::optional<PeakLocation> refined_peak;
};

inline FieldGrid field(const Scenario& s, double z, int grid_n) {
    if (grid_n < 2 || grid_n > kMaxFieldGrid) throw ConfigError("--grid", "must lie in [2, 4096]");
    if (s.optics != OpticsKind::None && s.optics != OpticsKind::Array) {
        throw ConfigError("/optics", "field export supports optics none or array");
    }
    const ModeCombination combo =
        s.combo ? *s.combo : ModeCombination::single({ModeFamily::LaguerreGaussian, 0, 0});
    const int side = s.optics == OpticsKind::Array ? s.side_count : 1;
    const double half_span = 0.5 * (side - 1) * s.pitch;
    const double spot = s.combo ? combination_spot_radius(combo, s.beam, z) : spot_radius(s.beam, z);

    FieldGrid g;
    g.n = grid_n;
    g.z = z;
    g.half_width = 4.0 * spot + half_span;
    g.values.resize(static_cast<std::size_t>(grid_n) * grid_n);
    const double step = 2.0 * g.half_width / (grid_n - 1);
    g.sample_peak_value = -1.0;
    for (int row = 0; row < grid_n; ++row) {
        const double y = -g.half_width + row * step;
        for (int col = 0; col < grid_n; ++col) {
            const double x = -g.half_width + col * step;
            double v = 0.0;
            for (int a = 0; a < side; ++a) {
                for (int b = 0; b < side; ++b) {
                    const Point rel{x - (-half_span + a * s.pitch), y - (-half_span + b * s.pitch)};
                    v += combination_irradiance(combo, s.beam, rel, z);
                }
            }
            v *= s.transmit_power;
            g.values[static_cast<std::size_t>(row) * grid_n + col] = v;
            if (v > g.sample_peak_value) {
                g.sample_peak_value = v;
                g.sample_peak = {x, y};
            }
        }
    }
    if (side == 1) g.refined_peak = peak_irradiance_location(combo, s.beam, z);
    return g;
}

inline std::string field_csv(const FieldGrid& g) {
    std::string out;
    out.reserve(g.values.size() * 18);
    for (int row = 0; row < g.n; ++row) {
        for (int col = 0; col < g.n; ++col) {
            if (col) out += ",";
            out += format_number(g.values[static_cast<std::size_t>(row) * g.n + col]);
        }
        out += "\n";
    }
    return out;
}

inline json field_sidecar(const FieldGrid& g, double transmit_power) {
    json j{{"z_m", g.z},
           {"grid_n", g.n},
           {"x_min_m", -g.half_width},
           {"x_max_m", g.half_width},
           {"y_min_m", -g.half_width},
           {"y_max_m", g.half_width},
           {"layout", "row-major, rows along y ascending, columns along x ascending"},
           {"units", "W/m^2"},
           {"transmit_power_W", transmit_power},
           {"sample_peak", {{"x_m", g.sample_peak.x}, {"y_m", g.sample_peak.y}, {"irradiance_W_m2", g.sample_peak_value}}}};
    if (g.refined_peak) {
        j["peak"] = {{"x_m", g.refined_peak->point.x},
                     {"y_m", g.refined_peak->point.y},
                     {"irradiance_W_m2", g.refined_peak->irradiance * transmit_power},
                     {"stationarity_residual", g.refined_peak->stationarity_residual},
                     {"max_gradient", g.refined_peak->max_gradient}};
    }
    return j;
}

} // namespace beamsafe::cli
