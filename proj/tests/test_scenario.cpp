#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>

#include "scenario.hpp"

using namespace beamsafe;
using namespace beamsafe::cli;

namespace {

json single_mode_config() {
    return json::parse(R"({
        "source": { "wavelength_nm": 850, "waist_um": 5 },
        "exposure": { "t_ex_s": 100 }
    })");
}

std::string config_error_path(const json& j) {
    try {
        parse_scenario(j);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "";
}

double cell(const FieldGrid& g, int row, int col) { return g.values[static_cast<std::size_t>(row) * g.n + col]; }

} // namespace

TEST(Config, SingleModeMatchesLibrary) {
    const auto r = evaluate(parse_scenario(single_mode_config()));
    const double lib =
        ptmax_single_mode(BeamParams::make(850e-9, 5e-6), ExposureContext::make(850e-9, 100.0)).p_t_max;
    EXPECT_NEAR(r.p_t_max, lib, 1e-12 * lib);
}

TEST(Config, UnitsAreConvertedAtTheBoundary) {
    auto j = single_mode_config();
    j["exposure"]["pupil_radius_mm"] = 3.5;
    j["optics"] = {{"kind", "thin_lens"}, {"focal_length_mm", 40}, {"d1_mm", 80}};
    const auto s = parse_scenario(j);
    EXPECT_DOUBLE_EQ(s.thin_lens.focal_length, 0.04);
    EXPECT_DOUBLE_EQ(s.thin_lens.object_distance, 0.08);
    EXPECT_DOUBLE_EQ(s.exposure.pupil_radius, 3.5e-3);
    EXPECT_EQ(evaluate(s).method, Method::Lens);
}

TEST(Config, ErrorsCarryTheFieldPath) {
    auto j = single_mode_config();
    j["exposure"].erase("t_ex_s");
    EXPECT_EQ(config_error_path(j), "/exposure/t_ex_s");

    j = single_mode_config();
    j["source"]["colour"] = "red";
    EXPECT_EQ(config_error_path(j), "/source/colour");

    j = single_mode_config();
    j["source"]["wavelength_nm"] = -5;
    EXPECT_EQ(config_error_path(j), "/source/wavelength_nm");

    j = single_mode_config();
    j["source"]["divergence_deg"] = 2.0;
    EXPECT_FALSE(config_error_path(j).empty());

    j = single_mode_config();
    j["method"] = "decomposition";
    EXPECT_FALSE(config_error_path(j).empty());

    j = single_mode_config();
    j["source"]["modes"] = json::array({{{"family", "LG"}, {"l", 0}, {"m", 0}, {"coefficient", 0.7}}});
    EXPECT_THROW(parse_scenario(j), ParameterError);
}

TEST(Config, SkinBelowItsBandIsUnsupported) {
    auto j = single_mode_config();
    j["exposure"]["tissue"] = "skin";
    j["exposure"]["shield_distance_m"] = 0.5;
    EXPECT_THROW(evaluate(parse_scenario(j)), UnsupportedDomainError);
}

TEST(Config, PresetDecompositionAndMSquared) {
    auto j = single_mode_config();
    j["source"]["preset"] = "LG-Comb 4";
    j["method"] = "decomposition";
    const auto dec = evaluate(parse_scenario(j));
    EXPECT_EQ(dec.method, Method::Decomposition);
    j["method"] = "msquared";
    const auto msq = evaluate(parse_scenario(j));
    EXPECT_EQ(msq.method, Method::MSquared);
    EXPECT_GT(dec.p_t_max, msq.p_t_max);
}

TEST(Config, ScenarioFilesParse) {
    for (const char* name : {"single_mode_850", "single_mode_950", "lg_comb1_decomposition", "lg_comb4_msquared",
                             "thin_lens", "thick_lens", "array_5x5", "lambertian_diffuser", "uniform_diffuser",
                             "skin_1550", "custom_modes"}) {
        const std::string path = std::string(BEAMSAFE_SCENARIO_DIR) + "/" + name + ".json";
        std::ifstream in(path);
        ASSERT_TRUE(in.good()) << path;
        const auto r = evaluate(parse_scenario(json::parse(in)));
        EXPECT_GT(r.p_t_max, 0.0) << name;
    }
}

TEST(Sweep, AxisValues) {
    const auto lin = axis_values(0.0, 250.0, 6, false);
    EXPECT_DOUBLE_EQ(lin[1], 50.0);
    EXPECT_DOUBLE_EQ(lin.back(), 250.0);
    const auto lg = axis_values(1e-3, 1e3, 7, true);
    EXPECT_NEAR(lg[3], 1.0, 1e-12);
    EXPECT_EQ(axis_values(1e-3, 1e3, 4, true)[2], 10.0);
    EXPECT_THROW(axis_values(0.0, 1.0, 3, true), ConfigError);
    EXPECT_THROW(find_axis("colour"), ConfigError);
}

TEST(Sweep, OrderedAndIdenticalAcrossThreadCounts) {
    const auto values = axis_values(1e-3, 3e4, 40, true);
    ::setenv("BEAMSAFE_THREADS", "1", 1);
    const std::string one = sweep_csv(sweep(single_mode_config(), find_axis("t_ex"), values));
    ::setenv("BEAMSAFE_THREADS", "4", 1);
    const std::string four = sweep_csv(sweep(single_mode_config(), find_axis("t_ex"), values));
    ::unsetenv("BEAMSAFE_THREADS");
    EXPECT_EQ(one, four);
    EXPECT_EQ(one.rfind(kSweepHeader, 0), 0u);
    const auto rows = sweep(single_mode_config(), find_axis("t_ex"), values);
    for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_EQ(rows[k].axis_value, values[k]);
}

TEST(Sweep, ExposureKneeAtTenSeconds) {
    const auto values = axis_values(1e-3, 3e4, 50, true);
    const auto rows = sweep(single_mode_config(), find_axis("t_ex"), values);
    const double plateau = ptmax_single_mode(BeamParams::make(850e-9, 5e-6), ExposureContext::make(850e-9, 10.0)).p_t_max;
    for (const auto& row : rows) {
        ASSERT_TRUE(row.result.has_value());
        if (row.axis_value >= 10.0) {
            EXPECT_DOUBLE_EQ(row.result->p_t_max, plateau);
        } else {
            EXPECT_GT(row.result->p_t_max, plateau);
        }
    }
}

TEST(Sweep, OutOfDomainRowsBecomeErrors) {
    const auto rows = sweep(single_mode_config(), find_axis("t_ex"), {1e-4, 1.0});
    EXPECT_FALSE(rows[0].result.has_value());
    EXPECT_NE(rows[0].error.find("1e-3"), std::string::npos);
    EXPECT_TRUE(rows[1].result.has_value());
    const std::string csv = sweep_csv(rows);
    EXPECT_NE(csv.find("0.0001,,,,,error:"), std::string::npos);
}

TEST(Sweep, DivergenceFlatThenRising) {
    const auto values = axis_values(0.5, 10.0, 39, false);
    const auto rows = sweep(single_mode_config(), find_axis("divergence"), values);
    const double flat = rows.front().result->p_t_max;
    for (const auto& row : rows) {
        if (row.axis_value < 2.6) {
            EXPECT_NEAR(row.result->p_t_max, flat, 1e-9 * flat) << row.axis_value;
        } else if (row.axis_value > 2.7) {
            EXPECT_GT(row.result->p_t_max, flat) << row.axis_value;
        }
    }
}

TEST(Sweep, WavelengthRisesSteeplyThenSteadily) {
    const auto values = axis_values(700.0, 1390.0, 70, false);
    const auto rows = sweep(single_mode_config(), find_axis("wavelength"), values);
    auto p = [&](double nm) {
        for (const auto& row : rows) {
            if (std::abs(row.axis_value - nm) < 1e-9) return row.result->p_t_max;
        }
        ADD_FAILURE() << "missing " << nm;
        return 0.0;
    };
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_GE(rows[k].result->p_t_max, rows[k - 1].result->p_t_max) << rows[k].axis_value;
    }
    EXPECT_GT(p(1200.0) / p(1150.0), 5.0);
    // After the C7 ramp the growth is close to linear.
    const double slope_a = p(1300.0) - p(1200.0);
    const double slope_b = p(1390.0) - p(1290.0);
    EXPECT_NEAR(slope_b / slope_a, 1.0, 0.1);
}

TEST(Sweep, AxisMustApply) {
    EXPECT_THROW(sweep(single_mode_config(), find_axis("pitch"), {0.0, 1.0}), ConfigError);
}

TEST(Field, GaussianAtWaistPeaksAtCentre) {
    const auto g = field(parse_scenario(single_mode_config()), 0.0, 33);
    EXPECT_EQ(g.sample_peak.x, 0.0);
    EXPECT_EQ(g.sample_peak.y, 0.0);
    EXPECT_EQ(g.sample_peak_value, cell(g, 16, 16));
    ASSERT_TRUE(g.refined_peak.has_value());
}

TEST(Field, HermiteFirstOrderHasTwoLobes) {
    auto j = single_mode_config();
    j["source"]["modes"] = json::array({{{"family", "HG"}, {"l", 1}, {"m", 0}, {"coefficient", 1.0}}});
    const auto g = field(parse_scenario(j), 0.0, 41);
    for (int row = 0; row < g.n; ++row) EXPECT_EQ(cell(g, row, 20), 0.0);
    for (int row = 0; row < g.n; ++row) {
        for (int col = 0; col < g.n; ++col) EXPECT_NEAR(cell(g, row, col), cell(g, row, g.n - 1 - col), 1e-9 * g.sample_peak_value);
    }
    EXPECT_NE(g.sample_peak.x, 0.0);
}

TEST(Field, SmallArrayMergesIntoOneLobe) {
    auto j = single_mode_config();
    j["optics"] = {{"kind", "array"}, {"side_count", 3}, {"pitch_um", 250}};
    const auto g = field(parse_scenario(j), 0.1, 41);
    EXPECT_NEAR(g.sample_peak.x, 0.0, 1e-15);
    EXPECT_NEAR(g.sample_peak.y, 0.0, 1e-15);
    // Monotone fall-off from the centre along the x axis: no separate lobes.
    for (int col = 21; col < g.n; ++col) EXPECT_LT(cell(g, 20, col), cell(g, 20, col - 1));
}

TEST(Field, GridCapAndDeterminism) {
    const auto s = parse_scenario(single_mode_config());
    EXPECT_THROW(field(s, 0.1, 5000), ConfigError);
    EXPECT_EQ(field_csv(field(s, 0.1, 17)), field_csv(field(s, 0.1, 17)));
}
