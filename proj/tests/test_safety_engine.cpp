#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "beamsafe/beamsafe.hpp"
#include "oracles/oracles.hpp"

using namespace beamsafe;

namespace {

const BeamParams kBeam = BeamParams::make(850e-9, 5e-6);
const ExposureContext kCtx = ExposureContext::make(850e-9, 100.0);

void expect_defining_equality(const SafetyResult& r) {
    const double lhs = r.p_t_max * r.eta_or_fraction * r.source_count;
    const double rhs = r.mpe.mpe * r.reference_area;
    EXPECT_NEAR(lhs, rhs, 1e-12 * rhs) << to_string(r.method);
}

} // namespace

TEST(SingleMode, ReferenceValuesAndOracle) {
    const auto a = ptmax_single_mode(kBeam, kCtx);
    EXPECT_NEAR(a.p_t_max, 1.354e-3, 1e-6);
    EXPECT_NEAR(a.z_haz, 0.1, 1e-15);
    EXPECT_NEAR(a.eta_or_fraction, 0.5668, 1e-4);
    EXPECT_NEAR(a.p_t_max, oracle::single_mode_ptmax(850e-9, 5e-6, 3.5e-3, 100.0), 1e-12 * a.p_t_max);
    const auto b = ptmax_single_mode(BeamParams::make(950e-9, 5e-6), kCtx);
    EXPECT_NEAR(b.p_t_max, 2.49e-3, 0.01e-3);
    EXPECT_NEAR(b.p_t_max - a.p_t_max, 1.14e-3, 0.01e-3);
    expect_defining_equality(a);
}

TEST(SingleMode, OracleAcrossRegimes) {
    for (double w0 : {2e-6, 5e-6, 20e-6, 100e-6, 1e-3}) {
        for (double nm : {720.0, 850.0, 1000.0, 1300.0}) {
            for (double t : {1e-3, 0.5, 10.0, 1e3}) {
                const auto r = ptmax_single_mode(BeamParams::make(nm * 1e-9, w0), ExposureContext::make(nm * 1e-9, t));
                const double expected = oracle::single_mode_ptmax(nm * 1e-9, w0, 3.5e-3, t);
                EXPECT_NEAR(r.p_t_max, expected, 1e-9 * expected) << w0 << " " << nm << " " << t;
                expect_defining_equality(r);
            }
        }
    }
}

TEST(SingleMode, PlateauAfterTenSecondsAndMonotoneBefore) {
    const double plateau = ptmax_single_mode(kBeam, ExposureContext::make(850e-9, 10.0)).p_t_max;
    for (double t : {20.0, 1e3, 3e4}) {
        EXPECT_DOUBLE_EQ(ptmax_single_mode(kBeam, ExposureContext::make(850e-9, t)).p_t_max, plateau);
    }
    double prev = 1e300;
    for (double t = 1e-3; t < 10.0; t *= 1.5) {
        const double v = ptmax_single_mode(kBeam, ExposureContext::make(850e-9, t)).p_t_max;
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(SingleMode, NondecreasingInWavelength) {
    double prev = 0.0;
    for (double nm = 700.0; nm < 1050.0; nm += 10.0) {
        const double v = ptmax_single_mode(BeamParams::make(nm * 1e-9, 5e-6), kCtx).p_t_max;
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(SingleMode, FlatThenRisingWithDivergence) {
    const double flat = ptmax_single_mode(BeamParams::from_divergence(850e-9, units::deg_to_rad(1.0)), kCtx).p_t_max;
    EXPECT_NEAR(ptmax_single_mode(BeamParams::from_divergence(850e-9, units::deg_to_rad(2.5)), kCtx).p_t_max, flat,
                1e-9 * flat);
    double prev = 0.0;
    for (double deg = 2.7; deg < 10.0; deg += 0.5) {
        const double v = ptmax_single_mode(BeamParams::from_divergence(850e-9, units::deg_to_rad(deg)), kCtx).p_t_max;
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(MSquared, UnitRatioReducesToSingleMode) {
    const auto a = ptmax_multimode_msquared(paraxial_divergence(kBeam), kCtx);
    EXPECT_NEAR(a.p_t_max, ptmax_single_mode(kBeam, kCtx).p_t_max, 1e-12);
    expect_defining_equality(a);
}

TEST(MSquared, WiderCombinationsAllowMorePower) {
    const double theta = paraxial_divergence(kBeam);
    EXPECT_GT(ptmax_multimode_msquared(1.9451 * theta, kCtx).p_t_max,
              ptmax_multimode_msquared(1.3248 * theta, kCtx).p_t_max);
}

TEST(MSquared, GapBetweenCombinationsWidensWithWavelength) {
    double prev = 0.0;
    for (double nm : {750.0, 850.0, 950.0, 1040.0}) {
        const BeamParams beam = BeamParams::make(nm * 1e-9, 5e-6);
        const double theta = paraxial_divergence(beam);
        const auto ctx = ExposureContext::make(nm * 1e-9, 100.0);
        const double gap = ptmax_multimode_msquared(1.9451 * theta, ctx).p_t_max -
                           ptmax_multimode_msquared(1.3248 * theta, ctx).p_t_max;
        EXPECT_GT(gap, prev);
        prev = gap;
    }
}

TEST(Decomposition, PureGaussianMatchesSingleMode) {
    const auto r = ptmax_multimode_decomposition(preset_combination("LG-Comb 1"), kBeam, kCtx);
    const double single = ptmax_single_mode(kBeam, kCtx).p_t_max;
    EXPECT_NEAR(r.p_t_max, single, 0.01 * single);
    expect_defining_equality(r);
}

TEST(Decomposition, AtLeastMSquaredForWideCombinations) {
    for (const char* name : {"LG-Comb 3", "LG-Comb 4", "LG-Comb 5"}) {
        const auto combo = preset_combination(name);
        const auto dec = ptmax_multimode_decomposition(combo, kBeam, kCtx);
        const auto msq = ptmax_multimode_msquared(combo, kBeam, kCtx);
        EXPECT_GE(dec.p_t_max, msq.p_t_max) << name;
        expect_defining_equality(dec);
        expect_defining_equality(msq);
    }
}

TEST(Decomposition, HazardScanStaysAtClosestDistanceForDivergentBeams) {
    const auto combo = preset_combination("LG-Comb 4");
    const auto scan = ptmax_multimode_decomposition_scan(combo, kBeam, kCtx);
    EXPECT_NEAR(scan.z_haz, 0.1, 1e-6);
    EXPECT_NEAR(scan.p_t_max, ptmax_multimode_decomposition(combo, kBeam, kCtx).p_t_max, 1e-6 * scan.p_t_max);
}

TEST(HazardPosition, ReferenceProfiles) {
    // Collimated beam, point source: the ratio never rises with distance.
    EXPECT_NEAR(most_hazardous_position([](double) { return std::make_pair(1.0, 20.0); }), 0.1, 1e-12);
    auto spreading = [&](double z) {
        const double w = spot_radius(kBeam, z);
        return std::make_pair(1.0 / (w * w), 19.95);
    };
    EXPECT_NEAR(most_hazardous_position(spreading), 0.1, 1e-12);
    auto alg1 = [&](double z) {
        const double frac = power_through_centered_aperture(kBeam, 1.0, 3.5e-3, z);
        return std::make_pair(frac, eye_mpe(kCtx, 2.0 * std::atan(kBeam.waist_radius / z)).mpe);
    };
    EXPECT_NEAR(most_hazardous_position(alg1), ptmax_single_mode(kBeam, kCtx).z_haz, 1e-9);
    EXPECT_THROW(most_hazardous_position(alg1, 0.05), ParameterError);
}

TEST(Lens, TwoFocalLengthsMatchesNoLens) {
    const auto r = ptmax_with_lens(kBeam, {0.04, 0.08}, kCtx);
    const double bare = ptmax_single_mode(kBeam, kCtx).p_t_max;
    EXPECT_NEAR(r.p_t_max, bare, 1e-5 * bare);
    expect_defining_equality(r);
}

TEST(Lens, FocalPlaneIsMostLimiting) {
    const double at_f = ptmax_with_lens(kBeam, {0.04, 0.04}, kCtx).p_t_max;
    for (double d1 : {0.02, 0.06, 0.08}) EXPECT_LE(at_f, ptmax_with_lens(kBeam, {0.04, d1}, kCtx).p_t_max);
}

TEST(Lens, LongFocalLengthPeakReachedAtSevenCentimetres) {
    double best = 0.0;
    for (double d1 = 0.01; d1 <= 0.16 + 1e-12; d1 += 0.005) {
        best = std::max(best, ptmax_with_lens(kBeam, {0.08, d1}, kCtx).p_t_max);
    }
    // alpha saturates at alpha_max across the virtual-image range, so the maximum is a plateau ending just before f.
    const double at_7 = ptmax_with_lens(kBeam, {0.08, 0.07}, kCtx).p_t_max;
    EXPECT_NEAR(at_7, best, 1e-9 * best);
    EXPECT_LT(ptmax_with_lens(kBeam, {0.08, 0.08}, kCtx).p_t_max, 0.1 * best);
    EXPECT_LT(ptmax_with_lens(kBeam, {0.08, 0.01}, kCtx).p_t_max, best);
}

TEST(Lens, ThickLensInThinLimitMatchesThinLens) {
    const ThickLensSpec thick{1.5, 0.0, -0.04, 0.04};
    for (double d1 : {0.02, 0.06, 0.08}) {
        const auto a = ptmax_with_abcd_lens(kBeam, thick_lens_abcd(thick), d1, kCtx);
        const auto b = ptmax_with_lens(kBeam, {0.04, d1}, kCtx);
        EXPECT_NEAR(a.p_t_max, b.p_t_max, 1e-9 * b.p_t_max) << d1;
        expect_defining_equality(a);
    }
}

TEST(Array, SingleEmitterMatchesSingleMode) {
    ArraySpec array{1, 0.0, kBeam, std::nullopt};
    const auto r = ptmax_array(array, kCtx);
    const double single = ptmax_single_mode(kBeam, kCtx).p_t_max;
    EXPECT_NEAR(r.p_t_max, single, 1e-5 * single);
    EXPECT_EQ(r.source_count, 1);
    expect_defining_equality(r);
}

TEST(Array, PitchRelaxesTheLimit) {
    const auto ctx = ExposureContext::make(850e-9, 10.0);
    const double tight = ptmax_array({5, 0.0, kBeam, std::nullopt}, ctx).p_t_max;
    const double wide = ptmax_array({5, 250e-6, kBeam, std::nullopt}, ctx).p_t_max;
    EXPECT_NEAR(wide / tight, 7.0, 0.5);
    double prev = 0.0;
    for (double pitch = 0.0; pitch <= 250e-6; pitch += 25e-6) {
        const auto r = ptmax_array({5, pitch, kBeam, std::nullopt}, ctx);
        EXPECT_GE(r.p_t_max, prev * (1.0 - 1e-12));
        EXPECT_LE(r.p_t_max, ptmax_single_mode(kBeam, ctx).p_t_max);
        expect_defining_equality(r);
        prev = r.p_t_max;
    }
}

TEST(Array, BlockFractionMatchesMonteCarlo) {
    const ArraySpec array{3, 2e-3, kBeam, std::nullopt};
    const double frac = detail::block_fraction(array, 3, 0.1, 3.5e-3, {});
    const double w = spot_radius(kBeam, 0.1);
    auto f = [&](double x, double y) {
        double total = 0.0;
        for (int a = -1; a <= 1; ++a) {
            for (int b = -1; b <= 1; ++b) {
                const double dx = x - a * 2e-3;
                const double dy = y - b * 2e-3;
                total += 2.0 / (oracle::pi * w * w) * std::exp(-2.0 * (dx * dx + dy * dy) / (w * w));
            }
        }
        return total;
    };
    const auto mc = oracle::monte_carlo_disk(f, 0.0, 0.0, 3.5e-3, 2'000'000, 3);
    EXPECT_LT(std::abs(frac - mc.mean), 3.0 * mc.sigma);
}

TEST(Diffuser, LongerFocalLengthAllowsMorePower) {
    for (double deg : {5.0, 10.0, 20.0}) {
        const BeamParams beam = BeamParams::from_divergence(850e-9, units::deg_to_rad(deg));
        const auto near = ptmax_lambertian_diffuser(DiffuserSpec::lambertian(1.0, 0.025, 1e-3), beam, kCtx);
        const auto far = ptmax_lambertian_diffuser(DiffuserSpec::lambertian(1.0, 0.025, 10e-3), beam, kCtx);
        EXPECT_GT(far.p_t_max, near.p_t_max) << deg;
        expect_defining_equality(far);
        const auto u_near = ptmax_uniform_diffuser(DiffuserSpec::uniform(units::deg_to_rad(20.0), 0.025, 1e-3), beam, kCtx);
        const auto u_far = ptmax_uniform_diffuser(DiffuserSpec::uniform(units::deg_to_rad(20.0), 0.025, 10e-3), beam, kCtx);
        EXPECT_GT(u_far.p_t_max, u_near.p_t_max) << deg;
        expect_defining_equality(u_far);
    }
}

TEST(Diffuser, WiderUniformDiffuserAllowsMorePower) {
    const BeamParams beam = BeamParams::from_divergence(850e-9, units::deg_to_rad(10.0));
    const auto narrow = ptmax_uniform_diffuser(DiffuserSpec::uniform(units::deg_to_rad(20.0), 0.025, 5e-3), beam, kCtx);
    const auto wide = ptmax_uniform_diffuser(DiffuserSpec::uniform(units::deg_to_rad(50.0), 0.025, 5e-3), beam, kCtx);
    EXPECT_GT(wide.p_t_max, narrow.p_t_max);
}

TEST(Diffuser, LambertianFollowsConeFraction) {
    const BeamParams beam = BeamParams::from_divergence(850e-9, units::deg_to_rad(10.0));
    for (double m : {1.0, 5.0}) {
        const auto r = ptmax_lambertian_diffuser(DiffuserSpec::lambertian(m, 0.025, 5e-3), beam, kCtx);
        const double psi = std::atan(3.5e-3 / 0.1);
        const double expected = r.mpe.mpe * oracle::pi * 3.5e-3 * 3.5e-3 / (1.0 - std::pow(std::cos(psi), m + 1.0));
        EXPECT_NEAR(r.p_t_max, expected, 1e-12 * expected);
    }
    // Pupil filling the hemisphere: all power captured.
    const auto close = ptmax_lambertian_diffuser(DiffuserSpec::lambertian(1.0, 0.025, 5e-3), beam, kCtx, 1e-9);
    EXPECT_NEAR(close.p_t_max, close.mpe.mpe * oracle::pi * 3.5e-3 * 3.5e-3, 1e-9 * close.p_t_max);
}

TEST(Skin, WideBeamExample) {
    const auto ctx = ExposureContext::make(1550e-9, 100.0);
    // W(d_sh) = 0.2 m at d_sh = 1 m.
    const double theta = 0.2;
    const BeamParams beam = BeamParams::from_divergence(1550e-9, theta);
    const double w = spot_radius(beam, 1.0);
    const auto r = ptmax_skin_gaussian(beam, {1.0}, ctx);
    EXPECT_DOUBLE_EQ(r.mpe.mpe, 100.0);
    const double r_a = 1.75e-3;
    EXPECT_NEAR(r.p_t_max, 100.0 * oracle::pi * r_a * r_a / (1.0 - std::exp(-2.0 * r_a * r_a / (w * w))),
                1e-9 * r.p_t_max);
    EXPECT_NEAR(r.p_t_max, 6.28, 0.1);
    expect_defining_equality(r);
}

TEST(Skin, MonotoneInShieldDistanceAndDivergence) {
    const auto ctx = ExposureContext::make(1550e-9, 100.0);
    const BeamParams beam = BeamParams::from_divergence(1550e-9, units::deg_to_rad(1.0));
    double prev = 0.0;
    for (double d = 0.05; d < 2.0; d += 0.05) {
        const double v = ptmax_skin_gaussian(beam, {d}, ctx).p_t_max;
        EXPECT_GE(v, prev * (1.0 - 1e-12));
        prev = v;
    }
    prev = 0.0;
    for (double deg : {0.5, 1.0, 2.0, 5.0}) {
        const double v =
            ptmax_skin_gaussian(BeamParams::from_divergence(1550e-9, units::deg_to_rad(deg)), {0.5}, ctx).p_t_max;
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(Skin, SmallBeamUsesBeamArea) {
    const auto ctx = ExposureContext::make(1550e-9, 100.0);
    const BeamParams beam = BeamParams::make(1550e-9, 0.5e-3);
    const auto r = ptmax_skin_gaussian(beam, {0.0}, ctx);
    EXPECT_EQ(r.eta_or_fraction, 1.0);
    EXPECT_NEAR(r.reference_area, oracle::pi * 0.25e-6, 1e-15);
    EXPECT_NEAR(r.p_t_max, 1000.0 * oracle::pi * 0.25e-6, 1e-12);
    expect_defining_equality(r);
}

TEST(Skin, BelowTheSkinBandIsUnsupported) {
    EXPECT_THROW(ptmax_skin_gaussian(kBeam, {0.5}, kCtx), UnsupportedDomainError);
}

TEST(Skin, MultimodeReducesToGaussianAndSpreads) {
    const auto ctx = ExposureContext::make(1550e-9, 100.0);
    const BeamParams beam = BeamParams::from_divergence(1550e-9, units::deg_to_rad(2.0));
    const auto gauss = ptmax_skin_gaussian(beam, {0.5}, ctx);
    const auto pure = ptmax_skin_multimode(preset_combination("LG-Comb 1"), beam, {0.5}, ctx);
    EXPECT_NEAR(pure.p_t_max, gauss.p_t_max, 0.01 * gauss.p_t_max);
    const auto wide = ptmax_skin_multimode(preset_combination("LG-Comb 4"), beam, {0.5}, ctx);
    EXPECT_LE(wide.eta_or_fraction, pure.eta_or_fraction);
    expect_defining_equality(wide);
}

TEST(Skin, MultimodeApertureMuchLargerThanSpot) {
    const auto ctx = ExposureContext::make(1550e-9, 100.0);
    const BeamParams beam = BeamParams::make(1550e-9, 0.35e-3 / 5.0);
    // At the waist the spot is well inside the 1.75 mm skin aperture.
    const auto combo = ModeCombination::single({ModeFamily::LaguerreGaussian, 0, 0});
    const auto r = ptmax_skin_multimode(combo, beam, {0.0}, ctx);
    EXPECT_GT(r.eta_or_fraction, 0.999);
    EXPECT_NEAR(r.p_t_max, r.mpe.mpe * oracle::pi * 1.75e-3 * 1.75e-3, 1e-3 * r.p_t_max);
}
