#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "beamsafe/errors.hpp"
#include "beamsafe/exposure_limits.hpp"
#include "beamsafe/gaussian_beam.hpp"
#include "beamsafe/numerics.hpp"
#include "beamsafe/optical_elements.hpp"
#include "beamsafe/transverse_modes.hpp"
#include "beamsafe/units.hpp"

namespace beamsafe {

enum class Method {
    SingleMode,
    MSquared,
    Decomposition,
    Lens,
    Array,
    LambertianDiffuser,
    UniformDiffuser,
    SkinGaussian,
    SkinMultimode
};

inline const char* to_string(Method m) {
    switch (m) {
    case Method::SingleMode: return "single_mode";
    case Method::MSquared: return "msquared";
    case Method::Decomposition: return "decomposition";
    case Method::Lens: return "lens";
    case Method::Array: return "array";
    case Method::LambertianDiffuser: return "lambertian_diffuser";
    case Method::UniformDiffuser: return "uniform_diffuser";
    case Method::SkinGaussian: return "skin_gaussian";
    case Method::SkinMultimode: return "skin_multimode";
    }
    return "?";
}

// P_t,max with its audit trail. The defining equality is
// p_t_max * eta_or_fraction * source_count = mpe.mpe * reference_area.
struct SafetyResult {
    double p_t_max = 0.0;
    double z_haz = 0.0;
    double alpha = 0.0;
    double eta_or_fraction = 1.0;  // per-source power fraction entering the aperture
    MpeResult mpe;
    Method method = Method::SingleMode;
    int source_count = 1;          // sources whose power adds in the aperture
    double reference_area = 0.0;   // pi r_p^2, or the beam area for small skin beams
    std::vector<std::string> notes;
};

// Full-angle divergence above which a beam close to the source is evaluated at 10 cm.
inline constexpr double kWideBeamDivergence = 92e-3;
inline constexpr double kClosestViewingDistance = 0.1;

namespace detail {

inline SafetyResult finish(SafetyResult r, double aperture_area) {
    r.reference_area = aperture_area;
    r.p_t_max = r.mpe.mpe * aperture_area / (r.eta_or_fraction * r.source_count);
    return r;
}

inline double pupil_area(const ExposureContext& ctx) { return units::pi * ctx.pupil_radius * ctx.pupil_radius; }

// eta with the far-field spot W = lambda z / (pi w0).
inline double far_field_eta(const BeamParams& beam, double pupil_radius, double z) {
    const double k = units::pi * beam.waist_radius / (beam.wavelength * z);
    return -std::expm1(-2.0 * pupil_radius * pupil_radius * k * k);
}

struct SingleModeGeometry {
    double z_haz = 0.0;
    double alpha = 0.0;
    std::string note;
};

inline SingleModeGeometry single_mode_geometry(const BeamParams& beam, double pupil_radius) {
    const double d86 = d86_distance_far_field(beam, pupil_radius);
    const double full_divergence = 2.0 * paraxial_divergence(beam);
    SingleModeGeometry g;
    if (full_divergence > kWideBeamDivergence && d86 < kClosestViewingDistance) {
        g.z_haz = kClosestViewingDistance;
        g.alpha = 2.0 * std::atan(beam.waist_radius / g.z_haz);
        g.note = "z_haz fixed at 0.1 m (2*theta > 92 mrad and d86 < 0.1 m)";
        return g;
    }
    g.alpha = 2.0 * std::atan(beam.waist_radius / d86);
    if (g.alpha < kAlphaMin) {
        g.z_haz = beam.waist_radius / 0.0021;
        g.note = "z_haz = w0/0.0021 (alpha from d86 below alpha_min)";
    } else {
        g.z_haz = 9.2 * units::pi * beam.waist_radius / (2.0 * beam.wavelength);
        g.note = "z_haz = 9.2*pi*w0/(2*lambda) (alpha from d86 at or above alpha_min)";
    }
    return g;
}

inline SafetyResult single_mode_pipeline(const BeamParams& beam, const ExposureContext& ctx,
                                         std::optional<double> alpha_override, Method method) {
    const SingleModeGeometry g = single_mode_geometry(beam, ctx.pupil_radius);
    SafetyResult r;
    r.method = method;
    r.z_haz = g.z_haz;
    r.alpha = alpha_override.value_or(g.alpha);
    r.notes.push_back(g.note);
    r.eta_or_fraction = far_field_eta(beam, ctx.pupil_radius, g.z_haz);
    r.mpe = eye_mpe(ctx, r.alpha);
    return finish(std::move(r), pupil_area(ctx));
}

inline ExposureContext with_wavelength(ExposureContext ctx, double wavelength) {
    ctx.wavelength = wavelength;
    return ctx;
}

} // namespace detail

// Single-mode Gaussian source. The beam wavelength overrides ctx.wavelength.
inline SafetyResult ptmax_single_mode(const BeamParams& beam, const ExposureContext& ctx) {
    return detail::single_mode_pipeline(beam, detail::with_wavelength(ctx, beam.wavelength), std::nullopt,
                                        Method::SingleMode);
}

// Multimode source reduced to the embedded Gaussian with the real-beam divergence theta_r.
inline SafetyResult ptmax_multimode_msquared(double theta_r, const ExposureContext& ctx) {
    const EmbeddedGaussian eg = embedded_gaussian(theta_r, ctx.wavelength);
    const BeamParams embedded = BeamParams::make(ctx.wavelength, eg.w0_em);
    SafetyResult r = detail::single_mode_pipeline(embedded, ctx, std::nullopt, Method::MSquared);
    r.notes.push_back("embedded Gaussian w0_em = " + detail::format_number(eg.w0_em) + " m");
    return r;
}

inline SafetyResult ptmax_multimode_msquared(const ModeCombination& combo, const BeamParams& beam,
                                             const ExposureContext& ctx) {
    const double theta_r = combination_divergence_ratio(combo, beam) * paraxial_divergence(beam);
    return ptmax_multimode_msquared(theta_r, detail::with_wavelength(ctx, beam.wavelength));
}

namespace detail {

struct DecompositionPoint {
    double fraction = 0.0;
    double alpha = 0.0;
    Point peak;
};

inline DecompositionPoint decomposition_at(const ModeCombination& combo, const BeamParams& beam,
                                           const ExposureContext& ctx, double w0_em, double z,
                                           const QuadratureSpec& spec) {
    DecompositionPoint p;
    p.peak = peak_irradiance_location(combo, beam, z).point;
    p.fraction = power_through_disk(combo, beam, 1.0, p.peak, ctx.pupil_radius, z, spec);
    p.alpha = 2.0 * std::atan(w0_em / z);
    return p;
}

} // namespace detail

// Peak-centred pupil power of the actual mode mixture at z_eval.
// The subtense angle uses the embedded Gaussian waist as source size.
inline SafetyResult ptmax_multimode_decomposition(const ModeCombination& combo, const BeamParams& beam,
                                                  const ExposureContext& ctx,
                                                  double z_eval = kClosestViewingDistance,
                                                  const QuadratureSpec& spec = {}) {
    detail::require(z_eval > 0.0, "evaluation distance must be > 0");
    const ExposureContext c = detail::with_wavelength(ctx, beam.wavelength);
    const double ratio = combination_divergence_ratio(combo, beam);
    const double w0_em = beam.waist_radius / ratio;
    const auto p = detail::decomposition_at(combo, beam, c, w0_em, z_eval, spec);
    SafetyResult r;
    r.method = Method::Decomposition;
    r.z_haz = z_eval;
    r.alpha = p.alpha;
    r.eta_or_fraction = p.fraction;
    r.mpe = eye_mpe(c, p.alpha);
    r.notes.push_back("pupil centred on peak at (" + detail::format_number(p.peak.x) + ", " +
                      detail::format_number(p.peak.y) + ") m");
    return detail::finish(std::move(r), detail::pupil_area(c));
}

inline constexpr int kHazardScanPointsPerDecade = 200;

// argmax over [0.1 m, z_upper] of exposure / MPE. profile(z) returns {exposure, mpe}.
inline double most_hazardous_position(const std::function<std::pair<double, double>(double)>& profile,
                                      double z_upper = 100.0) {
    detail::require(z_upper > kClosestViewingDistance, "upper scan bound must exceed 0.1 m");
    auto ratio = [&](double z) {
        const auto [exposure, mpe] = profile(z);
        return exposure / mpe;
    };
    return argmax_scan(ratio, kClosestViewingDistance, z_upper, kHazardScanPointsPerDecade,
                       1e-9 * kClosestViewingDistance);
}

// Decomposition evaluated at the most hazardous position instead of a fixed plane.
inline SafetyResult ptmax_multimode_decomposition_scan(const ModeCombination& combo, const BeamParams& beam,
                                                       const ExposureContext& ctx, double z_upper = 10.0,
                                                       const QuadratureSpec& spec = {}) {
    const ExposureContext c = detail::with_wavelength(ctx, beam.wavelength);
    const double w0_em = beam.waist_radius / combination_divergence_ratio(combo, beam);
    const double z = most_hazardous_position(
        [&](double zz) {
            const auto p = detail::decomposition_at(combo, beam, c, w0_em, zz, spec);
            return std::make_pair(p.fraction, eye_mpe(c, p.alpha).mpe);
        },
        z_upper);
    SafetyResult r = ptmax_multimode_decomposition(combo, beam, ctx, z, spec);
    r.notes.push_back("z_haz from hazard-ratio scan over [0.1, " + detail::format_number(z_upper) + "] m");
    return r;
}

namespace detail {

inline SafetyResult lens_pipeline(const BeamParams& beam, double d1, double d2, double w2, const ExposureContext& ctx) {
    const ExposureContext c = with_wavelength(ctx, beam.wavelength);
    const BeamParams imaged = BeamParams::make(beam.wavelength, w2);
    const double kappa = w2 / beam.waist_radius;
    if (d2 > 0.0) {
        SafetyResult r = single_mode_pipeline(imaged, c, std::nullopt, Method::Lens);
        r.notes.push_back("real image: d2 = " + format_number(d2) + " m, kappa = " + format_number(kappa));
        return r;
    }
    // Virtual image: the apparent source is the beam footprint on the lens.
    const double w_lens = spot_radius(beam, d1);
    const double z_haz = single_mode_geometry(imaged, c.pupil_radius).z_haz;
    const double alpha = 2.0 * std::atan(w_lens / z_haz);
    SafetyResult r = single_mode_pipeline(imaged, c, alpha, Method::Lens);
    r.notes.push_back("virtual image: d2 = " + format_number(d2) + " m, apparent source W(d1) = " +
                      format_number(w_lens) + " m");
    return r;
}

} // namespace detail

// Thin lens at distance d1 from the source waist.
inline SafetyResult ptmax_with_lens(const BeamParams& beam, const ThinLensSpec& lens, const ExposureContext& ctx) {
    const ThinLensImage img = thin_lens_image(beam, lens);
    return detail::lens_pipeline(beam, lens.object_distance, img.d2, img.w2, ctx);
}

// General lens given by its ray-transfer matrix; the output waist comes from the q transform.
inline SafetyResult ptmax_with_abcd_lens(const BeamParams& beam, const AbcdMatrix& lens, double object_distance,
                                         const ExposureContext& ctx) {
    const ComplexBeamParameter q_in(object_distance, beam.rayleigh_range());
    const ComplexBeamParameter q_out = transform_q(lens, q_in);
    return detail::lens_pipeline(beam, object_distance, q_out.distance_to_waist(),
                                 q_out.waist_radius(beam.wavelength), ctx);
}

struct ArraySpec {
    int side_count = 1;
    double pitch = 0.0;
    BeamParams emitter;
    std::optional<ModeCombination> per_emitter_combo;

    void validate() const {
        detail::require(side_count >= 1, "array side count must be >= 1");
        detail::require(pitch >= 0.0 && std::isfinite(pitch), "array pitch must be >= 0");
    }
};

namespace detail {

// Pupil power fraction of a centred i x i block of unit-power emitters.
inline double block_fraction(const ArraySpec& array, int i, double z, double pupil_radius,
                             const QuadratureSpec& spec) {
    const double w = spot_radius(array.emitter, z);
    const double half_span = 0.5 * (i - 1) * array.pitch;
    const bool far_field = z > 100.0 * array.side_count * array.pitch;
    if (far_field || i == 1) {
        const double single = array.per_emitter_combo
                                   ? power_through_disk(*array.per_emitter_combo, array.emitter, 1.0, {0.0, 0.0},
                                                        pupil_radius, z, spec)
                                   : -std::expm1(-2.0 * pupil_radius * pupil_radius / (w * w));
        return static_cast<double>(i) * i * single;
    }
    auto irradiance = [&](double x, double y) {
        double total = 0.0;
        for (int a = 0; a < i; ++a) {
            const double ex = -half_span + a * array.pitch;
            for (int b = 0; b < i; ++b) {
                const double ey = -half_span + b * array.pitch;
                const Point rel{x - ex, y - ey};
                total += array.per_emitter_combo
                             ? combination_irradiance(*array.per_emitter_combo, array.emitter, rel, z)
                             : 2.0 / (units::pi * w * w) * std::exp(-2.0 * (rel.x * rel.x + rel.y * rel.y) / (w * w));
            }
        }
        return total;
    };
    return integrate_disk(irradiance, {0.0, 0.0}, pupil_radius, spec).value;
}

} // namespace detail

// Per-emitter P_t,max of an N x N array, minimised over the centred i x i sub-arrays.
inline SafetyResult ptmax_array(const ArraySpec& array, const ExposureContext& ctx, const QuadratureSpec& spec = {}) {
    array.validate();
    const ExposureContext c = detail::with_wavelength(ctx, array.emitter.wavelength);
    const double w0 = array.emitter.waist_radius;
    const double z_haz =
        std::max(kClosestViewingDistance, detail::single_mode_geometry(array.emitter, c.pupil_radius).z_haz);
    const double a_max = alpha_max(c.exposure_duration);
    std::optional<SafetyResult> best;
    for (int i = 1; i <= array.side_count; ++i) {
        const double raw = 2.0 * std::atan(((i - 1) * array.pitch + 2.0 * w0) / (2.0 * z_haz));
        SafetyResult r;
        r.method = Method::Array;
        r.z_haz = z_haz;
        r.alpha = std::clamp(raw, kAlphaMin, a_max);
        r.source_count = i * i;
        r.eta_or_fraction = detail::block_fraction(array, i, z_haz, c.pupil_radius, spec) / (i * i);
        r.mpe = eye_mpe(c, r.alpha);
        r = detail::finish(std::move(r), detail::pupil_area(c));
        if (!best || r.p_t_max < best->p_t_max) best = std::move(r);
    }
    best->notes.push_back("limiting block " + std::to_string(static_cast<int>(std::lround(std::sqrt(best->source_count)))) +
                          "x" + std::to_string(static_cast<int>(std::lround(std::sqrt(best->source_count)))) +
                          "; z_haz = max(0.1 m, single-emitter z_haz)");
    return *best;
}

inline SafetyResult ptmax_lambertian_diffuser(const DiffuserSpec& spec, const BeamParams& beam,
                                              const ExposureContext& ctx,
                                              double z_haz = kClosestViewingDistance) {
    spec.validate();
    detail::require(spec.kind == DiffuserKind::Lambertian, "diffuser is not Lambertian");
    detail::require(z_haz > 0.0, "hazard distance must be > 0");
    const ExposureContext c = detail::with_wavelength(ctx, beam.wavelength);
    const double w_f = spot_radius(beam, spec.collimating_focal_length);
    SafetyResult r;
    r.method = Method::LambertianDiffuser;
    r.z_haz = z_haz;
    r.alpha = 2.0 * std::atan(w_f / z_haz);
    r.mpe = eye_mpe(c, r.alpha);
    const double psi = std::atan(c.pupil_radius / z_haz);
    r.eta_or_fraction = lambertian_received_power(1.0, spec.lambertian_order, psi);
    return detail::finish(std::move(r), detail::pupil_area(c));
}

inline SafetyResult ptmax_uniform_diffuser(const DiffuserSpec& spec, const BeamParams& beam,
                                           const ExposureContext& ctx, double z_haz = kClosestViewingDistance) {
    spec.validate();
    detail::require(spec.kind == DiffuserKind::Uniform, "diffuser is not uniform");
    detail::require(z_haz > 0.0, "hazard distance must be > 0");
    const ExposureContext c = detail::with_wavelength(ctx, beam.wavelength);
    const double w_f = spot_radius(beam, spec.collimating_focal_length);
    SafetyResult r;
    r.method = Method::UniformDiffuser;
    r.z_haz = z_haz;
    r.alpha = 2.0 * std::atan(w_f / z_haz);
    r.mpe = eye_mpe(c, r.alpha);
    const double z_virtual = z_haz + w_f / std::tan(0.5 * spec.fwhm_angle);
    const double psi = std::atan(c.pupil_radius / z_virtual);
    r.eta_or_fraction = uniform_received_power(1.0, spec.fwhm_angle, psi);
    r.notes.push_back("virtual apex distance z' = " + detail::format_number(z_virtual) + " m");
    return detail::finish(std::move(r), detail::pupil_area(c));
}

struct ShieldContext {
    double shield_distance = 0.0;

    void validate() const { detail::require(shield_distance >= 0.0, "shield distance must be >= 0"); }
};

// Skin limit of a Gaussian beam at the shield plane.
inline SafetyResult ptmax_skin_gaussian(const BeamParams& beam, const ShieldContext& shield,
                                        const ExposureContext& ctx) {
    shield.validate();
    const ExposureContext c = detail::with_wavelength(ctx, beam.wavelength);
    const double w = spot_radius(beam, shield.shield_distance);
    const double beam_area = units::pi * w * w;
    const double r_a = 0.5 * skin_limiting_aperture(c);
    SafetyResult r;
    r.method = Method::SkinGaussian;
    r.z_haz = shield.shield_distance;
    r.mpe = skin_mpe(c, beam_area);
    if (w < r_a) {
        // Beam smaller than the aperture: irradiance taken over the beam area itself.
        r.eta_or_fraction = 1.0;
        r.notes.push_back("small beam: W < r_a, reference area pi W^2");
        return detail::finish(std::move(r), beam_area);
    }
    r.eta_or_fraction = -std::expm1(-2.0 * r_a * r_a / (w * w));
    return detail::finish(std::move(r), units::pi * r_a * r_a);
}

// Skin limit of a mode mixture: peak-centred power through the skin aperture at the shield plane.
inline SafetyResult ptmax_skin_multimode(const ModeCombination& combo, const BeamParams& beam,
                                         const ShieldContext& shield, const ExposureContext& ctx,
                                         const QuadratureSpec& spec = {}) {
    shield.validate();
    const ExposureContext c = detail::with_wavelength(ctx, beam.wavelength);
    const double z = shield.shield_distance;
    const double spot = combination_spot_radius(combo, beam, z);
    const double r_a = 0.5 * skin_limiting_aperture(c);
    SafetyResult r;
    r.method = Method::SkinMultimode;
    r.z_haz = z;
    r.mpe = skin_mpe(c, units::pi * spot * spot);
    const Point peak = peak_irradiance_location(combo, beam, z).point;
    r.eta_or_fraction = power_through_disk(combo, beam, 1.0, peak, r_a, z, spec);
    return detail::finish(std::move(r), units::pi * r_a * r_a);
}

} // namespace beamsafe
