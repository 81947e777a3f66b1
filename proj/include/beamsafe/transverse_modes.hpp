#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "beamsafe/errors.hpp"
#include "beamsafe/gaussian_beam.hpp"
#include "beamsafe/numerics.hpp"
#include "beamsafe/units.hpp"

namespace beamsafe {

enum class ModeFamily { HermiteGaussian, LaguerreGaussian };

inline const char* to_string(ModeFamily family) {
    return family == ModeFamily::HermiteGaussian ? "HG" : "LG";
}

// Upper bound on l and m. Beyond this the factorial normalizations lose too much precision.
inline constexpr int kMaxModeIndex = 30;

// HG: l, m count nodes along x and y. LG: l is azimuthal, m is radial.
struct ModeIndex {
    ModeFamily family = ModeFamily::LaguerreGaussian;
    int l = 0;
    int m = 0;

    int principal_mode_number() const {
        return family == ModeFamily::HermiteGaussian ? l + m + 1 : l + 2 * m + 1;
    }

    void validate() const {
        detail::require(l >= 0 && m >= 0, "mode indices must be >= 0");
        detail::require(l <= kMaxModeIndex && m <= kMaxModeIndex,
                        "mode index above cap of " + std::to_string(kMaxModeIndex));
    }
};

// Physicists' Hermite polynomial by the three-term recurrence.
inline double hermite_polynomial(int l, double u) {
    detail::require(l >= 0 && l <= kMaxModeIndex, "Hermite order out of range [0, 30]");
    double previous = 1.0;
    if (l == 0) return previous;
    double current = 2.0 * u;
    for (int n = 1; n < l; ++n) {
        const double next = 2.0 * u * current - 2.0 * n * previous;
        previous = current;
        current = next;
    }
    return current;
}

// Generalized Laguerre polynomial L_m^l(x), recurrence in m.
inline double laguerre_polynomial(int l, int m, double x) {
    detail::require(l >= 0 && l <= kMaxModeIndex && m >= 0 && m <= kMaxModeIndex,
                    "Laguerre indices out of range [0, 30]");
    const double alpha = l;
    double previous = 1.0;
    if (m == 0) return previous;
    double current = 1.0 + alpha - x;
    for (int k = 1; k < m; ++k) {
        const double next = ((2.0 * k + 1.0 + alpha - x) * current - (k + alpha) * previous) / (k + 1.0);
        previous = current;
        current = next;
    }
    return current;
}

namespace detail {

inline double factorial(int n) {
    double result = 1.0;
    for (int i = 2; i <= n; ++i) result *= i;
    return result;
}

// (H_l(u), H_{l-1}(u)); H_{-1} is taken as 0.
inline std::pair<double, double> hermite_with_previous(int l, double u) {
    if (l == 0) return {1.0, 0.0};
    double previous = 1.0;
    double current = 2.0 * u;
    for (int n = 1; n < l; ++n) {
        const double next = 2.0 * u * current - 2.0 * n * previous;
        previous = current;
        current = next;
    }
    return {current, previous};
}

} // namespace detail

// A^2 of the unit-power mode (the factor in front of the transverse profile).
inline double mode_normalization_squared(const ModeIndex& mode) {
    mode.validate();
    if (mode.family == ModeFamily::HermiteGaussian) {
        return std::pow(2.0, 1 - mode.l - mode.m) /
               (units::pi * detail::factorial(mode.l) * detail::factorial(mode.m));
    }
    return 2.0 * detail::factorial(mode.m) / (units::pi * detail::factorial(mode.m + mode.l));
}

struct ModeEntry {
    ModeIndex mode;
    double coefficient = 0.0;
};

// Incoherent superposition of modes of one family. Coefficients are power fractions summing to 1.
class ModeCombination {
public:
    static constexpr double kCoefficientSumTolerance = 1e-9;

    static ModeCombination make(std::vector<ModeEntry> entries) {
        detail::require(!entries.empty(), "mode combination must have at least one entry");
        const ModeFamily family = entries.front().mode.family;
        double sum = 0.0;
        for (const auto& entry : entries) {
            entry.mode.validate();
            detail::require(entry.mode.family == family, "all modes of a combination must share one family");
            detail::require(std::isfinite(entry.coefficient) && entry.coefficient >= 0.0,
                            "mode coefficients must be >= 0");
            sum += entry.coefficient;
        }
        if (std::abs(sum - 1.0) > kCoefficientSumTolerance) {
            throw ParameterError("mode coefficients must sum to 1 (got " + std::to_string(sum) + ")");
        }
        return ModeCombination(family, std::move(entries));
    }

    static ModeCombination single(ModeIndex mode) { return make({{mode, 1.0}}); }

    ModeFamily family() const { return family_; }
    const std::vector<ModeEntry>& entries() const { return entries_; }

private:
    ModeCombination(ModeFamily family, std::vector<ModeEntry> entries)
        : family_(family), entries_(std::move(entries)) {}

    ModeFamily family_;
    std::vector<ModeEntry> entries_;
};

// |U_lm|^2 of an LG mode as a function of radius; integrates to 1 over the plane.
inline double lg_mode_irradiance(const ModeIndex& mode, double w, double r) {
    const double s = 2.0 * r * r / (w * w);
    const double lag = laguerre_polynomial(mode.l, mode.m, s);
    const double radial = mode.l == 0 ? 1.0 : std::pow(s, mode.l);
    return mode_normalization_squared(mode) / (w * w) * radial * lag * lag * std::exp(-s);
}

inline double hg_mode_irradiance(const ModeIndex& mode, double w, Point p) {
    const double u = std::sqrt(2.0) * p.x / w;
    const double v = std::sqrt(2.0) * p.y / w;
    const double hu = hermite_polynomial(mode.l, u);
    const double hv = hermite_polynomial(mode.m, v);
    return mode_normalization_squared(mode) / (w * w) * hu * hu * hv * hv * std::exp(-u * u - v * v);
}

// Unit-power irradiance density [1/m^2] of one mode at transverse point p, plane z.
inline double mode_irradiance(const ModeIndex& mode, const BeamParams& beam, Point p, double z) {
    const double w = spot_radius(beam, z);
    if (mode.family == ModeFamily::HermiteGaussian) return hg_mode_irradiance(mode, w, p);
    return lg_mode_irradiance(mode, w, std::hypot(p.x, p.y));
}

inline double combination_irradiance(const ModeCombination& combo, const BeamParams& beam, Point p, double z) {
    const double w = spot_radius(beam, z);
    double total = 0.0;
    if (combo.family() == ModeFamily::HermiteGaussian) {
        for (const auto& e : combo.entries()) total += e.coefficient * hg_mode_irradiance(e.mode, w, p);
    } else {
        const double r = std::hypot(p.x, p.y);
        for (const auto& e : combo.entries()) total += e.coefficient * lg_mode_irradiance(e.mode, w, r);
    }
    return total;
}

namespace detail {

inline double lg_combination_radial(const ModeCombination& combo, double w, double r) {
    double total = 0.0;
    for (const auto& e : combo.entries()) total += e.coefficient * lg_mode_irradiance(e.mode, w, r);
    return total;
}

// dI/dr of an LG combination, using L_m^l'(s) = -L_{m-1}^{l+1}(s).
inline double lg_combination_radial_derivative(const ModeCombination& combo, double w, double r) {
    const double s = 2.0 * r * r / (w * w);
    const double ds_dr = 4.0 * r / (w * w);
    double total = 0.0;
    for (const auto& e : combo.entries()) {
        const int l = e.mode.l;
        const int m = e.mode.m;
        const double lag = laguerre_polynomial(l, m, s);
        const double lag_prime = m == 0 ? 0.0 : -laguerre_polynomial(l + 1, m - 1, s);
        const double s_l = l == 0 ? 1.0 : std::pow(s, l);
        const double s_lm1 = l == 0 ? 0.0 : (l == 1 ? 1.0 : std::pow(s, l - 1));
        const double d_ds = l * s_lm1 * lag * lag + 2.0 * s_l * lag * lag_prime - s_l * lag * lag;
        total += e.coefficient * mode_normalization_squared(e.mode) / (w * w) * std::exp(-s) * d_ds;
    }
    return total * ds_dr;
}

} // namespace detail

// Analytic transverse gradient of the combination irradiance.
inline Point combination_irradiance_gradient(const ModeCombination& combo, const BeamParams& beam, Point p,
                                             double z) {
    const double w = spot_radius(beam, z);
    if (combo.family() == ModeFamily::LaguerreGaussian) {
        const double r = std::hypot(p.x, p.y);
        if (r == 0.0) return {0.0, 0.0};
        const double d_dr = detail::lg_combination_radial_derivative(combo, w, r);
        return {d_dr * p.x / r, d_dr * p.y / r};
    }
    const double u = std::sqrt(2.0) * p.x / w;
    const double v = std::sqrt(2.0) * p.y / w;
    const double du_dx = std::sqrt(2.0) / w;
    Point grad;
    for (const auto& e : combo.entries()) {
        const auto [hl, hl_prev] = detail::hermite_with_previous(e.mode.l, u);
        const auto [hm, hm_prev] = detail::hermite_with_previous(e.mode.m, v);
        const double gu = hl * hl * std::exp(-u * u);
        const double gv = hm * hm * std::exp(-v * v);
        // d/du [H_l^2 e^{-u^2}] = 2 H_l e^{-u^2} (2 l H_{l-1} - u H_l)
        const double dgu = 2.0 * hl * std::exp(-u * u) * (2.0 * e.mode.l * hl_prev - u * hl);
        const double dgv = 2.0 * hm * std::exp(-v * v) * (2.0 * e.mode.m * hm_prev - v * hm);
        const double scale = e.coefficient * mode_normalization_squared(e.mode) / (w * w);
        grad.x += scale * dgu * gv * du_dx;
        grad.y += scale * gu * dgv * du_dx;
    }
    return grad;
}

namespace detail {

// Outermost radius where profile(r) drops to threshold, scanning [0, r_max] then bisecting.
template <class P>
double outer_threshold_radius(const P& profile, double threshold, double r_max, int samples, double tol) {
    for (int attempt = 0; attempt < 8; ++attempt) {
        int last_above = -1;
        for (int k = 0; k < samples; ++k) {
            const double r = r_max * k / (samples - 1);
            if (profile(r) >= threshold) last_above = k;
        }
        if (last_above < 0) return 0.0;
        if (last_above < samples - 1) {
            const double lo = r_max * last_above / (samples - 1);
            const double hi = r_max * (last_above + 1) / (samples - 1);
            return find_root_bracketed([&](double r) { return profile(r) - threshold; }, lo, hi, tol);
        }
        r_max *= 2.0;
    }
    throw NumericsError("1/e^2 radius search did not terminate", r_max, 0.0);
}

inline double scan_extent(int principal_mode_number, double w) {
    return w * (4.0 + 2.0 * std::sqrt(static_cast<double>(principal_mode_number)));
}

inline int max_principal_mode_number(const ModeCombination& combo) {
    int pmn = 1;
    for (const auto& e : combo.entries()) pmn = std::max(pmn, e.mode.principal_mode_number());
    return pmn;
}

inline constexpr int kProfileSamples = 4001;
inline constexpr int kHermiteRays = 33;

} // namespace detail

struct PeakLocation {
    Point point;
    double irradiance = 0.0;            // unit-power irradiance density at point
    double stationarity_residual = 0.0; // |grad I| at point
    double max_gradient = 0.0;          // max |grad I| over the scan window
};

inline PeakLocation peak_irradiance_location(const ModeCombination& combo, const BeamParams& beam, double z);

// 1/e^2-of-peak radius measured outward from the outermost maximum.
inline double combination_spot_radius(const ModeCombination& combo, const BeamParams& beam, double z) {
    const double w = spot_radius(beam, z);
    const double r_max = detail::scan_extent(detail::max_principal_mode_number(combo), w);
    const double tol = 1e-12 * w;
    if (combo.family() == ModeFamily::LaguerreGaussian) {
        auto profile = [&](double r) { return detail::lg_combination_radial(combo, w, r); };
        double peak = 0.0;
        for (int k = 0; k < detail::kProfileSamples; ++k) {
            peak = std::max(peak, profile(r_max * k / (detail::kProfileSamples - 1)));
        }
        // Polish the sampled peak with the exact ring maximum.
        peak = std::max(peak, peak_irradiance_location(combo, beam, z).irradiance);
        return detail::outer_threshold_radius(profile, peak * std::exp(-2.0), r_max, detail::kProfileSamples, tol);
    }
    const double peak = peak_irradiance_location(combo, beam, z).irradiance;
    const double threshold = peak * std::exp(-2.0);
    double radius = 0.0;
    // HG profiles are symmetric under x -> -x and y -> -y: rays over the first quadrant suffice.
    for (int j = 0; j < detail::kHermiteRays; ++j) {
        const double phi = 0.5 * units::pi * j / (detail::kHermiteRays - 1);
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        auto profile = [&](double r) { return combination_irradiance(combo, beam, {r * c, r * s}, z); };
        radius = std::max(radius,
                          detail::outer_threshold_radius(profile, threshold, r_max, detail::kProfileSamples, tol));
    }
    return radius;
}

inline double mode_spot_radius(const ModeIndex& mode, const BeamParams& beam, double z) {
    return combination_spot_radius(ModeCombination::single(mode), beam, z);
}

namespace detail {

inline PeakLocation lg_peak(const ModeCombination& combo, const BeamParams& beam, double z, double window) {
    const double w = spot_radius(beam, z);
    const int n = kProfileSamples;
    int best = 0;
    double best_value = -1.0;
    double max_gradient = 0.0;
    for (int k = 0; k < n; ++k) {
        const double r = window * k / (n - 1);
        const double value = lg_combination_radial(combo, w, r);
        if (value > best_value) {
            best_value = value;
            best = k;
        }
        max_gradient = std::max(max_gradient, std::abs(lg_combination_radial_derivative(combo, w, r)));
    }
    auto derivative = [&](double r) { return lg_combination_radial_derivative(combo, w, r); };
    double r_star = window * best / (n - 1);
    if (best > 0) {
        const double lo = window * (best - 1) / (n - 1);
        const double hi = window * std::min(best + 1, n - 1) / (n - 1);
        if (derivative(lo) > 0.0 && derivative(hi) < 0.0) {
            r_star = find_root_bracketed(derivative, lo, hi, 1e-13 * w);
        } else {
            r_star = golden_section_maximize([&](double r) { return lg_combination_radial(combo, w, r); }, lo, hi,
                                             1e-10 * w);
        }
    } else {
        // On-axis candidate; check whether the profile rises just off axis.
        const double hi = window / (n - 1);
        if (derivative(hi) > 0.0) {
            r_star = golden_section_maximize([&](double r) { return lg_combination_radial(combo, w, r); }, 0.0,
                                             2.0 * hi, 1e-10 * w);
        }
    }
    PeakLocation peak;
    peak.point = {r_star, 0.0};
    peak.irradiance = lg_combination_radial(combo, w, r_star);
    peak.stationarity_residual = std::abs(derivative(r_star));
    peak.max_gradient = max_gradient;
    return peak;
}

inline double norm(Point p) { return std::hypot(p.x, p.y); }

inline PeakLocation hg_peak(const ModeCombination& combo, const BeamParams& beam, double z, double window) {
    const double w = spot_radius(beam, z);
    constexpr int n = 201;
    const double cell = 2.0 * window / (n - 1);
    auto irradiance = [&](Point p) { return combination_irradiance(combo, beam, p, z); };
    Point best{};
    double best_value = -1.0;
    double max_gradient = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = -window + i * cell;
        for (int j = 0; j < n; ++j) {
            const Point p{x, -window + j * cell};
            const double value = irradiance(p);
            if (value > best_value) {
                best_value = value;
                best = p;
            }
            max_gradient = std::max(max_gradient, norm(combination_irradiance_gradient(combo, beam, p, z)));
        }
    }
    // Coordinate refinement down to 1e-4 W.
    Point p = best;
    double h = cell;
    while (h > 1e-4 * w) {
        p.x = golden_section_maximize([&](double x) { return irradiance({x, p.y}); }, p.x - h, p.x + h, 1e-3 * h);
        p.y = golden_section_maximize([&](double y) { return irradiance({p.x, y}); }, p.y - h, p.y + h, 1e-3 * h);
        h *= 0.25;
    }
    // Newton polish on the stationarity equations, accepted only if it stays local and does not lose height.
    Point q = p;
    const double step = 1e-6 * w;
    for (int iter = 0; iter < 30; ++iter) {
        const Point g = combination_irradiance_gradient(combo, beam, q, z);
        const Point gxp = combination_irradiance_gradient(combo, beam, {q.x + step, q.y}, z);
        const Point gxm = combination_irradiance_gradient(combo, beam, {q.x - step, q.y}, z);
        const Point gyp = combination_irradiance_gradient(combo, beam, {q.x, q.y + step}, z);
        const Point gym = combination_irradiance_gradient(combo, beam, {q.x, q.y - step}, z);
        const double hxx = (gxp.x - gxm.x) / (2.0 * step);
        const double hxy = 0.5 * ((gxp.y - gxm.y) + (gyp.x - gym.x)) / (2.0 * step);
        const double hyy = (gyp.y - gym.y) / (2.0 * step);
        const double det = hxx * hyy - hxy * hxy;
        if (det == 0.0 || !std::isfinite(det)) break;
        const Point delta{(hyy * g.x - hxy * g.y) / det, (hxx * g.y - hxy * g.x) / det};
        q = {q.x - delta.x, q.y - delta.y};
        if (norm(delta) < 1e-14 * w) break;
    }
    if (std::isfinite(q.x) && std::isfinite(q.y) && distance(q, p) < cell && irradiance(q) >= irradiance(p)) p = q;

    PeakLocation peak;
    peak.point = p;
    peak.irradiance = irradiance(p);
    peak.stationarity_residual = norm(combination_irradiance_gradient(combo, beam, p, z));
    peak.max_gradient = max_gradient;
    return peak;
}

} // namespace detail

// Global maximum of the combination irradiance in plane z: scan over +-4 max-mode spot radii, then refine.
// LG peaks are rotationally degenerate and are reported on the +x axis.
inline PeakLocation peak_irradiance_location(const ModeCombination& combo, const BeamParams& beam, double z) {
    const double w = spot_radius(beam, z);
    // Mode spot radii scale like sqrt(PMN) W; the scan extent bounds them without recursing into spot search.
    const double window = detail::scan_extent(detail::max_principal_mode_number(combo), w);
    if (combo.family() == ModeFamily::LaguerreGaussian) return detail::lg_peak(combo, beam, z, window);
    return detail::hg_peak(combo, beam, z, window);
}

namespace detail {

// LG aperture power in origin-centred polar coordinates, using the chordal wedge when the aperture
// excludes the origin and the full-angle form otherwise. The wedge is parametrized by
// theta = theta0 + asin((r_p/r0) sin t), which removes the square-root endpoint behaviour.
inline double lg_disk_integral(const ModeCombination& combo, double w, Point center, double r_p,
                               const QuadratureSpec& spec) {
    const double r0 = std::hypot(center.x, center.y);
    auto radial = [&](double r) { return lg_combination_radial(combo, w, r); };
    if (r_p <= r0) {
        const double k = r_p / r0;
        auto integrand = [&](double t, double s) {
            const double sin_t = std::sin(t);
            const double cos_t = std::cos(t);
            const double root = std::sqrt(std::max(0.0, 1.0 - k * k * sin_t * sin_t));
            const double chord_mid = r0 * root;  // r0 cos(theta - theta0)
            const double half = r_p * cos_t;     // sqrt(r_p^2 - r0^2 sin^2(theta - theta0))
            const double r = chord_mid + (2.0 * s - 1.0) * half;
            const double dtheta_dt = root > 0.0 ? k * cos_t / root : 1.0;
            return radial(r) * r * 2.0 * half * dtheta_dt;
        };
        return integrate_rectangle(integrand, -0.5 * units::pi, 0.5 * units::pi, 0.0, 1.0, spec).value;
    }
    const double theta0 = std::atan2(center.y, center.x);
    auto integrand = [&](double theta, double s) {
        const double c = std::cos(theta - theta0);
        const double sn = std::sin(theta - theta0);
        const double r2 = r0 * c + std::sqrt(r_p * r_p - r0 * r0 * sn * sn);
        const double r = s * r2;
        return radial(r) * r * r2;
    };
    return integrate_rectangle(integrand, 0.0, 2.0 * units::pi, 0.0, 1.0, spec).value;
}

// HG aperture power over x in [x0 - r_p, x0 + r_p] with circle-chord y limits, x = x0 + r_p sin t.
inline double hg_disk_integral(const ModeCombination& combo, const BeamParams& beam, double z, Point center,
                               double r_p, const QuadratureSpec& spec) {
    auto integrand = [&](double t, double s) {
        const double cos_t = std::cos(t);
        const Point p{center.x + r_p * std::sin(t), center.y + s * r_p * cos_t};
        return combination_irradiance(combo, beam, p, z) * r_p * r_p * cos_t * cos_t;
    };
    return integrate_rectangle(integrand, -0.5 * units::pi, 0.5 * units::pi, -1.0, 1.0, spec).value;
}

} // namespace detail

// Power [W] of a beam carrying power_t through a disk of radius r_p centred at `center`, plane z.
inline double power_through_disk(const ModeCombination& combo, const BeamParams& beam, double power_t,
                                 Point center, double r_p, double z, const QuadratureSpec& spec = {}) {
    detail::require(r_p > 0.0, "aperture radius must be > 0");
    detail::require(power_t >= 0.0, "transmit power must be >= 0");
    const double w = spot_radius(beam, z);
    const double unit = combo.family() == ModeFamily::LaguerreGaussian
                            ? detail::lg_disk_integral(combo, w, center, r_p, spec)
                            : detail::hg_disk_integral(combo, beam, z, center, r_p, spec);
    return power_t * unit;
}

// Far-field plane used to measure the divergence of a combination, in Rayleigh ranges.
inline constexpr double kFarFieldRayleighRanges = 100.0;

// theta_R / theta: far-field 1/e^2 half-angle of the combination over the paraxial LG00 divergence.
inline double combination_divergence_ratio(const ModeCombination& combo, const BeamParams& beam) {
    const double z = kFarFieldRayleighRanges * beam.rayleigh_range();
    return combination_spot_radius(combo, beam, z) / z / paraxial_divergence(beam);
}

inline double m_squared(double real_waist, double real_divergence, double wavelength) {
    return units::pi * real_waist * real_divergence / wavelength;
}

struct EmbeddedGaussian {
    double theta_em = 0.0;
    double w0_em = 0.0;
    std::optional<double> m_squared;  // known only when the real beam waist is supplied
};

inline EmbeddedGaussian embedded_gaussian(double theta_r, double wavelength,
                                          std::optional<double> real_waist = std::nullopt) {
    detail::require(theta_r > 0.0, "real-beam divergence must be > 0");
    detail::require(wavelength > 0.0, "wavelength must be > 0");
    EmbeddedGaussian eg;
    eg.theta_em = theta_r;
    eg.w0_em = wavelength / (units::pi * theta_r);
    if (real_waist) eg.m_squared = m_squared(*real_waist, theta_r, wavelength);
    return eg;
}

} // namespace beamsafe
