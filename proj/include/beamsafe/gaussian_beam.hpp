#pragma once

#include <cmath>
#include <complex>
#include <variant>

#include "beamsafe/errors.hpp"
#include "beamsafe/units.hpp"

namespace beamsafe {

// Ideal single-transverse-mode beam. waist_radius is the 1/e^2 intensity radius at the waist.
struct BeamParams {
    double wavelength = 0.0;
    double waist_radius = 0.0;

    static BeamParams make(double wavelength, double waist_radius) {
        detail::require(std::isfinite(wavelength) && wavelength > 0.0, "wavelength must be > 0");
        detail::require(std::isfinite(waist_radius) && waist_radius > 0.0, "waist radius must be > 0");
        return {wavelength, waist_radius};
    }

    // Beam with the given paraxial half-angle divergence, w0 = lambda / (pi * theta).
    static BeamParams from_divergence(double wavelength, double theta) {
        detail::require(theta > 0.0, "divergence must be > 0");
        return make(wavelength, wavelength / (units::pi * theta));
    }

    double rayleigh_range() const { return units::pi * waist_radius * waist_radius / wavelength; }
};

// Flat wavefront at the waist; R(0) has no finite value.
struct FlatWavefront {};

using CurvatureRadius = std::variant<FlatWavefront, double>;

inline double spot_radius(const BeamParams& beam, double z) {
    const double ratio = z / beam.rayleigh_range();
    return beam.waist_radius * std::sqrt(1.0 + ratio * ratio);
}

inline CurvatureRadius curvature_radius(const BeamParams& beam, double z) {
    if (z == 0.0) return FlatWavefront{};
    const double ratio = beam.rayleigh_range() / z;
    return z * (1.0 + ratio * ratio);
}

// Far-field half-angle, atan(lambda / (pi w0)).
inline double divergence_angle(const BeamParams& beam) {
    return std::atan(beam.wavelength / (units::pi * beam.waist_radius));
}

inline double paraxial_divergence(const BeamParams& beam) {
    return beam.wavelength / (units::pi * beam.waist_radius);
}

// q = z + j z0, measured from the waist.
class ComplexBeamParameter {
public:
    ComplexBeamParameter(double real_part, double imag_part) : q_(real_part, imag_part) {
        detail::require(imag_part > 0.0, "imaginary part of q must be > 0");
    }

    static ComplexBeamParameter at(const BeamParams& beam, double z) { return {z, beam.rayleigh_range()}; }

    static ComplexBeamParameter from_complex(std::complex<double> q) { return {q.real(), q.imag()}; }

    double real_part() const { return q_.real(); }
    double imag_part() const { return q_.imag(); }
    std::complex<double> value() const { return q_; }

    // Re(1/q) = 1/R; zero at the waist.
    double inverse_curvature() const { return (1.0 / q_).real(); }

    // -Im(1/q) = lambda / (pi W^2).
    double spot_radius(double wavelength) const {
        const double im = -(1.0 / q_).imag();
        return std::sqrt(wavelength / (units::pi * im));
    }

    // Waist radius of the beam this q belongs to.
    double waist_radius(double wavelength) const { return std::sqrt(q_.imag() * wavelength / units::pi); }

    // Signed distance from this plane forward to the waist.
    double distance_to_waist() const { return -q_.real(); }

private:
    std::complex<double> q_;
};

// I(r, z) of the ideal Gaussian beam carrying power_t.
inline double gaussian_irradiance(const BeamParams& beam, double power_t, double r, double z) {
    const double w = spot_radius(beam, z);
    return 2.0 * power_t / (units::pi * w * w) * std::exp(-2.0 * r * r / (w * w));
}

inline double power_through_centered_aperture(const BeamParams& beam, double power_t, double aperture_radius,
                                              double z) {
    detail::require(power_t >= 0.0, "transmit power must be >= 0");
    detail::require(aperture_radius >= 0.0, "aperture radius must be >= 0");
    const double w = spot_radius(beam, z);
    return power_t * -std::expm1(-2.0 * aperture_radius * aperture_radius / (w * w));
}

// Power fraction used for the 86% measure. Fixed at 0.86 (not 1 - e^-2).
inline constexpr double kEncircledFraction86 = 0.86;

// Distance at which 86% of the power passes a pupil of radius pupil_radius.
// Solves W(z) = r_p sqrt(-2 / ln(0.14)) with the full W(z); 0 if the waist already qualifies.
inline double d86_distance(const BeamParams& beam, double pupil_radius) {
    detail::require(pupil_radius > 0.0, "pupil radius must be > 0");
    const double target_w2 = -2.0 * pupil_radius * pupil_radius / std::log(1.0 - kEncircledFraction86);
    const double ratio = target_w2 / (beam.waist_radius * beam.waist_radius) - 1.0;
    return ratio <= 0.0 ? 0.0 : beam.rayleigh_range() * std::sqrt(ratio);
}

// Far-field form (pi w0 / lambda) sqrt(-2 r_p^2 / ln(1 - 0.86)), as used by the single-mode pipeline.
inline double d86_distance_far_field(const BeamParams& beam, double pupil_radius) {
    detail::require(pupil_radius > 0.0, "pupil radius must be > 0");
    return units::pi * beam.waist_radius / beam.wavelength *
           std::sqrt(-2.0 * pupil_radius * pupil_radius / std::log(1.0 - kEncircledFraction86));
}

} // namespace beamsafe
