#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "beamsafe/errors.hpp"
#include "beamsafe/gaussian_beam.hpp"
#include "beamsafe/units.hpp"

namespace beamsafe {

// Ray-transfer matrix [[a, b], [c, d]].
struct AbcdMatrix {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 1.0;

    double determinant() const { return a * d - b * c; }

    // this * rhs: rhs acts first.
    AbcdMatrix operator*(const AbcdMatrix& rhs) const {
        return {a * rhs.a + b * rhs.c, a * rhs.b + b * rhs.d, c * rhs.a + d * rhs.c, c * rhs.b + d * rhs.d};
    }
};

inline AbcdMatrix free_space_matrix(double length) { return {1.0, length, 0.0, 1.0}; }

inline AbcdMatrix thin_lens_matrix(double focal_length) {
    detail::require(focal_length != 0.0 && std::isfinite(focal_length), "focal length must be finite and nonzero");
    return {1.0, 0.0, -1.0 / focal_length, 1.0};
}

// Radii are positive when the centre of curvature lies on the source side of the surface,
// so a biconvex lens has front_radius < 0 < back_radius.
struct ThickLensSpec {
    double refractive_index = 1.5;
    double thickness = 0.0;
    double front_radius = 0.0;
    double back_radius = 0.0;
};

inline AbcdMatrix thick_lens_abcd(const ThickLensSpec& spec) {
    const double n = spec.refractive_index;
    const double rho = spec.thickness;
    const double v1 = spec.front_radius;
    const double v2 = spec.back_radius;
    detail::require(n >= 1.0, "refractive index must be >= 1");
    detail::require(rho >= 0.0, "lens thickness must be >= 0");
    detail::require(v1 != 0.0 && v2 != 0.0, "surface radii must be nonzero");
    AbcdMatrix m;
    m.a = 1.0 + rho * (n - 1.0) / (n * v1);
    m.b = rho / n;
    m.c = (n - 1.0) * (1.0 / v1 - 1.0 / v2) - rho * (n - 1.0) * (n - 1.0) / (n * v1 * v2);
    m.d = 1.0 - rho * (n - 1.0) / (n * v2);
    return m;
}

// q2 = (A q + B) / (C q + D).
inline ComplexBeamParameter transform_q(const AbcdMatrix& m, const ComplexBeamParameter& q_in) {
    const std::complex<double> q = q_in.value();
    const std::complex<double> den = m.c * q + m.d;
    const double scale = std::abs(m.c * q) + std::abs(m.d);
    if (std::abs(den) <= 16.0 * std::numeric_limits<double>::epsilon() * scale) {
        throw FocalSingularityError("Cq + D vanishes in the q transform");
    }
    const std::complex<double> out = (m.a * q + m.b) / den;
    if (!(out.imag() > 0.0)) throw FocalSingularityError("transformed q lost its positive imaginary part");
    return ComplexBeamParameter::from_complex(out);
}

struct ThinLensSpec {
    double focal_length = 0.0;
    double object_distance = 0.0;  // waist to lens

    void validate() const {
        detail::require(focal_length != 0.0 && std::isfinite(focal_length), "focal length must be finite and nonzero");
        detail::require(std::isfinite(object_distance), "object distance must be finite");
    }
};

struct ThinLensImage {
    double d2 = 0.0;      // lens to output waist; negative for a virtual image
    double w2 = 0.0;
    double theta2 = 0.0;  // paraxial divergence of the output beam
    double kappa = 1.0;   // w2 / w0
};

inline ThinLensImage thin_lens_image(const BeamParams& beam, const ThinLensSpec& lens) {
    lens.validate();
    const double f = lens.focal_length;
    const double d1 = lens.object_distance;
    const double inv_z0 = beam.wavelength / (units::pi * beam.waist_radius * beam.waist_radius);
    const double g = 1.0 - d1 / f;
    ThinLensImage img;
    img.d2 = (1.0 / f - g * d1 * inv_z0 * inv_z0) / (1.0 / (f * f) + g * g * inv_z0 * inv_z0);
    const double lf = beam.wavelength * f / (units::pi * beam.waist_radius * beam.waist_radius);
    img.w2 = std::abs(beam.wavelength * f / (units::pi * beam.waist_radius * std::sqrt(1.0 + g * g * lf * lf)));
    img.kappa = img.w2 / beam.waist_radius;
    img.theta2 = paraxial_divergence(beam) / img.kappa;
    return img;
}

// Generalized Lambertian emitter of order m: fraction inside a cone of half-angle psi_c.
inline double lambertian_received_power(double power_t, double order, double psi_c) {
    detail::require(order > 0.0, "Lambertian order must be > 0");
    detail::require(psi_c >= 0.0 && psi_c <= 0.5 * units::pi + 1e-15, "cone half-angle must lie in [0, pi/2]");
    return power_t * (1.0 - std::pow(std::cos(psi_c), order + 1.0));
}

// Ideal uniform diffuser of full angle theta_d. Clamped at power_t outside the cone.
inline double uniform_received_power(double power_t, double theta_d, double psi_c) {
    detail::require(theta_d > 0.0 && theta_d < units::pi, "diffuser angle must lie in (0, pi)");
    detail::require(psi_c >= 0.0, "cone half-angle must be >= 0");
    const double fraction = (1.0 - std::cos(psi_c)) / (1.0 - std::cos(0.5 * theta_d));
    return power_t * std::min(1.0, fraction);
}

enum class DiffuserKind { Lambertian, Uniform };

struct DiffuserSpec {
    DiffuserKind kind = DiffuserKind::Lambertian;
    double lambertian_order = 1.0;
    double fwhm_angle = 0.0;
    double diameter = 0.0;
    double collimating_focal_length = 0.0;

    static DiffuserSpec lambertian(double order, double diameter, double focal_length) {
        DiffuserSpec s{DiffuserKind::Lambertian, order, 0.0, diameter, focal_length};
        s.validate();
        return s;
    }

    static DiffuserSpec uniform(double fwhm_angle, double diameter, double focal_length) {
        DiffuserSpec s{DiffuserKind::Uniform, 1.0, fwhm_angle, diameter, focal_length};
        s.validate();
        return s;
    }

    void validate() const {
        detail::require(diameter > 0.0, "diffuser diameter must be > 0");
        detail::require(collimating_focal_length > 0.0, "collimating focal length must be > 0");
        if (kind == DiffuserKind::Lambertian) {
            detail::require(lambertian_order >= 1.0, "Lambertian order must be >= 1");
        } else {
            detail::require(fwhm_angle > 0.0 && fwhm_angle < units::pi, "diffuser FWHM angle must lie in (0, pi)");
        }
    }
};

// Focal length that makes the collimated spot fill the diffuser: D / (2 tan(theta)).
inline double diffuser_focal_length(double diameter, double divergence) {
    detail::require(diameter > 0.0, "diffuser diameter must be > 0");
    detail::require(divergence > 0.0 && divergence < 0.5 * units::pi, "divergence must lie in (0, pi/2)");
    return diameter / (2.0 * std::tan(divergence));
}

} // namespace beamsafe
