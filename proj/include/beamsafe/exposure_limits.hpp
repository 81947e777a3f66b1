#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "beamsafe/errors.hpp"
#include "beamsafe/units.hpp"

namespace beamsafe {

inline constexpr double kDefaultPupilRadius = 3.5e-3;
inline constexpr double kMinExposureDuration = 1e-3;
inline constexpr double kMaxExposureDuration = 3e4;
inline constexpr double kAlphaMin = 1.5e-3;

struct ExposureContext {
    double exposure_duration = 100.0;
    double pupil_radius = kDefaultPupilRadius;
    double wavelength = 850e-9;

    static ExposureContext make(double wavelength, double exposure_duration,
                                double pupil_radius = kDefaultPupilRadius) {
        detail::require(std::isfinite(wavelength) && wavelength > 0.0, "wavelength must be > 0");
        detail::require(std::isfinite(exposure_duration) && exposure_duration > 0.0,
                        "exposure duration must be > 0");
        detail::require(std::isfinite(pupil_radius) && pupil_radius > 0.0, "pupil radius must be > 0");
        return {exposure_duration, pupil_radius, wavelength};
    }
};

enum class SourceClass { Point, Intermediate, Large };

inline const char* to_string(SourceClass c) {
    switch (c) {
    case SourceClass::Point: return "point";
    case SourceClass::Intermediate: return "intermediate";
    case SourceClass::Large: return "large";
    }
    return "?";
}

// 200 sqrt(t) mrad below 0.25 s, 100 mrad otherwise.
inline double alpha_max(double exposure_duration) {
    return exposure_duration < 0.25 ? 0.2 * std::sqrt(exposure_duration) : 0.1;
}

struct SourceExtent {
    double alpha = 0.0;
    SourceClass source_class = SourceClass::Point;
};

inline SourceExtent classify(double alpha, double exposure_duration) {
    detail::require(alpha >= 0.0, "subtense angle must be >= 0");
    if (alpha <= kAlphaMin) return {alpha, SourceClass::Point};
    if (alpha >= alpha_max(exposure_duration)) return {alpha, SourceClass::Large};
    return {alpha, SourceClass::Intermediate};
}

// Full angle subtended by a source of diameter D at distance z.
inline double subtense_angle(double source_diameter, double distance) {
    detail::require(distance > 0.0, "viewing distance must be > 0");
    detail::require(source_diameter >= 0.0, "source diameter must be >= 0");
    return 2.0 * std::atan(source_diameter / (2.0 * distance));
}

inline double coefficient_c4(double wavelength) {
    const double nm = wavelength / units::nm;
    if (nm >= 700.0 && nm < 1050.0) return std::pow(10.0, 0.002 * (nm - 700.0));
    return 5.0;
}

inline double coefficient_c7(double wavelength) {
    const double nm = wavelength / units::nm;
    if (nm < 1150.0) return 1.0;
    if (nm < 1200.0) return std::pow(10.0, 0.018 * (nm - 1150.0));
    return 8.0;
}

// alpha / alpha_min clamped to [1, alpha_max / alpha_min].
inline double coefficient_c6(double alpha, double exposure_duration) {
    const double a = std::clamp(alpha, kAlphaMin, alpha_max(exposure_duration));
    return a / kAlphaMin;
}

// T2 = 10 * 10^((alpha - alpha_min)/98.5) seconds with alpha in mrad, clamped to [10, 100] s.
inline double coefficient_t2(double alpha, double exposure_duration) {
    const double a = std::clamp(alpha, kAlphaMin, alpha_max(exposure_duration));
    const double t2 = 10.0 * std::pow(10.0, (a - kAlphaMin) / units::mrad / 98.5);
    return std::clamp(t2, 10.0, 100.0);
}

struct MpeResult {
    double mpe = 0.0;  // W/m^2
    double c4 = 1.0;
    double c6 = 1.0;
    double c7 = 1.0;
    double t2 = 10.0;
    SourceClass source_class = SourceClass::Point;
    std::string branch_id;
};

namespace detail {

inline std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

inline void check_duration(double t) {
    if (!(t >= kMinExposureDuration)) {
        throw UnsupportedDomainError("t_ex >= 1e-3 s", "exposure duration " + format_number(t) +
                                                           " s is below the tabulated minimum of 1e-3 s");
    }
    if (!(t <= kMaxExposureDuration)) {
        throw UnsupportedDomainError("t_ex <= 3e4 s", "exposure duration " + format_number(t) +
                                                          " s is above the tabulated maximum of 3e4 s");
    }
}

} // namespace detail

// Retinal MPE for 700 nm <= lambda < 1400 nm. Durations split at 10 s; 10 s itself is long.
inline MpeResult eye_mpe(const ExposureContext& ctx, double alpha) {
    const double nm = ctx.wavelength / units::nm;
    if (!(nm >= 700.0)) {
        throw UnsupportedDomainError("wavelength >= 700 nm",
                                     "eye MPE not tabulated below 700 nm (got " + detail::format_number(nm) + " nm)");
    }
    if (!(nm < 1400.0)) {
        throw UnsupportedDomainError("wavelength < 1400 nm", "eye MPE not tabulated at or above 1400 nm (got " +
                                                                 detail::format_number(nm) + " nm)");
    }
    const double t = ctx.exposure_duration;
    detail::check_duration(t);

    MpeResult r;
    r.c4 = coefficient_c4(ctx.wavelength);
    r.c7 = coefficient_c7(ctx.wavelength);
    r.c6 = coefficient_c6(alpha, t);
    r.t2 = coefficient_t2(alpha, t);
    r.source_class = classify(alpha, t).source_class;

    const bool near_ir = nm < 1050.0;
    const bool is_short = t < 10.0;
    const std::string band = near_ir ? "700-1050" : "1050-1400";

    if (r.source_class == SourceClass::Point) {
        if (near_ir) {
            r.mpe = is_short ? 18.0 * std::pow(t, -0.25) * r.c4 : 10.0 * r.c4 * r.c7;
        } else {
            r.mpe = is_short ? 90.0 * std::pow(t, -0.25) : 10.0 * r.c4 * r.c7;
        }
        r.branch_id = "eye.point." + band + (is_short ? ".short" : ".long");
        return r;
    }
    const bool within_t2 = t <= r.t2;
    const double base = near_ir ? 18.0 * r.c4 * r.c6 : 90.0 * r.c6 * r.c7;
    r.mpe = base * std::pow(within_t2 ? t : r.t2, -0.25);
    r.branch_id = "eye.extended." + band + (within_t2 ? ".t_le_t2" : ".t_gt_t2");
    return r;
}

// Skin MPE for 1400 nm <= lambda < 1e5 nm as a function of exposed skin area [m^2].
inline MpeResult skin_mpe(const ExposureContext& ctx, double exposed_area) {
    const double nm = ctx.wavelength / units::nm;
    if (!(nm >= 1400.0)) {
        throw UnsupportedDomainError("wavelength >= 1400 nm", "skin MPE not tabulated below 1400 nm (got " +
                                                                  detail::format_number(nm) + " nm)");
    }
    if (!(nm < 1e5)) {
        throw UnsupportedDomainError("wavelength < 1e5 nm", "skin MPE not tabulated at or above 1e5 nm (got " +
                                                                detail::format_number(nm) + " nm)");
    }
    detail::require(exposed_area > 0.0, "exposed skin area must be > 0");
    const double t = ctx.exposure_duration;
    detail::check_duration(t);

    const bool low_band = nm < 1500.0;
    const int area_row = exposed_area <= 0.01 ? 0 : (exposed_area <= 0.1 ? 1 : 2);
    const char* duration = t < 0.35 ? "short" : (t < 10.0 ? "mid" : "long");
    static const char* area_names[] = {"small", "medium", "large"};

    MpeResult r;
    if (t >= 10.0) {
        const double values[] = {1000.0, 10.0 / exposed_area, 100.0};
        r.mpe = values[area_row];
    } else if (low_band) {
        const double k = std::pow(t, -0.75);
        const double values[] = {5600.0 * k, 56.0 * k / exposed_area, 560.0 * k};
        r.mpe = values[area_row];
    } else {
        const double values[] = {1e4 / t, 100.0 / (t * exposed_area), 1e3 / t};
        r.mpe = values[area_row];
    }
    r.branch_id = std::string("skin.") + (low_band ? "1400-1500" : "1500-1e5") + "." + duration + "." +
                  area_names[area_row];
    return r;
}

// Limiting aperture diameter for skin: 3.5 mm at every tabulated duration.
inline double skin_limiting_aperture(const ExposureContext& ctx) {
    detail::check_duration(ctx.exposure_duration);
    return 3.5 * units::mm;
}

// Eye limiting aperture diameter row of the skin table: 1 mm, 1.5 t^(3/8) mm, 3.5 mm.
inline double eye_limiting_aperture(const ExposureContext& ctx) {
    const double t = ctx.exposure_duration;
    detail::check_duration(t);
    if (t < 0.35) return 1.0 * units::mm;
    if (t < 10.0) return 1.5 * std::pow(t, 0.375) * units::mm;
    return 3.5 * units::mm;
}

} // namespace beamsafe
