#pragma once

#include <numbers>

// Everything inside the library is SI (m, s, W, rad). Conversions happen at the CLI boundary.
namespace beamsafe::units {

inline constexpr double pi = std::numbers::pi;

inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double mm = 1e-3;
inline constexpr double cm = 1e-2;
inline constexpr double mrad = 1e-3;
inline constexpr double mW = 1e-3;

constexpr double deg_to_rad(double deg) { return deg * pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / pi; }

} // namespace beamsafe::units
