#pragma once

// SI is used everywhere inside the library. These factors are only for I/O.
namespace rmm::units {

inline constexpr double GPa = 1.0e9;
inline constexpr double MPa = 1.0e6;
inline constexpr double Pa = 1.0;
inline constexpr double mm = 1.0e-3;
inline constexpr double m = 1.0;
inline constexpr double N = 1.0;
inline constexpr double kg_per_m3 = 1.0;

}  // namespace rmm::units
