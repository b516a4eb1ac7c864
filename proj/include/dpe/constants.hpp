#pragma once

namespace dpe {

inline constexpr double kSpeedOfLight = 299792458.0;       // m/s
inline constexpr double kCaChipRate = 1.023e6;             // chips/s
inline constexpr int kCaCodeLength = 1023;                 // chips per period
inline constexpr double kCaCodePeriod = 1e-3;              // s
inline constexpr double kEarthRotationRate = 7.2921151467e-5;  // rad/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// chips per meter of range
inline constexpr double kChipsPerMeter = kCaChipRate / kSpeedOfLight;

namespace wgs84 {
inline constexpr double kSemiMajorAxis = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kSemiMinorAxis = kSemiMajorAxis * (1.0 - kFlattening);
inline constexpr double kEccentricitySq = kFlattening * (2.0 - kFlattening);
}  // namespace wgs84

}  // namespace dpe
