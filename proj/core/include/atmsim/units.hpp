#pragma once

namespace atmsim {

inline constexpr double kMphToMps = 0.44704;
inline constexpr double kMileToMeters = 1609.344;

constexpr double mph_to_mps(double mph) { return mph * kMphToMps; }
constexpr double mps_to_mph(double mps) { return mps / kMphToMps; }
constexpr double miles_to_m(double mi) { return mi * kMileToMeters; }
constexpr double m_to_miles(double m) { return m / kMileToMeters; }

}  // namespace atmsim
