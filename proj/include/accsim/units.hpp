#pragma once

namespace accsim {

inline constexpr double kKmhPerMps = 3.6;

constexpr double kmh_to_mps(double kmh) { return kmh / kKmhPerMps; }
constexpr double mps_to_kmh(double mps) { return mps * kKmhPerMps; }

}  // namespace accsim
