#pragma once

#include <cmath>

#include "oacollab/error.hpp"

namespace oacollab::metrics {

/// Shannon index of difficulty log2(D/W + 1), in bits.
inline double index_of_difficulty(double distance, double width) {
  if (!(width > 0.0)) throw Error(ErrorCode::NonPositiveWidth, "target width must be > 0");
  if (!(distance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "target distance must be >= 0");
  return std::log2((distance + width) / width);  // not D/W + 1: 0.15/0.05 rounds below 3
}

/// Index of performance ID / MT, in bits/s.
inline double index_of_performance(double id_bits, double movement_time) {
  if (!(movement_time > 0.0)) throw Error(ErrorCode::NonPositiveMT, "movement time must be > 0");
  return id_bits / movement_time;
}

}  // namespace oacollab::metrics
