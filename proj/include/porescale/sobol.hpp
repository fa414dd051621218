#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace porescale {

/// First n points of the 2D Sobol low-discrepancy sequence, index-1 start
/// (the all-zero point at index 0 is skipped, so the sequence opens with
/// (0.5, 0.5)). Direction numbers are the standard ones: van der Corput in
/// the first dimension, primitive polynomial x+1 with m1 = 1 in the second.
std::vector<std::pair<double, double>> sobol2d(std::size_t n);

} // namespace porescale
