#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace misalign::eval {

// Interquartile mean: sort, drop the lowest and highest floor(len/4) values,
// average the rest. Fewer than 4 values degenerate to the plain mean.
double iqm(std::vector<double> values);

// Percentile bootstrap of the IQM statistic. Deterministic given the seed.
std::pair<double, double> bootstrap_ci(const std::vector<double>& values, double level = 0.95,
                                       int resamples = 2000, std::uint64_t seed = 0);

}  // namespace misalign::eval
