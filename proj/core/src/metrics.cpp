#include "misalign/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "misalign/errors.hpp"
#include "misalign/rng.hpp"

namespace misalign::eval {

double iqm(std::vector<double> values) {
    if (values.empty()) throw ContractError("iqm: empty value list");
    std::sort(values.begin(), values.end());
    const std::size_t cut = values.size() / 4;
    double sum = 0.0;
    for (std::size_t i = cut; i < values.size() - cut; ++i) sum += values[i];
    return sum / static_cast<double>(values.size() - 2 * cut);
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::pair<double, double> bootstrap_ci(const std::vector<double>& values, double level,
                                       int resamples, std::uint64_t seed) {
    if (values.empty()) throw ContractError("bootstrap_ci: empty value list");
    if (resamples < 1) throw ContractError("bootstrap_ci: resamples must be >= 1");
    num::SplitMix64 rng(seed);
    std::vector<double> stats(resamples);
    std::vector<double> sample(values.size());
    for (int b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < values.size(); ++i)
            sample[i] = values[rng.below(values.size())];
        stats[b] = iqm(sample);
    }
    std::sort(stats.begin(), stats.end());
    const double tail = (1.0 - level) / 2.0;
    return {quantile_sorted(stats, tail), quantile_sorted(stats, 1.0 - tail)};
}

}  // namespace misalign::eval
