#pragma once

#include <span>
#include <vector>

#include "misalign/errors.hpp"

namespace misalign::num {

// Central-difference gradient estimate of a scalar function, one coordinate
// at a time. Test oracle for every analytic gradient in the repo.
template <typename F>
std::vector<double> finite_diff_gradient(F&& f, std::span<const double> x, double step) {
    if (step <= 0.0) throw ContractError("finite_diff_gradient: step must be > 0");
    std::vector<double> point(x.begin(), x.end());
    std::vector<double> grad(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + step;
        const double hi = f(std::span<const double>(point));
        point[i] = saved - step;
        const double lo = f(std::span<const double>(point));
        point[i] = saved;
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

}  // namespace misalign::num
