#pragma once

#include <cstdint>
#include <vector>

#include "misalign/mlp.hpp"

namespace misalign::num {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment accumulators mirroring the network's parameter shapes.
struct AdamState {
    AdamConfig cfg;
    std::uint64_t step = 0;
    std::vector<Matrix> m_weights, v_weights;
    std::vector<Matrix> m_biases, v_biases;
};

AdamState make_adam_state(const MlpNetwork& net, AdamConfig cfg = {});

// One bias-corrected Adam update. Ignores grads.input.
void adam_step(MlpNetwork& net, AdamState& state, const MlpGradients& grads);

}  // namespace misalign::num
