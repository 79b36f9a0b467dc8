#include "misalign/adam.hpp"

#include <cmath>

namespace misalign::num {

namespace {

void check_mirror(const std::vector<Matrix>& params, const std::vector<Matrix>& grads,
                  const char* what) {
    if (params.size() != grads.size())
        throw ContractError(std::string("adam_step: ") + what + " layer count mismatch");
    for (std::size_t l = 0; l < params.size(); ++l)
        if (!params[l].same_shape(grads[l]))
            throw ContractError(std::string("adam_step: ") + what + " gradient shape mismatch");
}

void update_block(Matrix& param, Matrix& m, Matrix& v, const Matrix& grad, const AdamConfig& cfg,
                  double bc1, double bc2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad.data()[i];
        double& mi = m.data()[i];
        double& vi = v.data()[i];
        mi = cfg.beta1 * mi + (1.0 - cfg.beta1) * g;
        vi = cfg.beta2 * vi + (1.0 - cfg.beta2) * g * g;
        const double mhat = mi / bc1;
        const double vhat = vi / bc2;
        param.data()[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

}  // namespace

AdamState make_adam_state(const MlpNetwork& net, AdamConfig cfg) {
    AdamState s;
    s.cfg = cfg;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        s.m_weights.emplace_back(net.weights[l].rows(), net.weights[l].cols());
        s.v_weights.emplace_back(net.weights[l].rows(), net.weights[l].cols());
        s.m_biases.emplace_back(net.biases[l].rows(), net.biases[l].cols());
        s.v_biases.emplace_back(net.biases[l].rows(), net.biases[l].cols());
    }
    return s;
}

void adam_step(MlpNetwork& net, AdamState& state, const MlpGradients& grads) {
    check_mirror(net.weights, grads.weights, "weight");
    check_mirror(net.biases, grads.biases, "bias");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        update_block(net.weights[l], state.m_weights[l], state.v_weights[l], grads.weights[l],
                     state.cfg, bc1, bc2);
        update_block(net.biases[l], state.m_biases[l], state.v_biases[l], grads.biases[l],
                     state.cfg, bc1, bc2);
    }
}

}  // namespace misalign::num
