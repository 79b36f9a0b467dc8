#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "misalign/matrix.hpp"

namespace misalign::num {

// Hidden-layer activation. Output layers are always identity.
enum class Activation { Tanh };

// Fixed-topology multilayer perceptron. weights[l] has shape
// (layer_sizes[l] x layer_sizes[l+1]); biases[l] is (1 x layer_sizes[l+1]).
struct MlpNetwork {
    std::vector<int> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
    Activation activation = Activation::Tanh;

    int input_size() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
    int output_size() const { return layer_sizes.empty() ? 0 : layer_sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }
    std::size_t parameter_count() const;
};

// Seeded construction: weights uniform in +/- sqrt(6 / (fan_in + fan_out)),
// biases zero. Same (sizes, seed) always yields the same network.
MlpNetwork make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

// Parameter and input gradients of one forward map, contracted with the
// output cotangent. Batched calls sum parameter gradients over rows.
struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
    Matrix input;  // one row per batch sample
};

// Per-layer activations cached by a forward pass; activations[0] is the input
// batch, activations.back() the output.
struct MlpTrace {
    std::vector<Matrix> activations;
};

std::vector<double> mlp_forward(const MlpNetwork& net, std::span<const double> input);

MlpGradients mlp_backward(const MlpNetwork& net, std::span<const double> input,
                          std::span<const double> output_grad);

// Convenience: just the gradient of (output . output_grad) wrt the input.
std::vector<double> mlp_input_gradient(const MlpNetwork& net, std::span<const double> input,
                                       std::span<const double> output_grad);

Matrix mlp_forward_batch(const MlpNetwork& net, const Matrix& inputs, MlpTrace* trace = nullptr);

MlpGradients mlp_backward_batch(const MlpNetwork& net, const MlpTrace& trace,
                                const Matrix& output_grads);

// Lossless JSON round-trip: {layer_sizes, weights, biases, activation}.
std::string mlp_to_json(const MlpNetwork& net);
MlpNetwork mlp_from_json(const std::string& text);

}  // namespace misalign::num
