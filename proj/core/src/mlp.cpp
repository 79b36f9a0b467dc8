#include "misalign/mlp.hpp"

#include <cmath>
#include <cstring>

#include <json.hpp>

#include "misalign/rng.hpp"

namespace misalign::num {

namespace {

void check_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2) throw ContractError("mlp: need at least input and output layers");
    for (int s : sizes)
        if (s <= 0) throw ContractError("mlp: layer sizes must be positive");
}

// out = inputs * W, then add the bias row to every output row.
void affine(const Matrix& inputs, const Matrix& w, const Matrix& b, Matrix& out) {
    const std::size_t batch = inputs.rows();
    const std::size_t in = w.rows();
    const std::size_t outc = w.cols();
    out = Matrix(batch, outc);
    for (std::size_t r = 0; r < batch; ++r) {
        double* orow = out.row(r).data();
        const double* irow = inputs.row(r).data();
        for (std::size_t j = 0; j < outc; ++j) orow[j] = b(0, j);
        for (std::size_t i = 0; i < in; ++i) {
            const double x = irow[i];
            const double* wrow = w.row(i).data();
            for (std::size_t j = 0; j < outc; ++j) orow[j] += x * wrow[j];
        }
    }
}

}  // namespace

std::size_t MlpNetwork::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

MlpNetwork make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    check_sizes(layer_sizes);
    MlpNetwork net;
    net.layer_sizes = layer_sizes;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        SplitMix64 rng(mix_seed({seed, 0x6d6c70ULL, static_cast<std::uint64_t>(l)}));
        Matrix w(fan_in, fan_out);
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(1, fan_out, 0.0);
    }
    return net;
}

Matrix mlp_forward_batch(const MlpNetwork& net, const Matrix& inputs, MlpTrace* trace) {
    if (net.layer_count() == 0) throw ContractError("mlp_forward: uninitialized network");
    if (inputs.cols() != static_cast<std::size_t>(net.input_size()))
        throw ContractError("mlp_forward: input width does not match network input size");
    if (trace) {
        trace->activations.clear();
        trace->activations.push_back(inputs);
    }
    Matrix current = inputs;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        Matrix next;
        affine(current, net.weights[l], net.biases[l], next);
        if (l + 1 < net.layer_count()) {
            for (std::size_t i = 0; i < next.size(); ++i) next.data()[i] = std::tanh(next.data()[i]);
        }
        if (trace) trace->activations.push_back(next);
        current = std::move(next);
    }
    return current;
}

MlpGradients mlp_backward_batch(const MlpNetwork& net, const MlpTrace& trace,
                                const Matrix& output_grads) {
    const std::size_t layers = net.layer_count();
    if (trace.activations.size() != layers + 1)
        throw ContractError("mlp_backward: trace does not match network depth");
    const Matrix& out = trace.activations.back();
    if (!output_grads.same_shape(out))
        throw ContractError("mlp_backward: output gradient shape mismatch");

    MlpGradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);

    Matrix dz = output_grads;  // output layer is identity
    for (std::size_t li = layers; li-- > 0;) {
        const Matrix& acts_in = trace.activations[li];
        const std::size_t batch = dz.rows();
        const std::size_t in = net.weights[li].rows();
        const std::size_t outc = net.weights[li].cols();

        Matrix dw(in, outc);
        Matrix db(1, outc);
        for (std::size_t r = 0; r < batch; ++r) {
            const double* dzrow = dz.row(r).data();
            const double* xrow = acts_in.row(r).data();
            for (std::size_t j = 0; j < outc; ++j) db(0, j) += dzrow[j];
            for (std::size_t i = 0; i < in; ++i) {
                const double x = xrow[i];
                double* dwrow = dw.row(i).data();
                for (std::size_t j = 0; j < outc; ++j) dwrow[j] += x * dzrow[j];
            }
        }

        Matrix dx(batch, in);
        for (std::size_t r = 0; r < batch; ++r) {
            const double* dzrow = dz.row(r).data();
            double* dxrow = dx.row(r).data();
            for (std::size_t i = 0; i < in; ++i) {
                const double* wrow = net.weights[li].row(i).data();
                double s = 0.0;
                for (std::size_t j = 0; j < outc; ++j) s += wrow[j] * dzrow[j];
                dxrow[i] = s;
            }
        }

        g.weights[li] = std::move(dw);
        g.biases[li] = std::move(db);

        if (li > 0) {
            // acts_in is post-tanh output of layer li-1: dtanh = 1 - a^2.
            for (std::size_t i = 0; i < dx.size(); ++i) {
                const double a = acts_in.data()[i];
                dx.data()[i] *= 1.0 - a * a;
            }
        }
        dz = std::move(dx);
    }
    g.input = std::move(dz);
    return g;
}

std::vector<double> mlp_forward(const MlpNetwork& net, std::span<const double> input) {
    Matrix in(1, input.size());
    std::memcpy(in.data(), input.data(), input.size() * sizeof(double));
    Matrix out = mlp_forward_batch(net, in);
    return {out.data(), out.data() + out.size()};
}

MlpGradients mlp_backward(const MlpNetwork& net, std::span<const double> input,
                          std::span<const double> output_grad) {
    if (output_grad.size() != static_cast<std::size_t>(net.output_size()))
        throw ContractError("mlp_backward: output gradient length mismatch");
    Matrix in(1, input.size());
    std::memcpy(in.data(), input.data(), input.size() * sizeof(double));
    MlpTrace trace;
    mlp_forward_batch(net, in, &trace);
    Matrix og(1, output_grad.size());
    std::memcpy(og.data(), output_grad.data(), output_grad.size() * sizeof(double));
    return mlp_backward_batch(net, trace, og);
}

std::vector<double> mlp_input_gradient(const MlpNetwork& net, std::span<const double> input,
                                       std::span<const double> output_grad) {
    MlpGradients g = mlp_backward(net, input, output_grad);
    auto row = g.input.row(0);
    return {row.begin(), row.end()};
}

std::string mlp_to_json(const MlpNetwork& net) {
    nlohmann::json j;
    j["layer_sizes"] = net.layer_sizes;
    j["activation"] = "tanh";
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json biases = nlohmann::json::array();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        weights.push_back(std::vector<double>(net.weights[l].data(),
                                              net.weights[l].data() + net.weights[l].size()));
        biases.push_back(std::vector<double>(net.biases[l].data(),
                                             net.biases[l].data() + net.biases[l].size()));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    return j.dump();
}

MlpNetwork mlp_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    MlpNetwork net;
    net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    check_sizes(net.layer_sizes);
    if (j.at("activation").get<std::string>() != "tanh")
        throw ContractError("mlp_from_json: unknown activation tag");
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() + 1 != net.layer_sizes.size() || biases.size() != weights.size())
        throw ContractError("mlp_from_json: layer count mismatch");
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        const std::size_t in = net.layer_sizes[l];
        const std::size_t out = net.layer_sizes[l + 1];
        auto wvals = weights[l].get<std::vector<double>>();
        auto bvals = biases[l].get<std::vector<double>>();
        if (wvals.size() != in * out || bvals.size() != out)
            throw ContractError("mlp_from_json: parameter block size mismatch");
        Matrix w(in, out);
        std::memcpy(w.data(), wvals.data(), wvals.size() * sizeof(double));
        Matrix b(1, out);
        std::memcpy(b.data(), bvals.data(), bvals.size() * sizeof(double));
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

}  // namespace misalign::num
