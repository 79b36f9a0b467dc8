#include "misalign/attacks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "misalign/adam.hpp"
#include "misalign/errors.hpp"

namespace misalign::attack {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_obs_shape(const AlignModel& model, const env::JointObservation& obs) {
    if (obs.rows() != static_cast<std::size_t>(model.n) ||
        obs.cols() != static_cast<std::size_t>(model.d))
        throw ContractError("align: observation shape does not match model (n, d)");
}

}  // namespace

ObservationDataset collect_observations(const env::GridConfig& config,
                                        const policy::Victim& victim, int t_c,
                                        std::uint64_t seed) {
    if (t_c < 1) throw ContractError("collect_observations: t_c must be >= 1");
    ObservationDataset ds;
    ds.n = config.n_agents;
    ds.d = config.obs_dim();
    ds.seed = seed;
    ds.env_digest = config.digest();
    ds.observations.reserve(static_cast<std::size_t>(t_c));

    std::uint64_t episode = 0;
    while (static_cast<int>(ds.observations.size()) < t_c) {
        auto [state, obs] = env_reset(config, num::mix_seed({seed, num::fnv1a("collect"), episode++}));
        bool done = false;
        while (!done && static_cast<int>(ds.observations.size()) < t_c) {
            ds.observations.push_back(obs);
            std::vector<env::Action> actions(config.n_agents);
            for (int i = 0; i < config.n_agents; ++i) actions[i] = victim.act(obs.row(i));
            auto step = env_step(config, state, actions);
            obs = std::move(step.obs);
            done = step.done;
        }
    }
    return ds;
}

void save_dataset(const ObservationDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open dataset file for writing", path);
    for (const auto& obs : ds.observations) {
        nlohmann::json line = nlohmann::json::array();
        for (std::size_t r = 0; r < obs.rows(); ++r) {
            auto row = obs.row(r);
            line.push_back(std::vector<double>(row.begin(), row.end()));
        }
        out << line.dump() << '\n';
    }
    if (!out) throw IoError("failed writing dataset file", path);

    nlohmann::json meta;
    meta["n"] = ds.n;
    meta["d"] = ds.d;
    meta["T_c"] = ds.observations.size();
    meta["env_config_digest"] = ds.env_digest;
    meta["seed"] = ds.seed;
    std::ofstream mout(path + ".meta.json", std::ios::binary);
    if (!mout) throw IoError("cannot open dataset sidecar for writing", path + ".meta.json");
    mout << meta.dump(2) << '\n';
    if (!mout) throw IoError("failed writing dataset sidecar", path + ".meta.json");
}

ObservationDataset load_dataset(const std::string& path) {
    std::ifstream min(path + ".meta.json", std::ios::binary);
    if (!min) throw IoError("cannot open dataset sidecar", path + ".meta.json");
    nlohmann::json meta;
    try {
        min >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed dataset sidecar (") + e.what() + ")",
                      path + ".meta.json");
    }
    ObservationDataset ds;
    ds.n = meta.at("n").get<int>();
    ds.d = meta.at("d").get<int>();
    ds.seed = meta.at("seed").get<std::uint64_t>();
    ds.env_digest = meta.at("env_config_digest").get<std::string>();

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset file", path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("malformed dataset line (") + e.what() + ")", path);
        }
        env::JointObservation obs(ds.n, ds.d);
        if (j.size() != static_cast<std::size_t>(ds.n))
            throw IoError("dataset line has wrong agent count", path);
        for (int r = 0; r < ds.n; ++r) {
            auto vals = j[r].get<std::vector<double>>();
            if (vals.size() != static_cast<std::size_t>(ds.d))
                throw IoError("dataset line has wrong observation width", path);
            std::copy(vals.begin(), vals.end(), obs.row(r).begin());
        }
        ds.observations.push_back(std::move(obs));
    }
    const std::size_t expected = meta.at("T_c").get<std::size_t>();
    if (ds.observations.size() != expected)
        throw IoError("dataset length does not match sidecar T_c", path);
    return ds;
}

std::vector<double> concat_excluding(const env::JointObservation& obs, int excluded) {
    const std::size_t n = obs.rows(), d = obs.cols();
    std::vector<double> input;
    input.reserve((n - 1) * d);
    for (std::size_t j = 0; j < n; ++j) {
        if (static_cast<int>(j) == excluded) continue;
        auto row = obs.row(j);
        input.insert(input.end(), row.begin(), row.end());
    }
    return input;
}

AlignModel train_align_model(const ObservationDataset& ds, const AlignTrainConfig& cfg) {
    if (ds.observations.empty()) throw ContractError("train_align_model: empty dataset");
    const int n = ds.n, d = ds.d;

    std::vector<int> sizes;
    sizes.push_back((n - 1) * d);
    for (int h : cfg.hidden_sizes) sizes.push_back(h);
    sizes.push_back(d);

    AlignModel model;
    model.n = n;
    model.d = d;
    model.epochs = cfg.epochs;
    model.net = num::make_mlp(sizes, num::mix_seed({cfg.seed, num::fnv1a("align_init")}));
    num::AdamState adam = num::make_adam_state(model.net, {.lr = cfg.lr});

    // One training pair per (sample, excluded agent).
    const std::size_t pairs = ds.observations.size() * static_cast<std::size_t>(n);
    std::vector<std::size_t> order(pairs);
    std::iota(order.begin(), order.end(), 0);
    num::SplitMix64 shuffle_rng(num::mix_seed({cfg.seed, num::fnv1a("align_shuffle")}));

    const int batch = std::max(1, cfg.batch);
    const int in_width = (n - 1) * d;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t count = std::min<std::size_t>(batch, order.size() - start);
            num::Matrix inputs(count, in_width);
            num::Matrix targets(count, d);
            for (std::size_t b = 0; b < count; ++b) {
                const std::size_t pair = order[start + b];
                const auto& obs = ds.observations[pair / n];
                const int excluded = static_cast<int>(pair % n);
                std::vector<double> in = concat_excluding(obs, excluded);
                std::copy(in.begin(), in.end(), inputs.row(b).begin());
                auto trow = obs.row(excluded);
                std::copy(trow.begin(), trow.end(), targets.row(b).begin());
            }
            num::MlpTrace trace;
            num::Matrix out = num::mlp_forward_batch(model.net, inputs, &trace);
            num::Matrix dz(count, d);
            double batch_loss = 0.0;
            const double scale = 2.0 / (static_cast<double>(count) * d);
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double r = out.data()[i] - targets.data()[i];
                batch_loss += r * r;
                dz.data()[i] = scale * r;
            }
            epoch_loss += batch_loss / d;  // sum over samples of per-sample MSE
            num::MlpGradients grads = num::mlp_backward_batch(model.net, trace, dz);
            num::adam_step(model.net, adam, grads);
        }
        model.loss_curve.push_back(epoch_loss / static_cast<double>(pairs));
    }
    return model;
}

void save_align_model(const AlignModel& model, const std::string& path) {
    nlohmann::json j;
    j["n"] = model.n;
    j["d"] = model.d;
    j["epochs"] = model.epochs;
    j["loss_curve"] = model.loss_curve;
    j["network"] = nlohmann::json::parse(num::mlp_to_json(model.net));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open model file for writing", path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing model file", path);
}

AlignModel load_align_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file", path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed model file (") + e.what() + ")", path);
    }
    AlignModel model;
    model.n = j.at("n").get<int>();
    model.d = j.at("d").get<int>();
    model.epochs = j.at("epochs").get<int>();
    model.loss_curve = j.at("loss_curve").get<std::vector<double>>();
    model.net = num::mlp_from_json(j.at("network").dump());
    if (model.net.input_size() != (model.n - 1) * model.d || model.net.output_size() != model.d)
        throw IoError("model header does not match network shape", path);
    return model;
}

AlignLoss align_loss(const AlignModel& model, const env::JointObservation& obs) {
    check_obs_shape(model, obs);
    AlignLoss loss;
    loss.per_agent.resize(model.n);
    for (int i = 0; i < model.n; ++i) {
        std::vector<double> input = concat_excluding(obs, i);
        std::vector<double> pred = num::mlp_forward(model.net, input);
        auto target = obs.row(i);
        double mse = 0.0;
        for (int k = 0; k < model.d; ++k) {
            const double r = pred[k] - target[k];
            mse += r * r;
        }
        loss.per_agent[i] = mse / model.d;
    }
    loss.total = std::accumulate(loss.per_agent.begin(), loss.per_agent.end(), 0.0) / model.n;
    return loss;
}

num::Matrix align_loss_gradient(const AlignModel& model, const env::JointObservation& obs) {
    check_obs_shape(model, obs);
    const int n = model.n, d = model.d;
    num::Matrix grad(n, d);
    const double scale = 2.0 / (static_cast<double>(n) * d);
    for (int i = 0; i < n; ++i) {
        std::vector<double> input = concat_excluding(obs, i);
        std::vector<double> pred = num::mlp_forward(model.net, input);
        auto target = obs.row(i);
        std::vector<double> residual(d);
        for (int k = 0; k < d; ++k) residual[k] = pred[k] - target[k];

        // Target term: d/d obs_i of mse(pred, obs_i).
        for (int k = 0; k < d; ++k) grad(i, k) -= scale * residual[k];

        // Input term: backprop scale * residual through the network, then
        // scatter the concatenated input gradient back onto rows j != i.
        std::vector<double> out_grad(d);
        for (int k = 0; k < d; ++k) out_grad[k] = scale * residual[k];
        std::vector<double> in_grad = num::mlp_input_gradient(model.net, input, out_grad);
        int slot = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            for (int k = 0; k < d; ++k) grad(j, k) += in_grad[slot * d + k];
            ++slot;
        }
    }
    return grad;
}

namespace {

// Cumulative-delta update: clip to the epsilon ball, then pull back until the
// perturbed value verifiably sits inside the observation domain. Keeps both
// constraints exact in floating point.
double clipped_step(double delta, double step, double o, const AttackBudget& b) {
    double nd = std::clamp(delta + step, -b.epsilon, b.epsilon);
    double v = o + nd;
    if (v < b.o_min || v > b.o_max) {
        nd = std::clamp(std::clamp(v, b.o_min, b.o_max) - o, -b.epsilon, b.epsilon);
        // An in-domain origin always admits nd = 0; stop there regardless.
        while (nd != 0.0 && (o + nd < b.o_min || o + nd > b.o_max))
            nd = std::nextafter(nd, 0.0);
    }
    return nd;
}

}  // namespace

Perturbation pgd_maximize(const GradientFn& grad_fn, const env::JointObservation& obs,
                          const AttackBudget& budget, const std::vector<int>* victims) {
    const std::size_t n = obs.rows(), d = obs.cols();
    std::vector<char> attacked(n, victims == nullptr ? 1 : 0);
    if (victims)
        for (int v : *victims) {
            if (v < 0 || v >= static_cast<int>(n))
                throw ContractError("pgd: victim index out of range");
            attacked[v] = 1;
        }

    Perturbation result{num::Matrix(n, d), budget.epsilon};
    if (budget.epsilon <= 0.0) return result;
    if (budget.iterations < 1) throw ContractError("pgd: iterations must be >= 1");

    const double alpha = budget.step_size();
    env::JointObservation perturbed = obs;
    for (int k = 0; k < budget.iterations; ++k) {
        num::Matrix g = grad_fn(perturbed);
        if (!g.same_shape(obs)) throw ContractError("pgd: gradient shape mismatch");
        for (std::size_t r = 0; r < n; ++r) {
            if (!attacked[r]) continue;
            for (std::size_t c = 0; c < d; ++c) {
                double& delta = result.delta(r, c);
                delta = clipped_step(delta, alpha * sign(g(r, c)), obs(r, c), budget);
                perturbed(r, c) = std::clamp(obs(r, c) + delta, budget.o_min, budget.o_max);
            }
        }
    }
    return result;
}

Perturbation pgd_align_perturb(const AlignModel& model, const env::JointObservation& obs,
                               const AttackBudget& budget, const std::vector<int>* victims) {
    check_obs_shape(model, obs);
    return pgd_maximize(
        [&model](const env::JointObservation& o) { return align_loss_gradient(model, o); }, obs,
        budget, victims);
}

std::vector<int> select_victims(const AlignModel& model, const env::JointObservation& obs, int m) {
    check_obs_shape(model, obs);
    if (m < 1 || m > model.n) throw ContractError("select_victims: m out of range");
    AlignLoss loss = align_loss(model, obs);
    std::vector<int> idx(model.n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return loss.per_agent[a] < loss.per_agent[b];
    });
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

int hadamard_dim(int d) {
    if (d < 1) throw ContractError("hadamard_dim: d must be >= 1");
    return static_cast<int>(std::bit_floor(static_cast<unsigned>(d)));
}

num::Matrix sylvester_hadamard(int d_tilde) {
    if (d_tilde < 1 || !std::has_single_bit(static_cast<unsigned>(d_tilde)))
        throw ContractError("sylvester_hadamard: dimension must be a power of two");
    num::Matrix h(d_tilde, d_tilde);
    h(0, 0) = 1.0;
    for (int k = 1; k < d_tilde; k *= 2) {
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) {
                const double v = h(r, c);
                h(r, c + k) = v;
                h(r + k, c) = v;
                h(r + k, c + k) = -v;
            }
    }
    return h;
}

Perturbation hadamard_perturbation(int n, int d, double epsilon) {
    if (n < 1) throw ContractError("hadamard_perturbation: n must be >= 1");
    const int dt = hadamard_dim(d);
    if (n > dt)
        throw ContractError(
            "hadamard_perturbation: infeasible, more rows than the Hadamard order supports");
    num::Matrix h = sylvester_hadamard(dt);
    Perturbation p{num::Matrix(n, d), epsilon};
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < dt; ++c) p.delta(r, c) = epsilon * h(r, c);
    return p;
}

Perturbation targeted_hadamard(const AlignModel& model, const env::JointObservation& obs, int m,
                               double epsilon) {
    check_obs_shape(model, obs);
    std::vector<int> victims = select_victims(model, obs, m);
    Perturbation rows = hadamard_perturbation(m, model.d, epsilon);
    Perturbation p{num::Matrix(obs.rows(), obs.cols()), epsilon};
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < model.d; ++c) p.delta(victims[r], c) = rows.delta(r, c);
    return p;
}

const char* random_kind_name(RandomKind kind) {
    switch (kind) {
        case RandomKind::Uniform: return "uniform";
        case RandomKind::Normal: return "normal";
        case RandomKind::Exponential: return "exponential";
    }
    return "unknown";
}

double exponential_rate(double epsilon) { return -std::log(0.01) / epsilon; }

Perturbation random_perturbation(RandomKind kind, int n, int d, double epsilon,
                                 num::SplitMix64& rng) {
    Perturbation p{num::Matrix(n, d), epsilon};
    if (epsilon <= 0.0) return p;
    const double lambda = exponential_rate(epsilon);
    for (std::size_t i = 0; i < p.delta.size(); ++i) {
        double v = 0.0;
        switch (kind) {
            case RandomKind::Uniform: v = rng.uniform(-epsilon, epsilon); break;
            case RandomKind::Normal:
                v = std::clamp(epsilon * rng.normal(), -epsilon, epsilon);
                break;
            case RandomKind::Exponential:
                v = std::clamp(-std::log(1.0 - rng.next_unit()) / lambda, 0.0, epsilon);
                break;
        }
        p.delta.data()[i] = v;
    }
    return p;
}

OuState make_ou_state(int n, int d, double epsilon) {
    OuState s;
    s.delta = num::Matrix(n, d);
    s.epsilon = epsilon;
    s.params = OuParams{epsilon, epsilon, epsilon / 10.0, 1.0};
    return s;
}

Perturbation ou_step(OuState& state, num::SplitMix64& rng) {
    Perturbation p{num::Matrix(state.delta.rows(), state.delta.cols()), state.epsilon};
    const OuParams& q = state.params;
    const double sqrt_dt = std::sqrt(q.dt);
    for (std::size_t i = 0; i < state.delta.size(); ++i) {
        double& v = state.delta.data()[i];
        v = v + q.theta * (q.mu - v) * q.dt + q.sigma * sqrt_dt * rng.normal();
        p.delta.data()[i] = std::clamp(v, -state.epsilon, state.epsilon);
    }
    return p;
}

Perturbation whitebox_perturb(const policy::NeuralPolicy& policy,
                              const env::JointObservation& obs, const AttackBudget& budget) {
    const std::size_t n = obs.rows(), d = obs.cols();
    if (static_cast<int>(d) != policy.d)
        throw ContractError("whitebox_perturb: observation width does not match policy");
    Perturbation p{num::Matrix(n, d), budget.epsilon};
    if (budget.epsilon <= 0.0) return p;

    for (std::size_t i = 0; i < n; ++i) {
        auto clean_row = obs.row(i);
        const env::Action target = policy::greedy_action(policy, clean_row);

        env::JointObservation single(1, d);
        std::copy(clean_row.begin(), clean_row.end(), single.row(0).begin());

        // Descend the probability: maximize its negation with the same schedule.
        auto grad = [&](const env::JointObservation& o) {
            const std::vector<double> g =
                policy::policy_prob_and_grad(policy, o.row(0), target).second;
            num::Matrix out(1, d);
            for (std::size_t k = 0; k < d; ++k) out(0, k) = -g[k];
            return out;
        };
        Perturbation row_delta = pgd_maximize(grad, single, budget);
        std::copy(row_delta.delta.row(0).begin(), row_delta.delta.row(0).end(),
                  p.delta.row(i).begin());
    }
    return p;
}

}  // namespace misalign::attack
