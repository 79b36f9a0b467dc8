#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "misalign/forage_env.hpp"
#include "misalign/mlp.hpp"

namespace misalign::policy {

// Deterministic cooperative expert. Reads only its own observation row:
// targets the lowest-level visible food, loads when orthogonally adjacent,
// otherwise steps to shrink (Chebyshev, Manhattan) distance, avoiding cells
// it perceives as occupied. With no food in sight it patrols a serpentine
// lap of the grid.
class ScriptedPolicy {
public:
    explicit ScriptedPolicy(env::GridConfig config) : config_(std::move(config)) {}

    env::Action act(std::span<const double> obs_row) const;

    const env::GridConfig& config() const { return config_; }

private:
    env::GridConfig config_;
};

// Differentiable victim: d observation entries in, 6 action logits out.
struct NeuralPolicy {
    num::MlpNetwork net;
    int d = 0;
    int action_count = env::kActionCount;
};

struct BcOptions {
    std::vector<int> hidden_sizes = {64, 64};
    int batch = 64;
    double lr = 1e-3;
    double holdout_fraction = 0.0;  // carved off the tail before training
};

struct BcResult {
    NeuralPolicy policy;
    double train_accuracy = 0.0;
    double holdout_accuracy = 0.0;  // meaningful only if holdout_fraction > 0
};

using BcSample = std::pair<std::vector<double>, env::Action>;

// Behavior cloning of an expert: cross-entropy on action labels, seeded
// shuffling and init so identical inputs give identical networks.
BcResult bc_train(const std::vector<BcSample>& data, int epochs, std::uint64_t seed,
                  const BcOptions& options = {});

std::vector<double> action_probabilities(const NeuralPolicy& policy,
                                         std::span<const double> obs_row);

// Probability of `action` under the policy and its exact gradient with
// respect to the observation row.
std::pair<double, std::vector<double>> policy_prob_and_grad(const NeuralPolicy& policy,
                                                            std::span<const double> obs_row,
                                                            env::Action action);

env::Action greedy_action(const NeuralPolicy& policy, std::span<const double> obs_row);

void save_policy(const NeuralPolicy& policy, const std::string& path);
NeuralPolicy load_policy(const std::string& path);

// The deployed team under attack; acts row-by-row.
class Victim {
public:
    explicit Victim(ScriptedPolicy p) : impl_(std::move(p)) {}
    explicit Victim(NeuralPolicy p) : impl_(std::move(p)) {}

    env::Action act(std::span<const double> obs_row) const {
        if (const auto* s = std::get_if<ScriptedPolicy>(&impl_)) return s->act(obs_row);
        return greedy_action(std::get<NeuralPolicy>(impl_), obs_row);
    }

    bool is_neural() const { return std::holds_alternative<NeuralPolicy>(impl_); }
    const NeuralPolicy& neural() const { return std::get<NeuralPolicy>(impl_); }

private:
    std::variant<ScriptedPolicy, NeuralPolicy> impl_;
};

// Expert rollouts flattened to (row, action) pairs, for cloning.
std::vector<BcSample> collect_expert_samples(const env::GridConfig& config, int samples,
                                             std::uint64_t seed);

}  // namespace misalign::policy
