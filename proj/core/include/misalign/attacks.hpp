#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "misalign/forage_env.hpp"
#include "misalign/matrix.hpp"
#include "misalign/mlp.hpp"
#include "misalign/policies.hpp"
#include "misalign/rng.hpp"

namespace misalign::attack {

// L-infinity budget and PGD schedule. alpha defaults to epsilon / iterations.
struct AttackBudget {
    double epsilon = 0.1;
    int iterations = 10;
    std::optional<double> alpha;
    double o_min = -1.0;
    double o_max = 1.0;

    double step_size() const { return alpha ? *alpha : epsilon / iterations; }
};

// An n x d perturbation with the budget it was generated under. Rows of
// agents outside the victim set are all-zero.
struct Perturbation {
    num::Matrix delta;
    double epsilon = 0.0;

    bool within_budget(double tol = 1e-12) const {
        return num::max_row_inf_norm(delta) <= epsilon + tol;
    }
};

// Joint observations captured during the benign collection phase.
struct ObservationDataset {
    int n = 0;
    int d = 0;
    std::uint64_t seed = 0;
    std::string env_digest;
    std::vector<env::JointObservation> observations;
};

// Benign rollouts (no perturbations), episodes auto-reset, exactly t_c
// stored joint observations.
ObservationDataset collect_observations(const env::GridConfig& config,
                                        const policy::Victim& victim, int t_c,
                                        std::uint64_t seed);

// JSON-lines of n x d arrays plus a "<path>.meta.json" sidecar.
void save_dataset(const ObservationDataset& ds, const std::string& path);
ObservationDataset load_dataset(const std::string& path);

struct AlignTrainConfig {
    int epochs = 100;
    int batch = 64;
    double lr = 1e-4;
    std::vector<int> hidden_sizes = {256, 256, 256};
    std::uint64_t seed = 0;
};

// Shared reconstruction network: predicts agent i's row from the other n-1
// rows concatenated in ascending agent order. Trained once, then frozen.
struct AlignModel {
    num::MlpNetwork net;
    int n = 0;
    int d = 0;
    int epochs = 0;
    std::vector<double> loss_curve;  // mean training loss per epoch

    double final_loss() const { return loss_curve.empty() ? -1.0 : loss_curve.back(); }
};

AlignModel train_align_model(const ObservationDataset& ds, const AlignTrainConfig& cfg);

void save_align_model(const AlignModel& model, const std::string& path);
AlignModel load_align_model(const std::string& path);

// Input vector for the excluded agent: remaining rows, ascending index.
std::vector<double> concat_excluding(const env::JointObservation& obs, int excluded);

struct AlignLoss {
    double total = 0.0;                // mean of per_agent
    std::vector<double> per_agent;     // MSE of reconstructing each agent's row
};

AlignLoss align_loss(const AlignModel& model, const env::JointObservation& obs);

// Gradient of the total loss wrt the full joint observation. Each row gets
// contributions through every reconstruction input that contains it and
// through its own appearance as a target.
num::Matrix align_loss_gradient(const AlignModel& model, const env::JointObservation& obs);

using GradientFn = std::function<num::Matrix(const env::JointObservation&)>;

// Iterated sign-ascent: per step take alpha * sign(grad), clip the cumulative
// perturbation to the epsilon ball, clip the perturbed observation to the
// domain. Returns the final perturbed-minus-original difference, so budget
// and domain hold exactly. Pass `victims` to restrict updates to those rows.
Perturbation pgd_maximize(const GradientFn& grad, const env::JointObservation& obs,
                          const AttackBudget& budget,
                          const std::vector<int>* victims = nullptr);

Perturbation pgd_align_perturb(const AlignModel& model, const env::JointObservation& obs,
                               const AttackBudget& budget,
                               const std::vector<int>* victims = nullptr);

// The m agents with the lowest per-agent reconstruction loss; ties broken by
// ascending index. Returned sorted ascending.
std::vector<int> select_victims(const AlignModel& model, const env::JointObservation& obs, int m);

// Largest power of two <= d.
int hadamard_dim(int d);

// Sylvester doubling: entries +/-1, H * H^T = d_tilde * I exactly.
num::Matrix sylvester_hadamard(int d_tilde);

// First n rows of the d_tilde x d_tilde Sylvester matrix scaled by epsilon
// and zero-padded to width d. Rows are exactly orthogonal and each has
// inf-norm epsilon. Throws if n > d_tilde.
Perturbation hadamard_perturbation(int n, int d, double epsilon);

// Align-based victim selection + Hadamard rows for the selected agents.
Perturbation targeted_hadamard(const AlignModel& model, const env::JointObservation& obs, int m,
                               double epsilon);

enum class RandomKind { Uniform, Normal, Exponential };

const char* random_kind_name(RandomKind kind);

// Rate of the exponential baseline: 99% of draws fall within the budget.
double exponential_rate(double epsilon);

// uniform: U(-eps, eps); normal: N(0, eps^2) clipped to [-eps, eps];
// exponential: Exp(-ln(0.01)/eps) clipped to [0, eps].
Perturbation random_perturbation(RandomKind kind, int n, int d, double epsilon,
                                 num::SplitMix64& rng);

struct OuParams {
    double mu = 0.0;
    double theta = 0.0;
    double sigma = 0.0;
    double dt = 1.0;
};

// Ornstein-Uhlenbeck noise. The internal state keeps the unclipped value;
// emitted matrices are clipped to the budget.
struct OuState {
    num::Matrix delta;
    OuParams params;
    double epsilon = 0.0;
};

// Paper parameterization: mu = eps, theta = eps, sigma = eps/10, dt = 1,
// delta_0 = 0.
OuState make_ou_state(int n, int d, double epsilon);

Perturbation ou_step(OuState& state, num::SplitMix64& rng);

// Per agent independently: fix a* as the argmax action on the clean row,
// then run PGD to *minimize* pi(row + delta, a*). Requires a neural victim.
Perturbation whitebox_perturb(const policy::NeuralPolicy& policy,
                              const env::JointObservation& obs, const AttackBudget& budget);

}  // namespace misalign::attack
