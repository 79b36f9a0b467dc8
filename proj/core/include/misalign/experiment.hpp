#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "misalign/attacks.hpp"
#include "misalign/forage_env.hpp"
#include "misalign/metrics.hpp"
#include "misalign/policies.hpp"

namespace misalign::eval {

enum class AttackType {
    None,
    Align,
    Hadamard,
    TargetedHadamard,
    Random,
    Ou,
    Whitebox,
};

const char* attack_type_name(AttackType type);

// One attack family in a sweep. m = 0 means all agents. Align and
// targeted-Hadamard carry a trained model; random carries its kind.
struct AttackSpec {
    AttackType type = AttackType::None;
    int m = 0;
    attack::RandomKind random_kind = attack::RandomKind::Uniform;
    std::shared_ptr<const attack::AlignModel> model;
    std::string model_path;  // provenance only

    // Stable row label: attack name plus "_m<k>" when m is restricted.
    std::string label(int n_agents) const;
    bool is_random_family() const { return type == AttackType::Random || type == AttackType::Ou; }
};

struct ExperimentConfig {
    env::GridConfig env;
    std::shared_ptr<const policy::Victim> victim;
    std::vector<AttackSpec> attacks;
    std::vector<double> epsilons;
    int iterations = 10;  // PGD steps K
    std::optional<double> alpha;
    int episodes = 50;
    std::uint64_t master_seed = 0;
    int jobs = 1;

    void validate() const;
};

struct EpisodeRecord {
    std::string attack_label;
    double epsilon = 0.0;
    int m = 0;
    int episode_index = 0;
    std::uint64_t seed = 0;
    double total_return = 0.0;
    int length = 0;
    double max_pert_norm = 0.0;
    std::vector<int> victims;  // union of attacked agents over the episode
};

struct SummaryRow {
    std::string attack;
    double epsilon = 0.0;
    int m = 0;
    double iqm = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double drop_pct = 0.0;
    double mean_len = 0.0;
    double len_increase_pct = 0.0;
    int episodes = 0;
    std::uint64_t seed = 0;
};

struct MetricsSummary {
    std::vector<SummaryRow> rows;
    std::vector<EpisodeRecord> records;
    ExperimentConfig config;   // empty after reaggregation from files
    std::string meta_json;     // run metadata; round-trips through reports
};

// Per-episode attacker with per-episode state (OU, random victim choice).
class Attacker {
public:
    virtual ~Attacker() = default;
    virtual attack::Perturbation perturb(const env::JointObservation& obs) = 0;
    // Agents attacked at the most recent perturb() call.
    virtual std::vector<int> last_victims() const = 0;
};

std::unique_ptr<Attacker> make_attacker(const AttackSpec& spec, const ExperimentConfig& config,
                                        double epsilon, std::uint64_t attack_seed);

// One rollout: perturb what the victims see, never the state. epsilon <= 0
// short-circuits to a benign rollout.
EpisodeRecord run_episode(const ExperimentConfig& config, const AttackSpec& spec, double epsilon,
                          int eps_index, int episode_index);

// Benign row first, then one row per (attack, epsilon); a synthetic
// "best_random" row per epsilon when at least two random-family attacks ran.
MetricsSummary run_experiment(const ExperimentConfig& config);

struct ReportPaths {
    std::string csv;
    std::string json;
    std::string records;     // JSON-lines + "<records>.meta.json" sidecar
    std::string plot_data;   // may be empty to skip
};

void write_report(const MetricsSummary& summary, const ReportPaths& paths);

// Rebuild summary rows (IQM, CIs, drops) from raw records written by
// write_report; byte-identical to the original aggregation.
MetricsSummary reaggregate_records(const std::string& records_path);

// Deterministic seed plumbing, shared with tests.
std::uint64_t episode_seed(std::uint64_t master_seed, int eps_index, int episode_index);
std::uint64_t bootstrap_seed(std::uint64_t master_seed, const std::string& label, int eps_index);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace misalign::eval
