#include "misalign/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "misalign/errors.hpp"

namespace misalign::eval {

const char* attack_type_name(AttackType type) {
    switch (type) {
        case AttackType::None: return "none";
        case AttackType::Align: return "align";
        case AttackType::Hadamard: return "hadamard";
        case AttackType::TargetedHadamard: return "targeted_hadamard";
        case AttackType::Random: return "random";
        case AttackType::Ou: return "ou";
        case AttackType::Whitebox: return "whitebox";
    }
    return "unknown";
}

std::string AttackSpec::label(int n_agents) const {
    std::string base = attack_type_name(type);
    if (type == AttackType::Random) base += std::string("_") + attack::random_kind_name(random_kind);
    if (m > 0 && m < n_agents) base += "_m" + std::to_string(m);
    return base;
}

void ExperimentConfig::validate() const {
    env.validate();
    if (!victim) throw ConfigError("experiment needs a victim policy", "victim");
    if (episodes < 1) throw ConfigError("episodes must be >= 1", "sweep.episodes");
    if (iterations < 1) throw ConfigError("K must be >= 1", "sweep.K");
    for (std::size_t i = 0; i < epsilons.size(); ++i)
        if (epsilons[i] <= 0.0)
            throw ConfigError("must be > 0 (benign row is implicit)",
                              "sweep.epsilons[" + std::to_string(i) + "]");
    for (std::size_t a = 0; a < attacks.size(); ++a) {
        const AttackSpec& s = attacks[a];
        const std::string where = "attacks[" + std::to_string(a) + "]";
        if (s.type == AttackType::None)
            throw ConfigError("'none' is implicit; remove it from the attack list", where);
        if (s.m < 0 || s.m > env.n_agents) throw ConfigError("m out of range", where + ".m");
        if ((s.type == AttackType::Align || s.type == AttackType::TargetedHadamard) && !s.model)
            throw ConfigError("attack needs a trained alignment model", where + ".model");
        if (s.model && (s.model->n != env.n_agents || s.model->d != env.obs_dim()))
            throw ConfigError("alignment model (n, d) does not match the environment",
                              where + ".model");
        if (s.type == AttackType::Whitebox && !victim->is_neural())
            throw UnsupportedError("whitebox attack requires a neural victim policy");
        if (s.type == AttackType::Hadamard || s.type == AttackType::TargetedHadamard) {
            const int rows = s.m > 0 ? s.m : env.n_agents;
            if (rows > attack::hadamard_dim(env.obs_dim()))
                throw ConfigError("more victims than Hadamard rows available", where + ".m");
        }
    }
}

std::uint64_t episode_seed(std::uint64_t master_seed, int eps_index, int episode_index) {
    return num::mix_seed({master_seed, num::fnv1a("episode"),
                          static_cast<std::uint64_t>(eps_index),
                          static_cast<std::uint64_t>(episode_index)});
}

std::uint64_t bootstrap_seed(std::uint64_t master_seed, const std::string& label, int eps_index) {
    return num::mix_seed(
        {master_seed, num::fnv1a("bootstrap"), num::fnv1a(label),
         static_cast<std::uint64_t>(eps_index)});
}

namespace {

std::vector<int> all_agents(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return v;
}

class NoAttacker final : public Attacker {
public:
    NoAttacker(int n, int d) : n_(n), d_(d) {}
    attack::Perturbation perturb(const env::JointObservation&) override {
        return {num::Matrix(n_, d_), 0.0};
    }
    std::vector<int> last_victims() const override { return {}; }

private:
    int n_, d_;
};

class AlignAttacker final : public Attacker {
public:
    AlignAttacker(std::shared_ptr<const attack::AlignModel> model, attack::AttackBudget budget,
                  int m)
        : model_(std::move(model)), budget_(budget), m_(m) {}

    attack::Perturbation perturb(const env::JointObservation& obs) override {
        if (m_ > 0 && m_ < model_->n) {
            victims_ = attack::select_victims(*model_, obs, m_);
            return attack::pgd_align_perturb(*model_, obs, budget_, &victims_);
        }
        victims_ = all_agents(model_->n);
        return attack::pgd_align_perturb(*model_, obs, budget_);
    }
    std::vector<int> last_victims() const override { return victims_; }

private:
    std::shared_ptr<const attack::AlignModel> model_;
    attack::AttackBudget budget_;
    int m_;
    std::vector<int> victims_;
};

class HadamardAttacker final : public Attacker {
public:
    HadamardAttacker(int n, int d, int m, double epsilon, std::uint64_t seed) {
        const int rows = m > 0 ? m : n;
        attack::Perturbation base = attack::hadamard_perturbation(rows, d, epsilon);
        delta_ = attack::Perturbation{num::Matrix(n, d), epsilon};
        // Untargeted subset: victims drawn once per episode, uniformly.
        if (rows < n) {
            num::SplitMix64 rng(seed);
            std::vector<int> pool = all_agents(n);
            for (std::size_t i = pool.size(); i > 1; --i)
                std::swap(pool[i - 1], pool[rng.below(i)]);
            pool.resize(rows);
            std::sort(pool.begin(), pool.end());
            victims_ = pool;
        } else {
            victims_ = all_agents(n);
        }
        for (int r = 0; r < rows; ++r)
            std::copy(base.delta.row(r).begin(), base.delta.row(r).end(),
                      delta_.delta.row(victims_[r]).begin());
    }

    attack::Perturbation perturb(const env::JointObservation&) override { return delta_; }
    std::vector<int> last_victims() const override { return victims_; }

private:
    attack::Perturbation delta_;
    std::vector<int> victims_;
};

class TargetedHadamardAttacker final : public Attacker {
public:
    TargetedHadamardAttacker(std::shared_ptr<const attack::AlignModel> model, int m,
                             double epsilon)
        : model_(std::move(model)), m_(m > 0 ? m : model_->n), epsilon_(epsilon) {}

    attack::Perturbation perturb(const env::JointObservation& obs) override {
        attack::Perturbation p = attack::targeted_hadamard(*model_, obs, m_, epsilon_);
        victims_ = attack::select_victims(*model_, obs, m_);
        return p;
    }
    std::vector<int> last_victims() const override { return victims_; }

private:
    std::shared_ptr<const attack::AlignModel> model_;
    int m_;
    double epsilon_;
    std::vector<int> victims_;
};

class RandomAttacker final : public Attacker {
public:
    RandomAttacker(attack::RandomKind kind, int n, int d, double epsilon, std::uint64_t seed)
        : kind_(kind), n_(n), d_(d), epsilon_(epsilon), rng_(seed) {}

    attack::Perturbation perturb(const env::JointObservation&) override {
        return attack::random_perturbation(kind_, n_, d_, epsilon_, rng_);
    }
    std::vector<int> last_victims() const override { return all_agents(n_); }

private:
    attack::RandomKind kind_;
    int n_, d_;
    double epsilon_;
    num::SplitMix64 rng_;
};

class OuAttacker final : public Attacker {
public:
    OuAttacker(int n, int d, double epsilon, std::uint64_t seed)
        : state_(attack::make_ou_state(n, d, epsilon)), rng_(seed), n_(n) {}

    attack::Perturbation perturb(const env::JointObservation&) override {
        return attack::ou_step(state_, rng_);
    }
    std::vector<int> last_victims() const override { return all_agents(n_); }

private:
    attack::OuState state_;
    num::SplitMix64 rng_;
    int n_;
};

class WhiteboxAttacker final : public Attacker {
public:
    WhiteboxAttacker(const policy::NeuralPolicy* policy, attack::AttackBudget budget, int n)
        : policy_(policy), budget_(budget), n_(n) {}

    attack::Perturbation perturb(const env::JointObservation& obs) override {
        return attack::whitebox_perturb(*policy_, obs, budget_);
    }
    std::vector<int> last_victims() const override { return all_agents(n_); }

private:
    const policy::NeuralPolicy* policy_;
    attack::AttackBudget budget_;
    int n_;
};

}  // namespace

std::unique_ptr<Attacker> make_attacker(const AttackSpec& spec, const ExperimentConfig& config,
                                        double epsilon, std::uint64_t attack_seed) {
    const int n = config.env.n_agents;
    const int d = config.env.obs_dim();
    const auto [o_min, o_max] = env::obs_bounds(config.env);
    attack::AttackBudget budget{epsilon, config.iterations, config.alpha, o_min, o_max};
    switch (spec.type) {
        case AttackType::None: return std::make_unique<NoAttacker>(n, d);
        case AttackType::Align:
            return std::make_unique<AlignAttacker>(spec.model, budget, spec.m);
        case AttackType::Hadamard:
            return std::make_unique<HadamardAttacker>(n, d, spec.m, epsilon, attack_seed);
        case AttackType::TargetedHadamard:
            return std::make_unique<TargetedHadamardAttacker>(spec.model, spec.m, epsilon);
        case AttackType::Random:
            return std::make_unique<RandomAttacker>(spec.random_kind, n, d, epsilon, attack_seed);
        case AttackType::Ou: return std::make_unique<OuAttacker>(n, d, epsilon, attack_seed);
        case AttackType::Whitebox:
            return std::make_unique<WhiteboxAttacker>(&config.victim->neural(), budget, n);
    }
    throw ContractError("make_attacker: unknown attack type");
}

EpisodeRecord run_episode(const ExperimentConfig& config, const AttackSpec& spec, double epsilon,
                          int eps_index, int episode_index) {
    EpisodeRecord rec;
    rec.attack_label = spec.type == AttackType::None ? "none" : spec.label(config.env.n_agents);
    rec.epsilon = epsilon;
    rec.m = spec.type == AttackType::None ? 0 : (spec.m > 0 ? spec.m : config.env.n_agents);
    rec.episode_index = episode_index;
    rec.seed = episode_seed(config.master_seed, eps_index, episode_index);

    const bool active = spec.type != AttackType::None && epsilon > 0.0;
    std::unique_ptr<Attacker> attacker;
    if (active) {
        const std::uint64_t attack_seed =
            num::mix_seed({rec.seed, num::fnv1a("attack"), num::fnv1a(rec.attack_label)});
        attacker = make_attacker(spec, config, epsilon, attack_seed);
    }

    auto [state, obs] = env_reset(config.env, rec.seed);
    std::set<int> victim_union;
    std::vector<env::Action> actions(config.env.n_agents);
    bool done = false;
    while (!done) {
        env::JointObservation seen = obs;
        if (active) {
            attack::Perturbation p = attacker->perturb(obs);
            for (std::size_t i = 0; i < seen.size(); ++i) seen.data()[i] += p.delta.data()[i];
            rec.max_pert_norm = std::max(rec.max_pert_norm, num::max_row_inf_norm(p.delta));
            for (int v : attacker->last_victims()) victim_union.insert(v);
        }
        for (int i = 0; i < config.env.n_agents; ++i) actions[i] = config.victim->act(seen.row(i));
        env::StepResult step = env_step(config.env, state, actions);
        rec.total_return += step.reward;
        rec.length = step.length;
        obs = std::move(step.obs);
        done = step.done;
    }
    rec.victims.assign(victim_union.begin(), victim_union.end());
    return rec;
}

namespace {

struct EpisodeTask {
    const AttackSpec* spec;
    double epsilon;
    int eps_index;
    int episode_index;
};

struct GroupStats {
    double iqm_value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double mean_len = 0.0;
};

GroupStats group_stats(const std::vector<const EpisodeRecord*>& records,
                       std::uint64_t master_seed, const std::string& label, int eps_index) {
    std::vector<double> returns;
    double len_sum = 0.0;
    for (const auto* r : records) {
        returns.push_back(r->total_return);
        len_sum += r->length;
    }
    GroupStats g;
    g.iqm_value = iqm(returns);
    auto [lo, hi] = bootstrap_ci(returns, 0.95, 2000, bootstrap_seed(master_seed, label, eps_index));
    g.ci_low = lo;
    g.ci_high = hi;
    g.mean_len = len_sum / static_cast<double>(records.size());
    return g;
}

SummaryRow make_row(const std::string& label, double epsilon, int m, const GroupStats& g,
                    const GroupStats& benign, int episodes, std::uint64_t master_seed) {
    SummaryRow row;
    row.attack = label;
    row.epsilon = epsilon;
    row.m = m;
    row.iqm = g.iqm_value;
    row.ci_low = g.ci_low;
    row.ci_high = g.ci_high;
    row.drop_pct = std::abs(benign.iqm_value) < 1e-300
                       ? 0.0
                       : 100.0 * (g.iqm_value - benign.iqm_value) / benign.iqm_value;
    row.mean_len = g.mean_len;
    row.len_increase_pct = std::abs(benign.mean_len) < 1e-300
                               ? 0.0
                               : 100.0 * (g.mean_len - benign.mean_len) / benign.mean_len;
    row.episodes = episodes;
    row.seed = master_seed;
    return row;
}

nlohmann::json row_to_json(const SummaryRow& row) {
    nlohmann::json j;
    j["attack"] = row.attack;
    j["epsilon"] = row.epsilon;
    j["m"] = row.m;
    j["iqm"] = row.iqm;
    j["ci_low"] = row.ci_low;
    j["ci_high"] = row.ci_high;
    j["drop_pct"] = row.drop_pct;
    j["mean_len"] = row.mean_len;
    j["len_increase_pct"] = row.len_increase_pct;
    j["episodes"] = row.episodes;
    j["seed"] = row.seed;
    return j;
}

}  // namespace

MetricsSummary run_experiment(const ExperimentConfig& config) {
    config.validate();

    AttackSpec benign_spec;  // type None
    std::vector<EpisodeTask> tasks;
    for (int e = 0; e < config.episodes; ++e) tasks.push_back({&benign_spec, 0.0, 0, e});
    for (const AttackSpec& spec : config.attacks)
        for (std::size_t ei = 0; ei < config.epsilons.size(); ++ei)
            for (int e = 0; e < config.episodes; ++e)
                tasks.push_back({&spec, config.epsilons[ei], static_cast<int>(ei) + 1, e});

    std::vector<EpisodeRecord> records(tasks.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int jobs = std::clamp(config.jobs, 1, static_cast<int>(hw));
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const EpisodeTask& t = tasks[i];
                records[i] =
                    run_episode(config, *t.spec, t.epsilon, t.eps_index, t.episode_index);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                cursor.store(tasks.size());
                return;
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // Aggregate in task order: benign first, then (attack, epsilon) groups.
    MetricsSummary summary;
    summary.config = config;
    summary.records = records;

    auto group = [&](const std::string& label, double epsilon) {
        std::vector<const EpisodeRecord*> out;
        for (const auto& r : records)
            if (r.attack_label == label && r.epsilon == epsilon) out.push_back(&r);
        return out;
    };

    const GroupStats benign = group_stats(group("none", 0.0), config.master_seed, "none", 0);
    summary.rows.push_back(
        make_row("none", 0.0, 0, benign, benign, config.episodes, config.master_seed));

    struct RandomRowRef {
        std::size_t row_index;
        int eps_index;
    };
    std::vector<RandomRowRef> random_rows;
    for (const AttackSpec& spec : config.attacks) {
        const std::string label = spec.label(config.env.n_agents);
        for (std::size_t ei = 0; ei < config.epsilons.size(); ++ei) {
            const double eps = config.epsilons[ei];
            const GroupStats g =
                group_stats(group(label, eps), config.master_seed, label, static_cast<int>(ei) + 1);
            const int m = spec.m > 0 ? spec.m : config.env.n_agents;
            summary.rows.push_back(
                make_row(label, eps, m, g, benign, config.episodes, config.master_seed));
            if (spec.is_random_family())
                random_rows.push_back({summary.rows.size() - 1, static_cast<int>(ei)});
        }
    }

    // Best random baseline: the random-family row with the lowest IQM per
    // epsilon, when at least two random kinds were swept.
    std::size_t random_families = 0;
    for (const AttackSpec& spec : config.attacks)
        if (spec.is_random_family()) ++random_families;
    if (random_families >= 2) {
        for (std::size_t ei = 0; ei < config.epsilons.size(); ++ei) {
            const SummaryRow* best = nullptr;
            for (const auto& ref : random_rows)
                if (ref.eps_index == static_cast<int>(ei)) {
                    const SummaryRow& row = summary.rows[ref.row_index];
                    if (!best || row.iqm < best->iqm) best = &row;
                }
            if (best) {
                SummaryRow row = *best;
                row.attack = "best_random";
                summary.rows.push_back(row);
            }
        }
    }

    // Meta blob consumed by write_report and reaggregate_records.
    nlohmann::json meta;
    meta["master_seed"] = config.master_seed;
    meta["episodes"] = config.episodes;
    meta["K"] = config.iterations;
    if (config.alpha) meta["alpha"] = *config.alpha;
    meta["epsilons"] = config.epsilons;
    meta["victim"] = config.victim->is_neural() ? "neural" : "scripted";
    nlohmann::json env_j;
    env_j["width"] = config.env.width;
    env_j["height"] = config.env.height;
    env_j["n_agents"] = config.env.n_agents;
    env_j["n_foods"] = config.env.n_foods;
    env_j["cooperative"] = config.env.cooperative;
    if (config.env.sight_radius) env_j["sight_radius"] = *config.env.sight_radius;
    env_j["max_steps"] = config.env.max_steps;
    env_j["level_min"] = config.env.level_min;
    env_j["level_max"] = config.env.level_max;
    env_j["digest"] = config.env.digest();
    meta["env"] = std::move(env_j);
    nlohmann::json attacks_j = nlohmann::json::array();
    nlohmann::json random_labels = nlohmann::json::array();
    for (const AttackSpec& spec : config.attacks) {
        nlohmann::json a;
        a["type"] = attack_type_name(spec.type);
        a["label"] = spec.label(config.env.n_agents);
        a["m"] = spec.m > 0 ? spec.m : config.env.n_agents;
        if (spec.type == AttackType::Random) a["kind"] = attack::random_kind_name(spec.random_kind);
        if (!spec.model_path.empty()) a["model"] = spec.model_path;
        attacks_j.push_back(std::move(a));
        if (spec.is_random_family()) random_labels.push_back(spec.label(config.env.n_agents));
    }
    meta["attacks"] = std::move(attacks_j);
    meta["random_labels"] = std::move(random_labels);
    summary.meta_json = meta.dump(2);
    return summary;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw ContractError("format_double: conversion failed");
    return std::string(buf, ptr);
}

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing", path);
    out << text;
    if (!out) throw IoError("failed writing file", path);
}

std::string summary_csv(const MetricsSummary& summary) {
    std::ostringstream os;
    os << "attack,epsilon,m,iqm,ci_low,ci_high,drop_pct,mean_len,len_increase_pct,episodes,seed\n";
    for (const SummaryRow& r : summary.rows) {
        os << r.attack << ',' << format_double(r.epsilon) << ',' << r.m << ','
           << format_double(r.iqm) << ',' << format_double(r.ci_low) << ','
           << format_double(r.ci_high) << ',' << format_double(r.drop_pct) << ','
           << format_double(r.mean_len) << ',' << format_double(r.len_increase_pct) << ','
           << r.episodes << ',' << r.seed << '\n';
    }
    return os.str();
}

std::string plot_data_csv(const MetricsSummary& summary) {
    // One row per epsilon (0 = benign), IQM + CI columns per attack curve.
    nlohmann::json meta = nlohmann::json::parse(summary.meta_json);
    std::vector<std::string> labels;
    for (const auto& a : meta.at("attacks")) labels.push_back(a.at("label").get<std::string>());
    bool has_best = false;
    for (const SummaryRow& r : summary.rows)
        if (r.attack == "best_random") has_best = true;
    if (has_best) labels.push_back("best_random");

    auto find_row = [&](const std::string& label, double eps) -> const SummaryRow* {
        for (const SummaryRow& r : summary.rows)
            if (r.attack == label && r.epsilon == eps) return &r;
        return nullptr;
    };
    const SummaryRow* benign = find_row("none", 0.0);

    std::ostringstream os;
    os << "epsilon";
    for (const auto& l : labels) os << ',' << l << "_iqm," << l << "_ci_low," << l << "_ci_high";
    os << '\n';

    std::vector<double> eps_points;
    eps_points.push_back(0.0);
    for (const auto& e : meta.at("epsilons")) eps_points.push_back(e.get<double>());
    for (double eps : eps_points) {
        os << format_double(eps);
        for (const auto& l : labels) {
            const SummaryRow* row = eps == 0.0 ? benign : find_row(l, eps);
            if (row)
                os << ',' << format_double(row->iqm) << ',' << format_double(row->ci_low) << ','
                   << format_double(row->ci_high);
            else
                os << ",,,";
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace

void write_report(const MetricsSummary& summary, const ReportPaths& paths) {
    if (!paths.csv.empty()) write_text_file(paths.csv, summary_csv(summary));

    if (!paths.json.empty()) {
        nlohmann::json j;
        j["meta"] = nlohmann::json::parse(summary.meta_json);
        nlohmann::json rows = nlohmann::json::array();
        for (const SummaryRow& r : summary.rows) rows.push_back(row_to_json(r));
        j["rows"] = std::move(rows);
        write_text_file(paths.json, j.dump(2) + "\n");
    }

    if (!paths.records.empty()) {
        std::ostringstream os;
        for (const EpisodeRecord& r : summary.records) {
            nlohmann::json j;
            j["attack"] = r.attack_label;
            j["epsilon"] = r.epsilon;
            j["m"] = r.m;
            j["episode"] = r.episode_index;
            j["seed"] = r.seed;
            j["return"] = r.total_return;
            j["length"] = r.length;
            j["max_pert_norm"] = r.max_pert_norm;
            j["victims"] = r.victims;
            os << j.dump() << '\n';
        }
        write_text_file(paths.records, os.str());
        write_text_file(paths.records + ".meta.json", summary.meta_json + "\n");
    }

    if (!paths.plot_data.empty()) write_text_file(paths.plot_data, plot_data_csv(summary));
}

MetricsSummary reaggregate_records(const std::string& records_path) {
    std::ifstream min(records_path + ".meta.json", std::ios::binary);
    if (!min) throw IoError("cannot open records sidecar", records_path + ".meta.json");
    std::stringstream meta_buf;
    meta_buf << min.rdbuf();
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed records sidecar (") + e.what() + ")",
                      records_path + ".meta.json");
    }

    MetricsSummary summary;
    summary.meta_json = meta.dump(2);

    std::ifstream in(records_path, std::ios::binary);
    if (!in) throw IoError("cannot open records file", records_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("malformed records line (") + e.what() + ")", records_path);
        }
        EpisodeRecord r;
        r.attack_label = j.at("attack").get<std::string>();
        r.epsilon = j.at("epsilon").get<double>();
        r.m = j.at("m").get<int>();
        r.episode_index = j.at("episode").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.total_return = j.at("return").get<double>();
        r.length = j.at("length").get<int>();
        r.max_pert_norm = j.at("max_pert_norm").get<double>();
        r.victims = j.at("victims").get<std::vector<int>>();
        summary.records.push_back(std::move(r));
    }

    const std::uint64_t master = meta.at("master_seed").get<std::uint64_t>();
    const int episodes = meta.at("episodes").get<int>();
    std::vector<double> epsilons = meta.at("epsilons").get<std::vector<double>>();

    auto group = [&](const std::string& label, double epsilon) {
        std::vector<const EpisodeRecord*> out;
        for (const auto& r : summary.records)
            if (r.attack_label == label && r.epsilon == epsilon) out.push_back(&r);
        return out;
    };
    auto group_m = [&](const std::vector<const EpisodeRecord*>& g) {
        return g.empty() ? 0 : g.front()->m;
    };

    const auto benign_group = group("none", 0.0);
    if (benign_group.empty()) throw IoError("records contain no benign episodes", records_path);
    const GroupStats benign = group_stats(benign_group, master, "none", 0);
    summary.rows.push_back(make_row("none", 0.0, 0, benign, benign, episodes, master));

    std::vector<std::string> random_labels =
        meta.at("random_labels").get<std::vector<std::string>>();
    struct RandomRowRef {
        std::size_t row_index;
        int eps_index;
    };
    std::vector<RandomRowRef> random_rows;
    for (const auto& a : meta.at("attacks")) {
        const std::string label = a.at("label").get<std::string>();
        const bool is_random =
            std::find(random_labels.begin(), random_labels.end(), label) != random_labels.end();
        for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
            const auto g = group(label, epsilons[ei]);
            if (g.empty()) throw IoError("records missing group " + label, records_path);
            const GroupStats stats = group_stats(g, master, label, static_cast<int>(ei) + 1);
            summary.rows.push_back(make_row(label, epsilons[ei], group_m(g), stats, benign,
                                            episodes, master));
            if (is_random) random_rows.push_back({summary.rows.size() - 1, static_cast<int>(ei)});
        }
    }
    if (random_labels.size() >= 2) {
        for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
            const SummaryRow* best = nullptr;
            for (const auto& ref : random_rows)
                if (ref.eps_index == static_cast<int>(ei)) {
                    const SummaryRow& row = summary.rows[ref.row_index];
                    if (!best || row.iqm < best->iqm) best = &row;
                }
            if (best) {
                SummaryRow row = *best;
                row.attack = "best_random";
                summary.rows.push_back(row);
            }
        }
    }
    return summary;
}

}  // namespace misalign::eval
