// Acceptance suite. Runs every release criterion end to end and prints one
// PASS/FAIL line per criterion. Exit status is the number of failures.
//
// Everything is pinned here: the reference task, the master seed, the
// training protocol, and every threshold. Rerunning this binary reproduces
// the numbers bit for bit.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "misalign/attacks.hpp"
#include "misalign/experiment.hpp"
#include "misalign/finite_diff.hpp"
#include "misalign/metrics.hpp"
#include "misalign/policies.hpp"

using namespace misalign;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kMasterSeed = 20250808;

int failures = 0;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int index, const std::string& name, bool ok, double secs,
            const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << index << ". " << name << "  ("
              << eval::format_double(secs) << "s)";
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << std::endl;
    if (!ok) ++failures;
}

env::GridConfig reference_task() {
    env::GridConfig cfg;
    cfg.width = 8;
    cfg.height = 8;
    cfg.n_agents = 3;
    cfg.n_foods = 2;
    cfg.cooperative = true;
    cfg.max_steps = 64;
    cfg.level_min = 1;
    cfg.level_max = 2;
    return cfg;
}

// Pinned training protocol for every alignment model in this suite.
attack::AlignTrainConfig acceptance_training(std::uint64_t seed) {
    attack::AlignTrainConfig train;
    train.epochs = 40;
    train.batch = 64;
    train.lr = 1e-3;
    train.hidden_sizes = {64, 64, 64};
    train.seed = seed;
    return train;
}

attack::AlignModel train_reference_model(int t_c, std::uint64_t seed) {
    env::GridConfig cfg = reference_task();
    policy::Victim victim{policy::ScriptedPolicy(cfg)};
    attack::ObservationDataset ds = attack::collect_observations(cfg, victim, t_c, seed);
    return attack::train_align_model(ds, acceptance_training(seed));
}

std::vector<env::JointObservation> rollout_observations(int count, std::uint64_t seed) {
    env::GridConfig cfg = reference_task();
    policy::Victim victim{policy::ScriptedPolicy(cfg)};
    return attack::collect_observations(cfg, victim, count, seed).observations;
}

eval::ExperimentConfig base_experiment(std::vector<double> epsilons, int episodes,
                                       std::uint64_t master_seed) {
    eval::ExperimentConfig cfg;
    cfg.env = reference_task();
    cfg.victim = std::make_shared<policy::Victim>(policy::ScriptedPolicy(cfg.env));
    cfg.epsilons = std::move(epsilons);
    cfg.iterations = 10;
    cfg.episodes = episodes;
    cfg.master_seed = master_seed;
    cfg.jobs = 2;
    return cfg;
}

const eval::SummaryRow* find_row(const eval::MetricsSummary& s, const std::string& attack,
                                 double eps) {
    for (const auto& row : s.rows)
        if (row.attack == attack && row.epsilon == eps) return &row;
    return nullptr;
}

// ---------------------------------------------------------------------------

void criterion_1_hadamard() {
    auto start = Clock::now();
    bool ok = true;
    std::string detail;

    // Exact pairwise orthogonality of every Sylvester order up to 1024,
    // checked with integer popcount arithmetic. Rows of any smaller n are a
    // prefix subset, so this covers every (n, d) pair.
    for (int dt = 1; dt <= 1024 && ok; dt *= 2) {
        num::Matrix h = attack::sylvester_hadamard(dt);
        const int words = (dt + 63) / 64;
        std::vector<std::uint64_t> bits(static_cast<std::size_t>(dt) * words, 0);
        for (int r = 0; r < dt; ++r)
            for (int c = 0; c < dt; ++c) {
                const double v = h(r, c);
                if (v != 1.0 && v != -1.0) ok = false;
                if (v == 1.0) bits[r * words + c / 64] |= (1ULL << (c % 64));
            }
        for (int i = 0; i < dt && ok; ++i)
            for (int j = i + 1; j < dt; ++j) {
                int disagree = 0;
                for (int w = 0; w < words; ++w)
                    disagree += std::popcount(bits[i * words + w] ^ bits[j * words + w]);
                if (dt - 2 * disagree != 0) {  // exact integer dot product
                    ok = false;
                    detail = "orthogonality broken at d_tilde=" + std::to_string(dt);
                    break;
                }
            }
    }

    // Scaled, padded perturbations for every d up to 1024: inf-norm exactly
    // epsilon, zero columns past d_tilde, float dot products exactly zero.
    const double eps = 0.25;
    for (int d = 1; d <= 1024 && ok; ++d) {
        const int dt = attack::hadamard_dim(d);
        const int n = std::min(8, dt);
        attack::Perturbation p = attack::hadamard_perturbation(n, d, eps);
        for (int r = 0; r < n && ok; ++r) {
            if (num::max_abs(p.delta.row(r)) != eps) ok = false;
            for (int c = 0; c < d; ++c) {
                const double v = p.delta(r, c);
                if (c < dt ? (std::abs(v) != eps) : (v != 0.0)) ok = false;
            }
        }
        for (int i = 0; i < n && ok; ++i)
            for (int j = i + 1; j < n; ++j)
                if (num::dot(p.delta.row(i), p.delta.row(j)) != 0.0) {
                    ok = false;
                    detail = "nonzero dot at d=" + std::to_string(d);
                }
    }

    // The n=3, d=10 layout: 8 active columns, 2 zero columns.
    attack::Perturbation fig = attack::hadamard_perturbation(3, 10, eps);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 8; ++c)
            if (std::abs(fig.delta(r, c)) != eps) ok = false;
        for (int c = 8; c < 10; ++c)
            if (fig.delta(r, c) != 0.0) ok = false;
    }

    const double secs = seconds_since(start);
    if (secs >= 1.0) {
        ok = false;
        detail = "runtime budget exceeded";
    }
    report(1, "hadamard exactness for all (n, d), d <= 1024", ok, secs, detail);
}

void criterion_2_gradients() {
    auto start = Clock::now();
    bool ok = true;
    std::string detail;
    num::SplitMix64 rng(777001);

    auto rel_error = [](std::span<const double> a, std::span<const double> b) {
        double diff = 0.0, norm = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            diff += (a[i] - b[i]) * (a[i] - b[i]);
            norm += b[i] * b[i];
        }
        return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
    };

    // Alignment-network side: gradient of the total alignment loss wrt the
    // full joint observation, against central finite differences.
    const env::GridConfig task = reference_task();
    for (int c = 0; c < 100 && ok; ++c) {
        attack::AlignModel model;
        model.n = task.n_agents;
        model.d = task.obs_dim();
        model.net = num::make_mlp({(model.n - 1) * model.d, 32, 32, model.d}, rng.next());
        env::JointObservation obs(model.n, model.d);
        for (std::size_t i = 0; i < obs.size(); ++i) obs.data()[i] = rng.uniform(-1.0, 1.0);

        num::Matrix analytic = attack::align_loss_gradient(model, obs);
        std::vector<double> flat(obs.data(), obs.data() + obs.size());
        auto f = [&](std::span<const double> x) {
            env::JointObservation o(obs.rows(), obs.cols());
            std::copy(x.begin(), x.end(), o.data());
            return attack::align_loss(model, o).total;
        };
        auto fd = num::finite_diff_gradient(f, flat, 1e-5);
        const double err =
            rel_error(std::span<const double>(analytic.data(), analytic.size()), fd);
        if (err >= 1e-4) {
            ok = false;
            detail = "align case " + std::to_string(c) + " rel err " + eval::format_double(err);
        }
    }

    // Policy side: gradient of the action probability wrt the observation row.
    for (int c = 0; c < 100 && ok; ++c) {
        policy::NeuralPolicy pol;
        pol.d = task.obs_dim();
        pol.net = num::make_mlp({pol.d, 32, 32, env::kActionCount}, rng.next());
        std::vector<double> row(pol.d);
        for (double& v : row) v = rng.uniform(-1.0, 1.0);
        const env::Action action = static_cast<env::Action>(rng.below(env::kActionCount));
        auto [prob, grad] = policy::policy_prob_and_grad(pol, row, action);
        auto f = [&](std::span<const double> x) {
            return policy::action_probabilities(pol, x)[static_cast<int>(action)];
        };
        auto fd = num::finite_diff_gradient(f, row, 1e-5);
        const double err = rel_error(grad, fd);
        if (err >= 1e-4) {
            ok = false;
            detail = "policy case " + std::to_string(c) + " rel err " + eval::format_double(err);
        }
    }

    const double secs = seconds_since(start);
    if (secs >= 30.0) {
        ok = false;
        detail = "runtime budget exceeded";
    }
    report(2, "gradient fidelity vs finite differences (100 + 100 cases)", ok, secs, detail);
}

void criterion_3_pgd_contract(const attack::AlignModel& model) {
    auto start = Clock::now();
    bool ok = true;
    std::string detail;

    auto observations = rollout_observations(200, 779101);
    const attack::AttackBudget budget{0.1, 10, {}, -1.0, 1.0};
    const attack::AttackBudget fgsm_budget{0.1, 1, {}, -1.0, 1.0};
    int improved = 0;
    for (const auto& obs : observations) {
        attack::Perturbation p = attack::pgd_align_perturb(model, obs, budget);
        for (std::size_t r = 0; r < obs.rows(); ++r) {
            if (num::max_abs(p.delta.row(r)) > budget.epsilon) ok = false;
            for (std::size_t c = 0; c < obs.cols(); ++c) {
                const double v = obs(r, c) + p.delta(r, c);
                if (v < -1.0 || v > 1.0) ok = false;
            }
        }

        env::JointObservation perturbed = obs;
        for (std::size_t i = 0; i < perturbed.size(); ++i)
            perturbed.data()[i] += p.delta.data()[i];
        if (attack::align_loss(model, perturbed).total > attack::align_loss(model, obs).total)
            ++improved;

        // K=1 must reproduce the one-shot sign step after domain clipping.
        attack::Perturbation single = attack::pgd_align_perturb(model, obs, fgsm_budget);
        num::Matrix g = attack::align_loss_gradient(model, obs);
        for (std::size_t r = 0; r < obs.rows() && ok; ++r)
            for (std::size_t c = 0; c < obs.cols(); ++c) {
                const double s = g(r, c) > 0 ? 1.0 : (g(r, c) < 0 ? -1.0 : 0.0);
                double expected = fgsm_budget.epsilon * s;
                const double v = obs(r, c) + expected;
                if (v < -1.0 || v > 1.0) expected = std::clamp(v, -1.0, 1.0) - obs(r, c);
                if (single.delta(r, c) != expected) {
                    ok = false;
                    detail = "K=1 mismatch vs sign formula";
                    break;
                }
            }
    }
    const double improve_rate = improved / 200.0;
    if (improve_rate < 0.95) {
        ok = false;
        detail = "loss increased in only " + eval::format_double(100.0 * improve_rate) + "%";
    }
    report(3, "pgd contract: budget, domain, K=1 FGSM, >=95% loss increase", ok,
           seconds_since(start),
           detail.empty() ? "loss up in " + eval::format_double(100.0 * improve_rate) + "%"
                          : detail);
}

void criterion_4_effectiveness(std::shared_ptr<const attack::AlignModel> model) {
    auto start = Clock::now();
    bool ok = true;
    std::string detail;

    eval::ExperimentConfig cfg = base_experiment({0.1, 0.15, 0.2}, 50, kMasterSeed);
    eval::AttackSpec align;
    align.type = eval::AttackType::Align;
    align.model = model;
    eval::AttackSpec hadamard;
    hadamard.type = eval::AttackType::Hadamard;
    eval::AttackSpec u{eval::AttackType::Random};
    u.random_kind = attack::RandomKind::Uniform;
    eval::AttackSpec nrm{eval::AttackType::Random};
    nrm.random_kind = attack::RandomKind::Normal;
    eval::AttackSpec expo{eval::AttackType::Random};
    expo.random_kind = attack::RandomKind::Exponential;
    eval::AttackSpec ou{eval::AttackType::Ou};
    cfg.attacks = {align, hadamard, u, nrm, expo, ou};

    eval::MetricsSummary summary = eval::run_experiment(cfg);

    const eval::SummaryRow* benign = find_row(summary, "none", 0.0);
    std::ostringstream numbers;
    numbers << "benign=" << eval::format_double(benign->iqm);

    // (a) benign competence.
    if (benign->iqm < 0.95) {
        ok = false;
        detail = "benign IQM " + eval::format_double(benign->iqm);
    }
    // (b) align halves the return at epsilon 0.2.
    const eval::SummaryRow* align02 = find_row(summary, "align", 0.2);
    numbers << " align@0.2=" << eval::format_double(align02->iqm);
    if (align02->iqm > 0.5 * benign->iqm) {
        ok = false;
        detail = "align@0.2 IQM " + eval::format_double(align02->iqm);
    }
    // (c) align and hadamard dominate the best random baseline pointwise.
    for (double eps : cfg.epsilons) {
        const eval::SummaryRow* best = find_row(summary, "best_random", eps);
        for (const char* name : {"align", "hadamard"}) {
            const eval::SummaryRow* row = find_row(summary, name, eps);
            if (row->iqm > best->iqm + 1e-12) {
                ok = false;
                detail = std::string(name) + "@" + eval::format_double(eps) + " IQM " +
                         eval::format_double(row->iqm) + " > best_random " +
                         eval::format_double(best->iqm);
            }
        }
    }
    // (d) monotone decay in epsilon, up to CI width.
    for (const char* name : {"align", "hadamard"}) {
        double prev_iqm = benign->iqm;
        double prev_width = benign->ci_high - benign->ci_low;
        for (double eps : cfg.epsilons) {
            const eval::SummaryRow* row = find_row(summary, name, eps);
            const double width = row->ci_high - row->ci_low;
            if (row->iqm > prev_iqm + std::max(prev_width, width) + 1e-9) {
                ok = false;
                detail = std::string(name) + " IQM rises at eps " + eval::format_double(eps);
            }
            prev_iqm = row->iqm;
            prev_width = width;
        }
    }

    const double secs = seconds_since(start);
    if (secs >= 300.0) {
        ok = false;
        detail = "runtime budget exceeded";
    }
    report(4, "attack effectiveness trends on the reference task", ok, secs,
           detail.empty() ? numbers.str() : detail);
}

void criterion_5_data_efficiency() {
    auto start = Clock::now();
    bool ok = true;

    auto drop_for = [&](int t_c) {
        auto model = std::make_shared<const attack::AlignModel>(train_reference_model(t_c, 3001));
        eval::ExperimentConfig cfg = base_experiment({0.2}, 50, kMasterSeed);
        eval::AttackSpec align;
        align.type = eval::AttackType::Align;
        align.model = model;
        cfg.attacks = {align};
        eval::MetricsSummary summary = eval::run_experiment(cfg);
        return find_row(summary, "align", 0.2)->drop_pct;
    };

    const double drop_1k = drop_for(1000);
    const double drop_10k = drop_for(10000);
    const double gap = std::abs(drop_1k - drop_10k);
    if (gap > 10.0) ok = false;

    const double secs = seconds_since(start);
    std::string detail = "drop@1k=" + eval::format_double(drop_1k) +
                         "% drop@10k=" + eval::format_double(drop_10k) + "%";
    if (secs >= 600.0) {
        ok = false;
        detail = "runtime budget exceeded";
    }
    report(5, "data efficiency: T_c=1000 within 10pp of T_c=10000", ok, secs, detail);
}

void criterion_6_fgsm(std::shared_ptr<const attack::AlignModel> model) {
    auto start = Clock::now();
    bool ok = true;

    auto drop_for = [&](int k) {
        eval::ExperimentConfig cfg = base_experiment({0.2}, 50, kMasterSeed);
        cfg.iterations = k;
        eval::AttackSpec align;
        align.type = eval::AttackType::Align;
        align.model = model;
        cfg.attacks = {align};
        eval::MetricsSummary summary = eval::run_experiment(cfg);
        return find_row(summary, "align", 0.2)->drop_pct;
    };

    const double drop_k1 = drop_for(1);
    const double drop_k10 = drop_for(10);
    // Drops are negative percentages; compare magnitudes of actual damage.
    const double damage_k1 = std::max(0.0, -drop_k1);
    const double damage_k10 = std::max(0.0, -drop_k10);
    if (damage_k1 < 0.7 * damage_k10) ok = false;

    report(6, "FGSM sufficiency: K=1 keeps >=70% of the K=10 drop", ok, seconds_since(start),
           "drop@K1=" + eval::format_double(drop_k1) + "% drop@K10=" +
               eval::format_double(drop_k10) + "%");
}

void criterion_7_targeted(std::shared_ptr<const attack::AlignModel> model) {
    auto start = Clock::now();
    bool ok = true;

    const double eps = 0.15;
    const int m = reference_task().n_agents - 1;  // m = n - 1 = 2
    double mean_gain = 0.0;
    const std::vector<std::uint64_t> seeds{21, 22, 23, 24, 25};
    for (std::uint64_t seed : seeds) {
        eval::ExperimentConfig cfg = base_experiment({eps}, 50, seed);
        eval::AttackSpec targeted;
        targeted.type = eval::AttackType::TargetedHadamard;
        targeted.model = model;
        targeted.m = m;
        eval::AttackSpec random_sel;
        random_sel.type = eval::AttackType::Hadamard;
        random_sel.m = m;
        cfg.attacks = {targeted, random_sel};
        eval::MetricsSummary summary = eval::run_experiment(cfg);
        const double targeted_iqm = find_row(summary, "targeted_hadamard_m2", eps)->iqm;
        const double random_iqm = find_row(summary, "hadamard_m2", eps)->iqm;
        mean_gain += targeted_iqm - random_iqm;
    }
    mean_gain /= static_cast<double>(seeds.size());
    if (mean_gain > 0.0) ok = false;

    report(7, "targeted Hadamard: align selection at least as strong as random", ok,
           seconds_since(start), "mean IQM gain=" + eval::format_double(mean_gain));
}

void criterion_8_metric_oracles() {
    auto start = Clock::now();
    bool ok = true;
    std::string detail;

    // IQM of 1..8.
    if (eval::iqm({1, 2, 3, 4, 5, 6, 7, 8}) != 4.5) {
        ok = false;
        detail = "iqm(1..8)";
    }

    // Brute-force oracle on 1000 random lists.
    num::SplitMix64 rng(880001);
    for (int rep = 0; rep < 1000 && ok; ++rep) {
        const std::size_t len = 1 + rng.below(100);
        std::vector<double> v(len);
        for (double& x : v) x = rng.uniform(-5.0, 5.0);
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t cut = sorted.size() / 4;
        double sum = 0.0;
        for (std::size_t i = cut; i < sorted.size() - cut; ++i) sum += sorted[i];
        const double oracle = sum / static_cast<double>(sorted.size() - 2 * cut);
        if (std::abs(eval::iqm(v) - oracle) > 1e-12) {
            ok = false;
            detail = "iqm oracle mismatch";
        }
    }

    // Exponential design point: P(X <= eps) = 0.99 +/- 0.001 before clipping.
    const double eps = 0.1;
    const double lambda = attack::exponential_rate(eps);
    if (std::abs(lambda - 46.0517) > 1e-3) {
        ok = false;
        detail = "lambda(0.1)=" + eval::format_double(lambda);
    }
    int within = 0;
    const int draws = 1000000;
    num::SplitMix64 erng(880002);
    for (int i = 0; i < draws; ++i)
        if (-std::log(1.0 - erng.next_unit()) / lambda <= eps) ++within;
    const double frac = static_cast<double>(within) / draws;
    if (std::abs(frac - 0.99) > 0.001) {
        ok = false;
        detail = "P(X<=eps)=" + eval::format_double(frac);
    }

    report(8, "metric oracles: IQM, bootstrap inputs, exponential design", ok,
           seconds_since(start), detail.empty() ? "lambda=" + eval::format_double(lambda) : detail);
}

void criterion_9_determinism(std::shared_ptr<const attack::AlignModel> model) {
    auto start = Clock::now();
    bool ok = true;
    std::string detail;

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    const fs::path dir = fs::temp_directory_path() / "misalign_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);

    // Library-level: same sweep under different job counts.
    {
        eval::ExperimentConfig cfg = base_experiment({0.1, 0.2}, 6, kMasterSeed);
        eval::AttackSpec align;
        align.type = eval::AttackType::Align;
        align.model = model;
        eval::AttackSpec hadamard;
        hadamard.type = eval::AttackType::Hadamard;
        eval::AttackSpec u{eval::AttackType::Random};
        u.random_kind = attack::RandomKind::Uniform;
        eval::AttackSpec ou{eval::AttackType::Ou};
        cfg.attacks = {align, hadamard, u, ou};

        cfg.jobs = 2;
        eval::MetricsSummary a = eval::run_experiment(cfg);
        cfg.jobs = 1;
        eval::MetricsSummary b = eval::run_experiment(cfg);
        eval::ReportPaths pa{(dir / "a.csv").string(), "", "", ""};
        eval::ReportPaths pb{(dir / "b.csv").string(), "", "", ""};
        eval::write_report(a, pa);
        eval::write_report(b, pb);
        if (slurp(dir / "a.csv") != slurp(dir / "b.csv")) {
            ok = false;
            detail = "library-level CSVs differ across job counts";
        }
    }

    // CLI-level: `evaluate` twice, --jobs 2 then --jobs 1.
    const char* cli = std::getenv("MISALIGN_CLI_BIN");
    if (cli && *cli) {
        const fs::path model_path = dir / "align_model.json";
        attack::save_align_model(*model, model_path.string());
        const fs::path cfg_path = dir / "config.json";
        {
            std::ofstream out(cfg_path);
            out << R"({
  "env": {"width": 8, "height": 8, "n_agents": 3, "n_foods": 2,
          "cooperative": true, "max_steps": 64, "level_min": 1, "level_max": 2},
  "attacks": [{"type": "align", "model": "align_model.json"},
              {"type": "hadamard"},
              {"type": "random", "kind": "uniform"},
              {"type": "ou"}],
  "sweep": {"epsilons": [0.1, 0.2], "episodes": 6, "master_seed": 20250808},
  "output_dir": "run1"
})";
        }
        auto run_cli = [&](const std::string& args) {
            const std::string cmd = std::string(cli) + " " + args + " >" +
                                    (dir / "cli_out.txt").string() + " 2>" +
                                    (dir / "cli_err.txt").string();
            return std::system(cmd.c_str());
        };
        int s1 = run_cli("evaluate --config " + cfg_path.string() + " --jobs 2");
        const std::string run1 = slurp(dir / "run1" / "report.csv");
        int s2 = run_cli("evaluate --config " + cfg_path.string() + " --jobs 1 --out " +
                         (dir / "run2").string());
        const std::string run2 = slurp(dir / "run2" / "report.csv");
        if (s1 != 0 || s2 != 0 || run1.empty() || run1 != run2) {
            ok = false;
            detail = "CLI report CSVs differ or evaluate failed";
        }
    } else {
        detail = "CLI binary not provided; library-level check only";
    }

    fs::remove_all(dir);
    report(9, "determinism: byte-identical reports, jobs > 1 included", ok,
           seconds_since(start), detail);
}

}  // namespace

int main() {
    std::cout << "misalign acceptance suite (master seed " << kMasterSeed << ")" << std::endl;

    criterion_1_hadamard();
    criterion_2_gradients();

    auto setup_start = Clock::now();
    auto model =
        std::make_shared<const attack::AlignModel>(train_reference_model(5000, 1001));
    std::cout << "setup: reference alignment model (T_c=5000, 40 epochs) trained in "
              << eval::format_double(seconds_since(setup_start)) << "s, final loss "
              << eval::format_double(model->final_loss()) << std::endl;

    criterion_3_pgd_contract(*model);
    criterion_4_effectiveness(model);
    criterion_5_data_efficiency();
    criterion_6_fgsm(model);
    criterion_7_targeted(model);
    criterion_8_metric_oracles();
    criterion_9_determinism(model);

    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << std::endl;
    return failures;
}
