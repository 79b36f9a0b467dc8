// misalign: constrained observation attacks on cooperative multi-agent teams.
//
// Pipeline: `collect` benign observations -> `train-align` the reconstruction
// network -> `evaluate` an attack sweep -> `report` re-renders outputs from
// raw episode records. `ablate` drives the standard sweeps (data size, PGD
// iterations, victim count).

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "misalign/attacks.hpp"
#include "misalign/config.hpp"
#include "misalign/errors.hpp"
#include "misalign/experiment.hpp"
#include "misalign/log.hpp"
#include "misalign/metrics.hpp"
#include "misalign/policies.hpp"

namespace fs = std::filesystem;
using namespace misalign;

namespace {

struct GlobalFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> episodes;
    std::optional<int> jobs;
    std::optional<std::string> out;
};

cli::CliConfig load_config(const GlobalFlags& flags) {
    if (flags.config_path.empty()) throw ConfigError("missing --config", "config");
    cli::CliConfig cfg = cli::load_cli_config(flags.config_path);
    if (flags.seed) {
        cfg.sweep.master_seed = *flags.seed;
        cfg.collection.seed = *flags.seed;
        cfg.align_training.seed = *flags.seed;
    }
    if (flags.episodes) {
        if (*flags.episodes < 1) throw ConfigError("episodes must be >= 1", "--episodes");
        cfg.sweep.episodes = *flags.episodes;
    }
    if (flags.out) cfg.output_dir = *flags.out;
    return cfg;
}

std::string output_path(const cli::CliConfig& cfg, const std::string& name) {
    fs::path dir = cfg.resolve(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory", dir.string());
    return (dir / name).string();
}

// Artifacts referenced by a config resolve against the config's directory
// first, then against the output directory (where the pipeline writes them).
std::string artifact_path(const cli::CliConfig& cfg, const std::string& path) {
    const std::string beside_config = cfg.resolve(path);
    if (fs::path(path).is_absolute() || fs::exists(beside_config)) return beside_config;
    const fs::path in_output = fs::path(cfg.resolve(cfg.output_dir)) / path;
    if (fs::exists(in_output)) return in_output.string();
    return beside_config;  // let the loader report the primary location
}

std::shared_ptr<policy::Victim> build_victim(const cli::CliConfig& cfg) {
    if (!cfg.victim.neural)
        return std::make_shared<policy::Victim>(policy::ScriptedPolicy(cfg.env));
    policy::NeuralPolicy p = policy::load_policy(artifact_path(cfg, cfg.victim.path));
    if (p.d != cfg.env.obs_dim())
        throw ConfigError("victim policy dimension does not match the environment", "victim.path");
    return std::make_shared<policy::Victim>(std::move(p));
}

int effective_jobs(const GlobalFlags& flags) {
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    if (!flags.jobs) return hw;
    if (*flags.jobs < 1) throw ConfigError("jobs must be >= 1", "--jobs");
    return *flags.jobs;
}

eval::ExperimentConfig build_experiment(
    const cli::CliConfig& cfg, const GlobalFlags& flags,
    const std::map<std::string, std::shared_ptr<const attack::AlignModel>>* model_override =
        nullptr) {
    eval::ExperimentConfig exp;
    exp.env = cfg.env;
    exp.victim = build_victim(cfg);
    exp.epsilons = cfg.sweep.epsilons;
    exp.iterations = cfg.sweep.iterations;
    exp.alpha = cfg.sweep.alpha;
    exp.episodes = cfg.sweep.episodes;
    exp.master_seed = cfg.sweep.master_seed;
    exp.jobs = effective_jobs(flags);

    std::map<std::string, std::shared_ptr<const attack::AlignModel>> cache;
    for (const cli::AttackFileSpec& a : cfg.attacks) {
        eval::AttackSpec spec;
        spec.type = a.type;
        spec.m = a.m;
        spec.random_kind = a.random_kind;
        if (!a.model.empty()) {
            const std::string path = artifact_path(cfg, a.model);
            spec.model_path = a.model;
            if (model_override && model_override->count(a.model)) {
                spec.model = model_override->at(a.model);
            } else if (cache.count(path)) {
                spec.model = cache.at(path);
            } else {
                auto model =
                    std::make_shared<const attack::AlignModel>(attack::load_align_model(path));
                cache[path] = model;
                spec.model = model;
            }
        }
        exp.attacks.push_back(std::move(spec));
    }
    return exp;
}

void write_all_reports(const eval::MetricsSummary& summary, const cli::CliConfig& cfg) {
    eval::ReportPaths paths;
    paths.csv = output_path(cfg, "report.csv");
    paths.json = output_path(cfg, "report.json");
    paths.records = output_path(cfg, "records.jsonl");
    paths.plot_data = output_path(cfg, "plot_data.csv");
    eval::write_report(summary, paths);
    std::cout << "report " << paths.csv << "\n";
    std::cout << "rows " << summary.rows.size() << "\n";
}

int cmd_collect(const GlobalFlags& flags) {
    cli::CliConfig cfg = load_config(flags);
    auto victim = build_victim(cfg);
    log_info("collecting " + std::to_string(cfg.collection.t_c) + " benign transitions");
    attack::ObservationDataset ds =
        attack::collect_observations(cfg.env, *victim, cfg.collection.t_c, cfg.collection.seed);
    const std::string path = output_path(cfg, "dataset.jsonl");
    attack::save_dataset(ds, path);
    std::cout << "dataset " << path << "\n";
    std::cout << "length " << ds.observations.size() << "\n";
    return 0;
}

int cmd_train_align(const GlobalFlags& flags, const std::string& dataset_arg) {
    cli::CliConfig cfg = load_config(flags);
    const std::string dataset_path =
        dataset_arg.empty() ? output_path(cfg, "dataset.jsonl") : artifact_path(cfg, dataset_arg);
    attack::ObservationDataset ds = attack::load_dataset(dataset_path);
    if (ds.n != cfg.env.n_agents || ds.d != cfg.env.obs_dim())
        throw ContractError("dataset (n, d) does not match the configured environment");
    log_info("training alignment network for " + std::to_string(cfg.align_training.epochs) +
             " epochs on " + std::to_string(ds.observations.size()) + " samples");
    attack::AlignModel model = attack::train_align_model(ds, cfg.align_training);
    const std::string path = output_path(cfg, "align_model.json");
    attack::save_align_model(model, path);
    std::cout << "model " << path << "\n";
    std::cout << "final_mse " << eval::format_double(model.final_loss()) << "\n";
    return 0;
}

int cmd_evaluate(const GlobalFlags& flags) {
    cli::CliConfig cfg = load_config(flags);
    eval::ExperimentConfig exp = build_experiment(cfg, flags);
    exp.validate();
    log_info("running sweep: " + std::to_string(exp.attacks.size()) + " attacks x " +
             std::to_string(exp.epsilons.size()) + " epsilons x " +
             std::to_string(exp.episodes) + " episodes");
    eval::MetricsSummary summary = eval::run_experiment(exp);
    write_all_reports(summary, cfg);
    return 0;
}

int cmd_report(const GlobalFlags& flags) {
    cli::CliConfig cfg = load_config(flags);
    const std::string records = output_path(cfg, "records.jsonl");
    eval::MetricsSummary summary = eval::reaggregate_records(records);
    eval::ReportPaths paths;
    paths.csv = output_path(cfg, "report.csv");
    paths.json = output_path(cfg, "report.json");
    paths.plot_data = output_path(cfg, "plot_data.csv");
    eval::write_report(summary, paths);
    std::cout << "report " << paths.csv << "\n";
    std::cout << "rows " << summary.rows.size() << "\n";
    return 0;
}

struct AblatePoint {
    std::string dir_name;
    std::string value;
};

int cmd_ablate(const GlobalFlags& flags, const std::string& axis) {
    cli::CliConfig cfg = load_config(flags);

    struct RowOut {
        std::string value;
        eval::SummaryRow row;
    };
    std::vector<RowOut> combined;
    struct AggOut {
        std::string value;
        std::string attack;
        double mean_drop;
    };
    std::vector<AggOut> aggregate;

    auto run_point = [&](const cli::CliConfig& point_cfg, const std::string& value,
                         const std::map<std::string, std::shared_ptr<const attack::AlignModel>>*
                             models) {
        eval::ExperimentConfig exp = build_experiment(point_cfg, flags, models);
        exp.validate();
        eval::MetricsSummary summary = eval::run_experiment(exp);
        eval::ReportPaths paths;
        paths.csv = output_path(point_cfg, "report.csv");
        paths.json = output_path(point_cfg, "report.json");
        paths.records = output_path(point_cfg, "records.jsonl");
        paths.plot_data = output_path(point_cfg, "plot_data.csv");
        eval::write_report(summary, paths);
        std::map<std::string, std::pair<double, int>> drops;
        for (const auto& row : summary.rows) {
            combined.push_back({value, row});
            if (row.attack != "none") {
                drops[row.attack].first += row.drop_pct;
                drops[row.attack].second += 1;
            }
        }
        for (const auto& [name, acc] : drops)
            aggregate.push_back({value, name, acc.first / acc.second});
        std::cout << "point " << value << " done\n";
    };

    const fs::path base = fs::path(cfg.resolve(cfg.output_dir)) / ("ablate_" + axis);

    if (axis == "data_size") {
        bool has_model_attack = false;
        for (const auto& a : cfg.attacks)
            if (!a.model.empty()) has_model_attack = true;
        if (!has_model_attack)
            throw ConfigError("data_size ablation needs an align-based attack in 'attacks'",
                              "attacks");
        for (int t_c : {1000, 5000, 10000, 50000}) {
            cli::CliConfig point = cfg;
            point.output_dir = (base / ("tc_" + std::to_string(t_c))).string();
            auto victim = build_victim(cfg);
            attack::ObservationDataset ds =
                attack::collect_observations(cfg.env, *victim, t_c, cfg.collection.seed);
            auto model = std::make_shared<const attack::AlignModel>(
                attack::train_align_model(ds, cfg.align_training));
            std::map<std::string, std::shared_ptr<const attack::AlignModel>> models;
            for (const auto& a : cfg.attacks)
                if (!a.model.empty()) models[a.model] = model;
            run_point(point, std::to_string(t_c), &models);
        }
    } else if (axis == "K") {
        for (int k : {1, 5, 10}) {
            cli::CliConfig point = cfg;
            point.sweep.iterations = k;
            point.output_dir = (base / ("k_" + std::to_string(k))).string();
            run_point(point, std::to_string(k), nullptr);
        }
    } else if (axis == "victims") {
        for (int m = cfg.env.n_agents; m >= 1; --m) {
            cli::CliConfig point = cfg;
            for (auto& a : point.attacks)
                if (a.type == eval::AttackType::Align || a.type == eval::AttackType::Hadamard ||
                    a.type == eval::AttackType::TargetedHadamard)
                    a.m = m;
            point.output_dir = (base / ("m_" + std::to_string(m))).string();
            run_point(point, std::to_string(m), nullptr);
        }
    } else {
        throw ConfigError("axis must be one of data_size, K, victims", "--axis");
    }

    std::error_code ec;
    fs::create_directories(base, ec);
    if (ec) throw IoError("cannot create ablation directory", base.string());

    std::ostringstream os;
    os << "axis,value,attack,epsilon,m,iqm,ci_low,ci_high,drop_pct,mean_len,len_increase_pct,"
          "episodes,seed\n";
    for (const auto& r : combined) {
        os << axis << ',' << r.value << ',' << r.row.attack << ','
           << eval::format_double(r.row.epsilon) << ',' << r.row.m << ','
           << eval::format_double(r.row.iqm) << ',' << eval::format_double(r.row.ci_low) << ','
           << eval::format_double(r.row.ci_high) << ',' << eval::format_double(r.row.drop_pct)
           << ',' << eval::format_double(r.row.mean_len) << ','
           << eval::format_double(r.row.len_increase_pct) << ',' << r.row.episodes << ','
           << r.row.seed << '\n';
    }
    {
        std::ofstream out(base / "combined.csv", std::ios::binary);
        if (!out) throw IoError("cannot write combined CSV", (base / "combined.csv").string());
        out << os.str();
    }

    // Mean drop across the epsilon sweep, per attack and axis point.
    std::ostringstream agg;
    agg << "axis,value,attack,mean_drop_pct_across_eps\n";
    for (const auto& a : aggregate)
        agg << axis << ',' << a.value << ',' << a.attack << ','
            << eval::format_double(a.mean_drop) << '\n';
    {
        std::ofstream out(base / "aggregate.csv", std::ios::binary);
        if (!out) throw IoError("cannot write aggregate CSV", (base / "aggregate.csv").string());
        out << agg.str();
    }
    std::cout << "combined " << (base / "combined.csv").string() << "\n";
    return 0;
}

int error_exit(const std::string& type, const std::string& message, const std::string& path,
               int code) {
    nlohmann::json j;
    j["error"]["type"] = type;
    j["error"]["message"] = message;
    if (!path.empty()) j["error"]["path"] = path;
    std::cerr << j.dump() << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained black-box observation attacks on cooperative multi-agent teams"};
    app.require_subcommand(1);

    GlobalFlags flags;
    std::string dataset_arg;
    std::string axis;

    auto add_common = [&](CLI::App* sub, bool with_eval_flags) {
        sub->add_option("--config", flags.config_path, "Experiment config JSON");
        sub->add_option("--seed", flags.seed, "Override every seed in the config");
        sub->add_option("--out", flags.out, "Override output_dir");
        if (with_eval_flags) {
            sub->add_option("--episodes", flags.episodes, "Override sweep.episodes");
            sub->add_option("--jobs", flags.jobs, "Worker thread cap");
        }
    };

    CLI::App* collect = app.add_subcommand("collect", "Record benign observations to a dataset");
    add_common(collect, false);

    CLI::App* train = app.add_subcommand("train-align", "Train the alignment network");
    add_common(train, false);
    train->add_option("--dataset", dataset_arg, "Dataset path (default: <out>/dataset.jsonl)");

    CLI::App* evaluate = app.add_subcommand("evaluate", "Run the attack sweep and write reports");
    add_common(evaluate, true);

    CLI::App* ablate = app.add_subcommand("ablate", "Sweep one experimental axis");
    add_common(ablate, true);
    ablate->add_option("--axis", axis, "One of: data_size, K, victims")->required();

    CLI::App* report = app.add_subcommand("report", "Re-render reports from raw records");
    add_common(report, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (collect->parsed()) return cmd_collect(flags);
        if (train->parsed()) return cmd_train_align(flags, dataset_arg);
        if (evaluate->parsed()) return cmd_evaluate(flags);
        if (ablate->parsed()) return cmd_ablate(flags, axis);
        if (report->parsed()) return cmd_report(flags);
    } catch (const ConfigError& e) {
        return error_exit("config", e.what(), e.field_path(), 2);
    } catch (const IoError& e) {
        return error_exit("io", e.what(), e.path(), 3);
    } catch (const ContractError& e) {
        return error_exit("contract", e.what(), "", 4);
    } catch (const UnsupportedError& e) {
        return error_exit("unsupported", e.what(), "", 5);
    } catch (const std::exception& e) {
        return error_exit("internal", e.what(), "", 1);
    }
    return 0;
}
