#include "misalign/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "misalign/errors.hpp"

namespace misalign::cli {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "'", where);
}

template <typename T>
T get_field(const json& obj, const std::string& key, const std::string& where, T fallback,
            bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw ConfigError("missing required key", where + "." + key);
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("wrong type", where + "." + key);
    }
}

env::GridConfig parse_env(const json& j) {
    reject_unknown_keys(j, {"width", "height", "n_agents", "n_foods", "cooperative",
                            "sight_radius", "max_steps", "level_min", "level_max"},
                        "env");
    env::GridConfig cfg;
    cfg.width = get_field<int>(j, "width", "env", cfg.width);
    cfg.height = get_field<int>(j, "height", "env", cfg.height);
    cfg.n_agents = get_field<int>(j, "n_agents", "env", cfg.n_agents);
    cfg.n_foods = get_field<int>(j, "n_foods", "env", cfg.n_foods);
    cfg.cooperative = get_field<bool>(j, "cooperative", "env", cfg.cooperative);
    if (j.contains("sight_radius") && !j.at("sight_radius").is_null())
        cfg.sight_radius = get_field<int>(j, "sight_radius", "env", 0);
    cfg.max_steps = get_field<int>(j, "max_steps", "env", cfg.max_steps);
    cfg.level_min = get_field<int>(j, "level_min", "env", cfg.level_min);
    cfg.level_max = get_field<int>(j, "level_max", "env", cfg.level_max);
    cfg.validate();
    return cfg;
}

VictimFileSpec parse_victim(const json& j) {
    reject_unknown_keys(j, {"type", "path"}, "victim");
    VictimFileSpec v;
    const std::string type = get_field<std::string>(j, "type", "victim", "scripted", true);
    if (type == "scripted") {
        v.neural = false;
        if (j.contains("path")) throw ConfigError("scripted victim takes no path", "victim.path");
    } else if (type == "neural") {
        v.neural = true;
        v.path = get_field<std::string>(j, "path", "victim", "", true);
    } else {
        throw ConfigError("must be 'scripted' or 'neural'", "victim.type");
    }
    return v;
}

AttackFileSpec parse_attack(const json& j, const std::string& where) {
    reject_unknown_keys(j, {"type", "m", "kind", "model"}, where);
    AttackFileSpec a;
    const std::string type = get_field<std::string>(j, "type", where, "", true);
    if (type == "align") a.type = eval::AttackType::Align;
    else if (type == "hadamard") a.type = eval::AttackType::Hadamard;
    else if (type == "targeted_hadamard") a.type = eval::AttackType::TargetedHadamard;
    else if (type == "random") a.type = eval::AttackType::Random;
    else if (type == "ou") a.type = eval::AttackType::Ou;
    else if (type == "whitebox") a.type = eval::AttackType::Whitebox;
    else throw ConfigError("unknown attack type '" + type + "'", where + ".type");

    a.m = get_field<int>(j, "m", where, 0);
    if (a.m < 0) throw ConfigError("m must be >= 0", where + ".m");

    if (a.type == eval::AttackType::Random) {
        const std::string kind = get_field<std::string>(j, "kind", where, "", true);
        if (kind == "uniform") a.random_kind = attack::RandomKind::Uniform;
        else if (kind == "normal") a.random_kind = attack::RandomKind::Normal;
        else if (kind == "exponential") a.random_kind = attack::RandomKind::Exponential;
        else throw ConfigError("unknown random kind '" + kind + "'", where + ".kind");
    } else if (j.contains("kind")) {
        throw ConfigError("kind is only valid for random attacks", where + ".kind");
    }

    const bool needs_model =
        a.type == eval::AttackType::Align || a.type == eval::AttackType::TargetedHadamard;
    if (needs_model)
        a.model = get_field<std::string>(j, "model", where, "", true);
    else if (j.contains("model"))
        throw ConfigError("model is only valid for align and targeted_hadamard", where + ".model");
    return a;
}

CollectionSection parse_collection(const json& j) {
    reject_unknown_keys(j, {"T_c", "seed"}, "collection");
    CollectionSection c;
    c.t_c = get_field<int>(j, "T_c", "collection", c.t_c);
    if (c.t_c < 1) throw ConfigError("T_c must be >= 1", "collection.T_c");
    c.seed = get_field<std::uint64_t>(j, "seed", "collection", c.seed);
    return c;
}

attack::AlignTrainConfig parse_align_training(const json& j) {
    reject_unknown_keys(j, {"epochs", "batch", "lr", "hidden_sizes", "seed"}, "align_training");
    attack::AlignTrainConfig t;
    t.epochs = get_field<int>(j, "epochs", "align_training", t.epochs);
    if (t.epochs < 0) throw ConfigError("epochs must be >= 0", "align_training.epochs");
    t.batch = get_field<int>(j, "batch", "align_training", t.batch);
    if (t.batch < 1) throw ConfigError("batch must be >= 1", "align_training.batch");
    t.lr = get_field<double>(j, "lr", "align_training", t.lr);
    if (t.lr <= 0) throw ConfigError("lr must be > 0", "align_training.lr");
    t.hidden_sizes = get_field<std::vector<int>>(j, "hidden_sizes", "align_training",
                                                 t.hidden_sizes);
    for (std::size_t i = 0; i < t.hidden_sizes.size(); ++i)
        if (t.hidden_sizes[i] < 1)
            throw ConfigError("must be >= 1",
                              "align_training.hidden_sizes[" + std::to_string(i) + "]");
    t.seed = get_field<std::uint64_t>(j, "seed", "align_training", t.seed);
    return t;
}

SweepSection parse_sweep(const json& j) {
    reject_unknown_keys(j, {"epsilons", "K", "alpha", "episodes", "master_seed"}, "sweep");
    SweepSection s;
    s.epsilons = get_field<std::vector<double>>(j, "epsilons", "sweep", {}, true);
    for (std::size_t i = 0; i < s.epsilons.size(); ++i)
        if (s.epsilons[i] <= 0.0)
            throw ConfigError("must be > 0 (benign row is implicit)",
                              "sweep.epsilons[" + std::to_string(i) + "]");
    s.iterations = get_field<int>(j, "K", "sweep", s.iterations);
    if (s.iterations < 1) throw ConfigError("K must be >= 1", "sweep.K");
    if (j.contains("alpha") && !j.at("alpha").is_null()) {
        s.alpha = get_field<double>(j, "alpha", "sweep", 0.0);
        if (*s.alpha <= 0.0) throw ConfigError("alpha must be > 0", "sweep.alpha");
    }
    s.episodes = get_field<int>(j, "episodes", "sweep", s.episodes);
    if (s.episodes < 1) throw ConfigError("episodes must be >= 1", "sweep.episodes");
    s.master_seed = get_field<std::uint64_t>(j, "master_seed", "sweep", s.master_seed);
    return s;
}

}  // namespace

std::string CliConfig::resolve(const std::string& path) const {
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

CliConfig parse_cli_config(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what(), "");
    }
    if (!j.is_object()) throw ConfigError("config root must be an object", "");
    reject_unknown_keys(j, {"env", "victim", "collection", "align_training", "attacks", "sweep",
                            "output_dir"},
                        "config");

    CliConfig cfg;
    cfg.base_dir = base_dir;
    if (j.contains("env")) cfg.env = parse_env(j.at("env"));
    else cfg.env.validate();
    if (j.contains("victim")) cfg.victim = parse_victim(j.at("victim"));
    if (j.contains("collection")) cfg.collection = parse_collection(j.at("collection"));
    if (j.contains("align_training")) cfg.align_training = parse_align_training(j.at("align_training"));
    if (j.contains("attacks")) {
        const json& arr = j.at("attacks");
        if (!arr.is_array()) throw ConfigError("must be an array", "attacks");
        for (std::size_t i = 0; i < arr.size(); ++i)
            cfg.attacks.push_back(parse_attack(arr[i], "attacks[" + std::to_string(i) + "]"));
    }
    if (j.contains("sweep")) cfg.sweep = parse_sweep(j.at("sweep"));
    cfg.output_dir = get_field<std::string>(j, "output_dir", "config", cfg.output_dir);

    for (std::size_t i = 0; i < cfg.attacks.size(); ++i) {
        if (cfg.attacks[i].m > cfg.env.n_agents)
            throw ConfigError("m exceeds n_agents", "attacks[" + std::to_string(i) + "].m");
    }
    return cfg;
}

CliConfig load_cli_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file", path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_cli_config(buf.str(),
                            std::filesystem::path(path).parent_path().string().empty()
                                ? "."
                                : std::filesystem::path(path).parent_path().string());
}

}  // namespace misalign::cli
