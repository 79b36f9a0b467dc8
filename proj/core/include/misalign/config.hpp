#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "misalign/attacks.hpp"
#include "misalign/experiment.hpp"
#include "misalign/forage_env.hpp"

namespace misalign::cli {

struct VictimFileSpec {
    bool neural = false;
    std::string path;  // policy file when neural
};

struct AttackFileSpec {
    eval::AttackType type = eval::AttackType::None;
    int m = 0;  // 0 = all agents
    attack::RandomKind random_kind = attack::RandomKind::Uniform;
    std::string model;  // alignment model path, when needed
};

struct CollectionSection {
    int t_c = 5000;
    std::uint64_t seed = 0;
};

struct SweepSection {
    std::vector<double> epsilons;
    int iterations = 10;  // K
    std::optional<double> alpha;
    int episodes = 50;
    std::uint64_t master_seed = 0;
};

// Parsed, schema-checked experiment file. Unknown keys anywhere are errors;
// violations are reported with their field path before any computation.
struct CliConfig {
    env::GridConfig env;
    VictimFileSpec victim;
    CollectionSection collection;
    attack::AlignTrainConfig align_training;
    std::vector<AttackFileSpec> attacks;
    SweepSection sweep;
    std::string output_dir = "out";

    // Directory of the config file; relative artifact paths resolve here.
    std::string base_dir = ".";

    std::string resolve(const std::string& path) const;
};

CliConfig load_cli_config(const std::string& path);
CliConfig parse_cli_config(const std::string& text, const std::string& base_dir = ".");

}  // namespace misalign::cli
