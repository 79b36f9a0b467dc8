#include <doctest.h>

#include <functional>

#include "misalign/config.hpp"
#include "misalign/errors.hpp"

using namespace misalign;

namespace {

std::string check_field_path(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.field_path();
    }
    return "<no error>";
}

}  // namespace

TEST_SUITE("cli-config") {

TEST_CASE("defaults mirror the standard protocol") {
    cli::CliConfig cfg = cli::parse_cli_config("{}");
    CHECK(cfg.collection.t_c == 5000);
    CHECK(cfg.sweep.iterations == 10);
    CHECK_FALSE(cfg.sweep.alpha.has_value());  // alpha = epsilon / K
    CHECK(cfg.sweep.episodes == 50);
    CHECK(cfg.align_training.epochs == 100);
    CHECK(cfg.align_training.batch == 64);
    CHECK(cfg.align_training.lr == 1e-4);
    CHECK(cfg.align_training.hidden_sizes == std::vector<int>{256, 256, 256});
    CHECK_FALSE(cfg.victim.neural);
    CHECK(cfg.env.width == 8);
}

TEST_CASE("a full config parses into the right shapes") {
    const char* text = R"({
      "env": {"width": 10, "height": 10, "n_agents": 4, "n_foods": 2,
              "cooperative": true, "sight_radius": 2, "max_steps": 96,
              "level_min": 1, "level_max": 2},
      "victim": {"type": "scripted"},
      "collection": {"T_c": 1000, "seed": 3},
      "align_training": {"epochs": 40, "batch": 32, "lr": 0.001,
                         "hidden_sizes": [64, 64], "seed": 4},
      "attacks": [
        {"type": "align", "model": "out/align_model.json"},
        {"type": "align", "model": "out/align_model.json", "m": 2},
        {"type": "hadamard"},
        {"type": "targeted_hadamard", "model": "out/align_model.json", "m": 3},
        {"type": "random", "kind": "uniform"},
        {"type": "random", "kind": "exponential"},
        {"type": "ou"},
        {"type": "whitebox"}
      ],
      "sweep": {"epsilons": [0.1, 0.15], "K": 5, "episodes": 10, "master_seed": 99},
      "output_dir": "results"
    })";
    cli::CliConfig cfg = cli::parse_cli_config(text, "/base");
    CHECK(cfg.env.n_agents == 4);
    CHECK(cfg.env.sight_radius.value() == 2);
    CHECK(cfg.attacks.size() == 8);
    CHECK(cfg.attacks[1].m == 2);
    CHECK(cfg.attacks[5].random_kind == attack::RandomKind::Exponential);
    CHECK(cfg.sweep.epsilons == std::vector<double>{0.1, 0.15});
    CHECK(cfg.sweep.master_seed == 99);
    CHECK(cfg.output_dir == "results");
    CHECK(cfg.resolve("out/x.json") == "/base/out/x.json");
    CHECK(cfg.resolve("/abs/x.json") == "/abs/x.json");
}

TEST_CASE("unknown keys are rejected with their location") {
    CHECK(check_field_path([] { cli::parse_cli_config(R"({"unknown": 1})"); }) == "config");
    CHECK(check_field_path([] { cli::parse_cli_config(R"({"env": {"wdth": 8}})"); }) == "env");
    CHECK(check_field_path(
              [] { cli::parse_cli_config(R"({"sweep": {"epsilons": [0.1], "k": 3}})"); }) ==
          "sweep");
}

TEST_CASE("schema violations carry exact field paths") {
    CHECK(check_field_path([] {
              cli::parse_cli_config(R"({"sweep": {"epsilons": [0.1, 0.0, 0.2]}})");
          }) == "sweep.epsilons[1]");
    CHECK(check_field_path([] {
              cli::parse_cli_config(R"({"sweep": {"epsilons": [-0.1]}})");
          }) == "sweep.epsilons[0]");
    CHECK(check_field_path([] { cli::parse_cli_config(R"({"collection": {"T_c": 0}})"); }) ==
          "collection.T_c");
    CHECK(check_field_path([] {
              cli::parse_cli_config(R"({"align_training": {"lr": -1.0}})");
          }) == "align_training.lr");
    CHECK(check_field_path([] {
              cli::parse_cli_config(R"({"attacks": [{"type": "align"}]})");
          }) == "attacks[0].model");
    CHECK(check_field_path([] {
              cli::parse_cli_config(R"({"attacks": [{"type": "random"}]})");
          }) == "attacks[0].kind");
    CHECK(check_field_path([] {
              cli::parse_cli_config(R"({"attacks": [{"type": "sharknado"}]})");
          }) == "attacks[0].type");
    CHECK(check_field_path([] {
              cli::parse_cli_config(R"({"attacks": [{"type": "hadamard", "m": 7}]})");
          }) == "attacks[0].m");
    CHECK(check_field_path([] {
              cli::parse_cli_config(R"({"victim": {"type": "neural"}})");
          }) == "victim.path");
    CHECK(check_field_path([] {
              cli::parse_cli_config(R"({"victim": {"type": "scripted", "path": "x"}})");
          }) == "victim.path");
    CHECK(check_field_path([] { cli::parse_cli_config(R"({"env": {"n_agents": 1}})"); }) ==
          "env.n_agents");
    CHECK(check_field_path([] { cli::parse_cli_config("not json at all"); }) == "");
}

TEST_CASE("attack 'none' in the list is rejected") {
    CHECK_THROWS_AS(cli::parse_cli_config(R"({"attacks": [{"type": "none"}]})"), ConfigError);
}

}  // TEST_SUITE
