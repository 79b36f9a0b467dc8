#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks of the installed command-line surface. The binary paths
// arrive through MISALIGN_CLI_BIN / MISALIGN_BC_BIN (set by ctest).

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& command, const fs::path& dir) {
    const fs::path out_file = dir / "stdout.txt";
    const fs::path err_file = dir / "stderr.txt";
    const std::string full =
        command + " >" + out_file.string() + " 2>" + err_file.string();
    const int status = std::system(full.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

const char* cli_bin() {
    const char* p = std::getenv("MISALIGN_CLI_BIN");
    return p ? p : "";
}

const char* bc_bin() {
    const char* p = std::getenv("MISALIGN_BC_BIN");
    return p ? p : "";
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// Desk-sized config: small data, tiny network, short sweep.
std::string tiny_config(const std::string& out_dir, const std::string& extra_attacks = "") {
    return std::string(R"({
      "env": {"width": 8, "height": 8, "n_agents": 3, "n_foods": 2,
              "cooperative": true, "max_steps": 48},
      "victim": {"type": "scripted"},
      "collection": {"T_c": 60, "seed": 5},
      "align_training": {"epochs": 2, "batch": 32, "lr": 0.001,
                         "hidden_sizes": [16], "seed": 5},
      "attacks": [
        {"type": "align", "model": "align_model.json"},
        {"type": "hadamard"},
        {"type": "random", "kind": "uniform"},
        {"type": "random", "kind": "normal"},
        {"type": "ou"})") +
           extra_attacks + R"(
      ],
      "sweep": {"epsilons": [0.1, 0.2], "K": 3, "episodes": 3, "master_seed": 11},
      "output_dir": ")" +
           out_dir + R"("
    })";
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("pipeline: collect, train, evaluate, report") {
    REQUIRE(std::string(cli_bin()) != "");
    fs::path dir = fresh_dir("misalign_cli_pipeline");
    const fs::path cfg_path = dir / "config.json";
    write_file(cfg_path, tiny_config(dir.string()));

    // collect: prints path and length, writes T_c lines, runs idempotently.
    RunResult collect = run(std::string(cli_bin()) + " collect --config " + cfg_path.string(), dir);
    CHECK(collect.exit_code == 0);
    CHECK(collect.out.find("dataset ") != std::string::npos);
    CHECK(collect.out.find("length 60") != std::string::npos);
    const std::string ds1 = slurp(dir / "dataset.jsonl");
    CHECK(count_lines(ds1) == 60);
    run(std::string(cli_bin()) + " collect --config " + cfg_path.string(), dir);
    CHECK(slurp(dir / "dataset.jsonl") == ds1);

    // train-align: writes the model file and prints the final loss.
    RunResult train =
        run(std::string(cli_bin()) + " train-align --config " + cfg_path.string(), dir);
    CHECK(train.exit_code == 0);
    CHECK(train.out.find("final_mse ") != std::string::npos);
    CHECK(fs::exists(dir / "align_model.json"));
    const std::string model1 = slurp(dir / "align_model.json");
    run(std::string(cli_bin()) + " train-align --config " + cfg_path.string(), dir);
    CHECK(slurp(dir / "align_model.json") == model1);

    // evaluate: benign + 5 attacks x 2 eps + 2 best_random = 13 rows.
    RunResult eval1 =
        run(std::string(cli_bin()) + " evaluate --config " + cfg_path.string() + " --jobs 2", dir);
    CHECK(eval1.exit_code == 0);
    const std::string report1 = slurp(dir / "report.csv");
    CHECK(count_lines(report1) == 1 + 13);  // header + rows
    CHECK(report1.rfind("attack,epsilon,m,iqm,ci_low,ci_high,drop_pct,mean_len,"
                        "len_increase_pct,episodes,seed\n", 0) == 0);
    CHECK(fs::exists(dir / "records.jsonl"));
    CHECK(fs::exists(dir / "plot_data.csv"));
    const std::string plot1 = slurp(dir / "plot_data.csv");
    CHECK(count_lines(plot1) == 1 + 3);  // header + eps {0, 0.1, 0.2}

    // determinism across reruns and job counts.
    RunResult eval2 =
        run(std::string(cli_bin()) + " evaluate --config " + cfg_path.string() + " --jobs 1", dir);
    CHECK(eval2.exit_code == 0);
    CHECK(slurp(dir / "report.csv") == report1);

    // report: re-render from records, byte-identical.
    const std::string json1 = slurp(dir / "report.json");
    fs::remove(dir / "report.csv");
    fs::remove(dir / "report.json");
    RunResult rep = run(std::string(cli_bin()) + " report --config " + cfg_path.string(), dir);
    CHECK(rep.exit_code == 0);
    CHECK(slurp(dir / "report.csv") == report1);
    CHECK(slurp(dir / "report.json") == json1);

    fs::remove_all(dir);
}

TEST_CASE("MISALIGN_LOG controls diagnostic output") {
    REQUIRE(std::string(cli_bin()) != "");
    fs::path dir = fresh_dir("misalign_cli_log");
    const fs::path cfg_path = dir / "config.json";
    write_file(cfg_path, std::string(R"({
      "env": {"cooperative": true},
      "collection": {"T_c": 5, "seed": 1},
      "output_dir": ")") + dir.string() + R"("})");
    RunResult verbose = run("MISALIGN_LOG=info " + std::string(cli_bin()) + " collect --config " +
                                cfg_path.string(),
                            dir);
    CHECK(verbose.exit_code == 0);
    CHECK(verbose.err.find("[misalign info]") != std::string::npos);
    RunResult quiet = run("MISALIGN_LOG=off " + std::string(cli_bin()) + " collect --config " +
                              cfg_path.string(),
                          dir);
    CHECK(quiet.exit_code == 0);
    CHECK(quiet.err.empty());
    fs::remove_all(dir);
}

TEST_CASE("episode count override trims the sweep") {
    REQUIRE(std::string(cli_bin()) != "");
    fs::path dir = fresh_dir("misalign_cli_episodes");
    const fs::path cfg_path = dir / "config.json";
    // Only cheap attacks; no model needed.
    write_file(cfg_path, std::string(R"({
      "env": {"cooperative": true},
      "attacks": [{"type": "hadamard"}],
      "sweep": {"epsilons": [0.1], "episodes": 9, "master_seed": 2},
      "output_dir": ")") + dir.string() + R"("
    })");
    RunResult r = run(std::string(cli_bin()) + " evaluate --config " + cfg_path.string() +
                          " --episodes 2 --jobs 2",
                      dir);
    CHECK(r.exit_code == 0);
    CHECK(count_lines(slurp(dir / "records.jsonl")) == 4);  // 2 benign + 2 attack
    fs::remove_all(dir);
}

TEST_CASE("error surfaces: schema, missing files, unsupported attacks") {
    REQUIRE(std::string(cli_bin()) != "");
    fs::path dir = fresh_dir("misalign_cli_errors");

    SUBCASE("unknown key -> exit 2 with machine-readable error") {
        write_file(dir / "bad.json", R"({"typo_section": {}})");
        RunResult r = run(
            std::string(cli_bin()) + " evaluate --config " + (dir / "bad.json").string(), dir);
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("\"error\"") != std::string::npos);
        CHECK(r.err.find("config") != std::string::npos);
    }
    SUBCASE("epsilon zero -> exit 2 naming the field") {
        write_file(dir / "eps0.json",
                   R"({"attacks": [{"type": "hadamard"}],
                       "sweep": {"epsilons": [0.1, 0.0]}, "output_dir": "x"})");
        RunResult r = run(
            std::string(cli_bin()) + " evaluate --config " + (dir / "eps0.json").string(), dir);
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("sweep.epsilons[1]") != std::string::npos);
    }
    SUBCASE("missing model file -> exit 3 naming the file") {
        write_file(dir / "nomodel.json", std::string(R"({
          "attacks": [{"type": "align", "model": "missing_model.json"}],
          "sweep": {"epsilons": [0.1], "episodes": 1},
          "output_dir": ")") + dir.string() + R"("})");
        RunResult r = run(
            std::string(cli_bin()) + " evaluate --config " + (dir / "nomodel.json").string(), dir);
        CHECK(r.exit_code == 3);
        CHECK(r.err.find("missing_model.json") != std::string::npos);
    }
    SUBCASE("whitebox against scripted victim -> exit 5") {
        write_file(dir / "wb.json", std::string(R"({
          "attacks": [{"type": "whitebox"}],
          "sweep": {"epsilons": [0.1], "episodes": 1},
          "output_dir": ")") + dir.string() + R"("})");
        RunResult r =
            run(std::string(cli_bin()) + " evaluate --config " + (dir / "wb.json").string(), dir);
        CHECK(r.exit_code == 5);
        CHECK(r.err.find("unsupported") != std::string::npos);
    }
    SUBCASE("missing config -> exit 2") {
        RunResult r = run(std::string(cli_bin()) + " evaluate", dir);
        CHECK(r.exit_code == 2);
    }
    fs::remove_all(dir);
}

TEST_CASE("neural victim pipeline with the whitebox baseline") {
    REQUIRE(std::string(cli_bin()) != "");
    REQUIRE(std::string(bc_bin()) != "");
    fs::path dir = fresh_dir("misalign_cli_whitebox");
    const fs::path cfg_path = dir / "config.json";
    write_file(cfg_path, std::string(R"({
      "env": {"cooperative": true},
      "sweep": {"epsilons": [0.1], "episodes": 2, "master_seed": 4},
      "output_dir": ")") + dir.string() + R"("
    })");

    RunResult bc = run(std::string(bc_bin()) + " --config " + cfg_path.string() + " --out " +
                           (dir / "policy.json").string() + " --samples 600 --epochs 3 --seed 9",
                       dir);
    CHECK(bc.exit_code == 0);
    CHECK(bc.out.find("train_accuracy") != std::string::npos);
    REQUIRE(fs::exists(dir / "policy.json"));

    write_file(cfg_path, std::string(R"({
      "env": {"cooperative": true},
      "victim": {"type": "neural", "path": "policy.json"},
      "attacks": [{"type": "whitebox"}, {"type": "random", "kind": "uniform"}],
      "sweep": {"epsilons": [0.1], "episodes": 2, "master_seed": 4},
      "output_dir": ")") + dir.string() + R"("
    })");
    RunResult r = run(std::string(cli_bin()) + " evaluate --config " + cfg_path.string(), dir);
    CHECK(r.exit_code == 0);
    const std::string report = slurp(dir / "report.csv");
    CHECK(report.find("whitebox") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("ablate sweeps each axis and writes combined tables") {
    REQUIRE(std::string(cli_bin()) != "");
    fs::path dir = fresh_dir("misalign_cli_ablate");
    const fs::path cfg_path = dir / "config.json";
    write_file(cfg_path, std::string(R"({
      "env": {"cooperative": true},
      "collection": {"T_c": 40, "seed": 6},
      "align_training": {"epochs": 1, "batch": 32, "lr": 0.001, "hidden_sizes": [8], "seed": 6},
      "attacks": [{"type": "align", "model": "align_model.json"}, {"type": "hadamard"}],
      "sweep": {"epsilons": [0.15], "K": 2, "episodes": 2, "master_seed": 3},
      "output_dir": ")") + dir.string() + R"("
    })");

    run(std::string(cli_bin()) + " collect --config " + cfg_path.string(), dir);
    run(std::string(cli_bin()) + " train-align --config " + cfg_path.string(), dir);

    SUBCASE("K axis includes K=1 (FGSM)") {
        RunResult r = run(std::string(cli_bin()) + " ablate --axis K --config " +
                              cfg_path.string() + " --jobs 2",
                          dir);
        CHECK(r.exit_code == 0);
        CHECK(fs::exists(dir / "ablate_K" / "k_1" / "report.csv"));
        CHECK(fs::exists(dir / "ablate_K" / "k_5" / "report.csv"));
        CHECK(fs::exists(dir / "ablate_K" / "k_10" / "report.csv"));
        const std::string combined = slurp(dir / "ablate_K" / "combined.csv");
        CHECK(combined.find("K,1,align") != std::string::npos);
        CHECK(fs::exists(dir / "ablate_K" / "aggregate.csv"));
    }
    SUBCASE("victims axis walks m from n down to 1") {
        RunResult r = run(std::string(cli_bin()) + " ablate --axis victims --config " +
                              cfg_path.string() + " --jobs 2",
                          dir);
        CHECK(r.exit_code == 0);
        for (int m : {1, 2, 3})
            CHECK(fs::exists(dir / "ablate_victims" / ("m_" + std::to_string(m)) / "report.csv"));
        const std::string combined = slurp(dir / "ablate_victims" / "combined.csv");
        CHECK(combined.find("victims,3,align") != std::string::npos);
        CHECK(combined.find("victims,1,align_m1") != std::string::npos);
    }
    SUBCASE("data_size axis retrains per point, starting at 1000") {
        RunResult r = run(std::string(cli_bin()) + " ablate --axis data_size --config " +
                              cfg_path.string() + " --jobs 2",
                          dir);
        CHECK(r.exit_code == 0);
        for (int tc : {1000, 5000, 10000, 50000})
            CHECK(fs::exists(dir / "ablate_data_size" / ("tc_" + std::to_string(tc)) /
                             "report.csv"));
        const std::string combined = slurp(dir / "ablate_data_size" / "combined.csv");
        CHECK(combined.find("data_size,1000,align") != std::string::npos);
    }
    fs::remove_all(dir);
}

}  // TEST_SUITE
