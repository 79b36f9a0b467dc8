// Clones the scripted expert into a differentiable policy via behavior
// cloning. Produces the neural victim files consumed by `misalign evaluate`
// with a {"type": "neural"} victim (required by the white-box baseline).

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "misalign/config.hpp"
#include "misalign/errors.hpp"
#include "misalign/experiment.hpp"
#include "misalign/policies.hpp"

using namespace misalign;

int main(int argc, char** argv) {
    CLI::App app{"Behavior-clone the scripted expert into a neural victim policy"};
    std::string config_path;
    std::string out_path = "policy.json";
    int samples = 20000;
    int epochs = 30;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "Experiment config JSON (env section is used)")
        ->required();
    app.add_option("--out", out_path, "Output policy file");
    app.add_option("--samples", samples, "Expert (observation, action) pairs to collect");
    app.add_option("--epochs", epochs, "Training epochs");
    app.add_option("--seed", seed, "Seed for collection, init and shuffling");
    CLI11_PARSE(app, argc, argv);

    try {
        cli::CliConfig cfg = cli::load_cli_config(config_path);
        auto data = policy::collect_expert_samples(cfg.env, samples, seed);
        policy::BcOptions options;
        options.holdout_fraction = 0.1;
        policy::BcResult result = policy::bc_train(data, epochs, seed, options);
        policy::save_policy(result.policy, out_path);
        std::cout << "policy " << out_path << "\n";
        std::cout << "train_accuracy " << eval::format_double(result.train_accuracy) << "\n";
        std::cout << "holdout_accuracy " << eval::format_double(result.holdout_accuracy) << "\n";
        return 0;
    } catch (const std::exception& e) {
        nlohmann::json j;
        j["error"]["type"] = "internal";
        j["error"]["message"] = e.what();
        std::cerr << j.dump() << std::endl;
        return 1;
    }
}
