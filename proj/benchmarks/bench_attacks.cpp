// Per-step attack latency and environment throughput. The K=1 / K=10 spread
// is the practical cost of PGD versus FGSM at deployment time.

#include <benchmark/benchmark.h>

#include "misalign/attacks.hpp"
#include "misalign/forage_env.hpp"
#include "misalign/policies.hpp"

using namespace misalign;

namespace {

env::GridConfig reference_env() {
    env::GridConfig cfg;
    cfg.cooperative = true;
    return cfg;
}

attack::AlignModel tiny_model(const env::GridConfig& cfg) {
    policy::Victim victim{policy::ScriptedPolicy(cfg)};
    attack::ObservationDataset ds = attack::collect_observations(cfg, victim, 256, 7);
    attack::AlignTrainConfig train;
    train.epochs = 3;
    train.hidden_sizes = {64, 64, 64};
    train.lr = 1e-3;
    return attack::train_align_model(ds, train);
}

void BM_EnvStep(benchmark::State& state) {
    const env::GridConfig cfg = reference_env();
    policy::ScriptedPolicy expert(cfg);
    auto [env_state, obs] = env_reset(cfg, 11);
    std::vector<env::Action> actions(cfg.n_agents);
    for (auto _ : state) {
        if (env_state.done) std::tie(env_state, obs) = env_reset(cfg, 11);
        for (int i = 0; i < cfg.n_agents; ++i) actions[i] = expert.act(obs.row(i));
        auto step = env_step(cfg, env_state, actions);
        obs = std::move(step.obs);
        benchmark::DoNotOptimize(obs);
    }
}
BENCHMARK(BM_EnvStep);

void BM_AlignPgd(benchmark::State& state) {
    const env::GridConfig cfg = reference_env();
    const attack::AlignModel model = tiny_model(cfg);
    auto [env_state, obs] = env_reset(cfg, 13);
    attack::AttackBudget budget{0.2, static_cast<int>(state.range(0)), {}, -1.0, 1.0};
    for (auto _ : state) {
        auto p = attack::pgd_align_perturb(model, obs, budget);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_AlignPgd)->Arg(1)->Arg(10);

void BM_HadamardPerturbation(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto p = attack::hadamard_perturbation(3, d, 0.2);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_HadamardPerturbation)->Arg(15)->Arg(256)->Arg(1024);

void BM_MlpForward(benchmark::State& state) {
    auto net = num::make_mlp({30, 256, 256, 256, 15}, 5);
    std::vector<double> x(30, 0.25);
    for (auto _ : state) {
        auto out = num::mlp_forward(net, x);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_MlpForward);

}  // namespace

BENCHMARK_MAIN();
