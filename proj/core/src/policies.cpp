#include "misalign/policies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "misalign/adam.hpp"
#include "misalign/errors.hpp"
#include "misalign/rng.hpp"

namespace misalign::policy {

namespace {

struct Perceived {
    bool visible = false;
    int x = 0;
    int y = 0;
    double level = 0.0;  // de-normalized, kept continuous
};

int clamp_int(double v, int lo, int hi) {
    int r = static_cast<int>(std::lround(v));
    return std::max(lo, std::min(hi, r));
}

Perceived parse_triple(std::span<const double> row, std::size_t offset,
                       const env::GridConfig& cfg) {
    Perceived p;
    const double x = row[offset], y = row[offset + 1], lvl = row[offset + 2];
    if (env::is_sentinel_triple(x, y)) return p;
    p.visible = true;
    p.x = clamp_int(x * cfg.width, 0, cfg.width - 1);
    p.y = clamp_int(y * cfg.height, 0, cfg.height - 1);
    p.level = lvl * cfg.level_scale();
    return p;
}

int manhattan(int ax, int ay, int bx, int by) { return std::abs(ax - bx) + std::abs(ay - by); }

struct MoveCandidate {
    env::Action action;
    int dx, dy;
};

constexpr MoveCandidate kMoves[] = {
    {env::Action::Up, 0, -1},
    {env::Action::Down, 0, 1},
    {env::Action::Left, -1, 0},
    {env::Action::Right, 1, 0},
};

constexpr int kUnreachable = std::numeric_limits<int>::max();

// Shortest-path distance field to (tx, ty) over unblocked cells, expanding
// neighbors in the fixed Up/Down/Left/Right order.
std::vector<int> bfs_distances(int tx, int ty, const std::vector<char>& blocked,
                               const env::GridConfig& cfg) {
    std::vector<int> dist(static_cast<std::size_t>(cfg.width) * cfg.height, kUnreachable);
    if (blocked[ty * cfg.width + tx]) return dist;
    std::vector<int> queue;
    queue.reserve(dist.size());
    dist[ty * cfg.width + tx] = 0;
    queue.push_back(ty * cfg.width + tx);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int cell = queue[head];
        const int cx = cell % cfg.width, cy = cell / cfg.width;
        for (const auto& m : kMoves) {
            const int nx = cx + m.dx, ny = cy + m.dy;
            if (nx < 0 || nx >= cfg.width || ny < 0 || ny >= cfg.height) continue;
            const int ni = ny * cfg.width + nx;
            if (blocked[ni] || dist[ni] != kUnreachable) continue;
            dist[ni] = dist[cell] + 1;
            queue.push_back(ni);
        }
    }
    return dist;
}

// One step down the distance field; ties in the Up/Down/Left/Right order.
env::Action descend(int sx, int sy, const std::vector<int>& dist, const env::GridConfig& cfg) {
    env::Action best = env::Action::None;
    int best_dist = dist[sy * cfg.width + sx];
    for (const auto& m : kMoves) {
        const int nx = sx + m.dx, ny = sy + m.dy;
        if (nx < 0 || nx >= cfg.width || ny < 0 || ny >= cfg.height) continue;
        const int d = dist[ny * cfg.width + nx];
        if (d < best_dist) {
            best_dist = d;
            best = m.action;
        }
    }
    return best;
}

// Serpentine patrol index: row 0 runs left-to-right, row 1 right-to-left, ...
int snake_index(int x, int y, int width) {
    return y * width + (y % 2 == 0 ? x : width - 1 - x);
}

void snake_cell(int index, int width, int& x, int& y) {
    y = index / width;
    const int r = index % width;
    x = (y % 2 == 0) ? r : width - 1 - r;
}

}  // namespace

env::Action ScriptedPolicy::act(std::span<const double> obs_row) const {
    const env::GridConfig& cfg = config_;
    if (obs_row.size() != static_cast<std::size_t>(cfg.obs_dim()))
        throw ContractError("scripted_act: observation row length mismatch");

    std::vector<Perceived> foods(cfg.n_foods);
    for (int f = 0; f < cfg.n_foods; ++f) foods[f] = parse_triple(obs_row, 3 * f, cfg);
    const Perceived self = parse_triple(obs_row, 3 * cfg.n_foods, cfg);
    std::vector<Perceived> others(cfg.n_agents - 1);
    for (int j = 0; j + 1 < cfg.n_agents; ++j)
        others[j] = parse_triple(obs_row, 3 * (cfg.n_foods + 1 + j), cfg);

    // Pick the lowest-level visible food. Levels are integers in the clean
    // encoding, so decode by rounding; ties go to the lowest food index.
    int target = -1;
    for (int f = 0; f < cfg.n_foods; ++f) {
        if (!foods[f].visible) continue;
        if (target < 0 || std::lround(foods[f].level) < std::lround(foods[target].level))
            target = f;
    }

    // Perceived occupancy: other agents plus every visible food cell.
    std::vector<char> blocked(static_cast<std::size_t>(cfg.width) * cfg.height, 0);
    for (const auto& o : others)
        if (o.visible) blocked[o.y * cfg.width + o.x] = 1;
    for (const auto& f : foods)
        if (f.visible) blocked[f.y * cfg.width + f.x] = 1;

    if (target >= 0) {
        const Perceived& food = foods[target];
        if (manhattan(self.x, self.y, food.x, food.y) == 1) return env::Action::Load;

        // Walk the shortest path to the nearest free loading slot.
        env::Action best = env::Action::None;
        int best_dist = kUnreachable;
        for (const auto& m : kMoves) {
            const int slot_x = food.x + m.dx, slot_y = food.y + m.dy;
            if (slot_x < 0 || slot_x >= cfg.width || slot_y < 0 || slot_y >= cfg.height) continue;
            if (blocked[slot_y * cfg.width + slot_x]) continue;
            std::vector<int> dist = bfs_distances(slot_x, slot_y, blocked, cfg);
            const int d = dist[self.y * cfg.width + self.x];
            if (d == kUnreachable || d >= best_dist) continue;
            best_dist = d;
            best = descend(self.x, self.y, dist, cfg);
        }
        return best;
    }

    // Nothing in sight: advance along the serpentine lap, skipping cells that
    // are currently unreachable.
    const int cells = cfg.width * cfg.height;
    const int here = snake_index(self.x, self.y, cfg.width);
    for (int ahead = 1; ahead < cells; ++ahead) {
        int nx = 0, ny = 0;
        snake_cell((here + ahead) % cells, cfg.width, nx, ny);
        if (blocked[ny * cfg.width + nx]) continue;
        std::vector<int> dist = bfs_distances(nx, ny, blocked, cfg);
        if (dist[self.y * cfg.width + self.x] == kUnreachable) continue;
        return descend(self.x, self.y, dist, cfg);
    }
    return env::Action::None;
}

std::vector<double> action_probabilities(const NeuralPolicy& policy,
                                         std::span<const double> obs_row) {
    std::vector<double> logits = num::mlp_forward(policy.net, obs_row);
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& z : logits) {
        z = std::exp(z - max_logit);
        sum += z;
    }
    for (double& z : logits) z /= sum;
    return logits;
}

std::pair<double, std::vector<double>> policy_prob_and_grad(const NeuralPolicy& policy,
                                                            std::span<const double> obs_row,
                                                            env::Action action) {
    const int a = static_cast<int>(action);
    std::vector<double> probs = action_probabilities(policy, obs_row);
    // d p_a / d z_j = p_a (1[a=j] - p_j)
    std::vector<double> output_grad(probs.size());
    for (std::size_t j = 0; j < probs.size(); ++j)
        output_grad[j] = probs[a] * ((static_cast<int>(j) == a ? 1.0 : 0.0) - probs[j]);
    return {probs[a], num::mlp_input_gradient(policy.net, obs_row, output_grad)};
}

env::Action greedy_action(const NeuralPolicy& policy, std::span<const double> obs_row) {
    std::vector<double> logits = num::mlp_forward(policy.net, obs_row);
    const auto it = std::max_element(logits.begin(), logits.end());
    return static_cast<env::Action>(it - logits.begin());
}

BcResult bc_train(const std::vector<BcSample>& data, int epochs, std::uint64_t seed,
                  const BcOptions& options) {
    if (data.empty()) throw ContractError("bc_train: empty dataset");
    const int d = static_cast<int>(data.front().first.size());

    std::size_t holdout = static_cast<std::size_t>(options.holdout_fraction * data.size());
    const std::size_t train_count = data.size() - holdout;
    if (train_count == 0) throw ContractError("bc_train: holdout leaves no training data");

    std::vector<int> sizes;
    sizes.push_back(d);
    for (int h : options.hidden_sizes) sizes.push_back(h);
    sizes.push_back(env::kActionCount);

    NeuralPolicy policy;
    policy.d = d;
    policy.net = num::make_mlp(sizes, num::mix_seed({seed, num::fnv1a("bc_init")}));
    num::AdamState adam = num::make_adam_state(policy.net, {.lr = options.lr});

    num::SplitMix64 shuffle_rng(num::mix_seed({seed, num::fnv1a("bc_shuffle")}));
    std::vector<std::size_t> order(train_count);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const int batch = std::max(1, options.batch);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t count = std::min<std::size_t>(batch, order.size() - start);
            num::Matrix inputs(count, d);
            std::vector<int> labels(count);
            for (std::size_t b = 0; b < count; ++b) {
                const auto& [row, action] = data[order[start + b]];
                std::copy(row.begin(), row.end(), inputs.row(b).begin());
                labels[b] = static_cast<int>(action);
            }
            num::MlpTrace trace;
            num::Matrix logits = num::mlp_forward_batch(policy.net, inputs, &trace);
            // softmax cross-entropy: dz = (p - onehot) / count
            num::Matrix dz(count, env::kActionCount);
            for (std::size_t b = 0; b < count; ++b) {
                auto zrow = logits.row(b);
                double zmax = *std::max_element(zrow.begin(), zrow.end());
                double sum = 0.0;
                for (int j = 0; j < env::kActionCount; ++j) {
                    dz(b, j) = std::exp(zrow[j] - zmax);
                    sum += dz(b, j);
                }
                for (int j = 0; j < env::kActionCount; ++j) {
                    double p = dz(b, j) / sum;
                    dz(b, j) = (p - (j == labels[b] ? 1.0 : 0.0)) / static_cast<double>(count);
                }
            }
            num::MlpGradients grads = num::mlp_backward_batch(policy.net, trace, dz);
            num::adam_step(policy.net, adam, grads);
        }
    }

    auto accuracy_on = [&](std::size_t begin, std::size_t end) {
        if (begin >= end) return 0.0;
        std::size_t hits = 0;
        for (std::size_t i = begin; i < end; ++i)
            if (greedy_action(policy, data[i].first) == data[i].second) ++hits;
        return static_cast<double>(hits) / static_cast<double>(end - begin);
    };

    BcResult result;
    result.train_accuracy = accuracy_on(0, train_count);
    result.holdout_accuracy = accuracy_on(train_count, data.size());
    result.policy = std::move(policy);
    return result;
}

void save_policy(const NeuralPolicy& policy, const std::string& path) {
    nlohmann::json j;
    j["policy_type"] = "neural";
    j["d"] = policy.d;
    j["action_count"] = policy.action_count;
    j["network"] = nlohmann::json::parse(num::mlp_to_json(policy.net));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open policy file for writing", path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing policy file", path);
}

NeuralPolicy load_policy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open policy file", path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed policy file (") + e.what() + ")", path);
    }
    NeuralPolicy p;
    if (j.at("policy_type").get<std::string>() != "neural")
        throw IoError("not a neural policy file", path);
    p.d = j.at("d").get<int>();
    p.action_count = j.at("action_count").get<int>();
    p.net = num::mlp_from_json(j.at("network").dump());
    if (p.net.input_size() != p.d || p.net.output_size() != p.action_count)
        throw IoError("policy header does not match network shape", path);
    return p;
}

std::vector<BcSample> collect_expert_samples(const env::GridConfig& config, int samples,
                                             std::uint64_t seed) {
    ScriptedPolicy expert(config);
    std::vector<BcSample> out;
    out.reserve(static_cast<std::size_t>(samples));
    std::uint64_t episode = 0;
    while (static_cast<int>(out.size()) < samples) {
        auto [state, obs] = env_reset(config, num::mix_seed({seed, episode++}));
        bool done = false;
        while (!done && static_cast<int>(out.size()) < samples) {
            std::vector<env::Action> actions(config.n_agents);
            for (int i = 0; i < config.n_agents; ++i) {
                auto row = obs.row(i);
                actions[i] = expert.act(row);
                out.emplace_back(std::vector<double>(row.begin(), row.end()), actions[i]);
            }
            auto step = env_step(config, state, actions);
            obs = std::move(step.obs);
            done = step.done;
        }
    }
    return out;
}

}  // namespace misalign::policy
