#include "misalign/forage_env.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "misalign/errors.hpp"

namespace misalign::env {

namespace {

constexpr double kSentinelX = -1.0;
constexpr double kSentinelY = -1.0;
constexpr double kSentinelLevel = 0.0;

int chebyshev(const Cell& a, const Cell& b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

int manhattan(const Cell& a, const Cell& b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

void write_triple(double* dst, const Cell& pos, int level, const GridConfig& cfg) {
    dst[0] = static_cast<double>(pos.x) / cfg.width;
    dst[1] = static_cast<double>(pos.y) / cfg.height;
    dst[2] = static_cast<double>(level) / cfg.level_scale();
}

void write_sentinel(double* dst) {
    dst[0] = kSentinelX;
    dst[1] = kSentinelY;
    dst[2] = kSentinelLevel;
}

std::vector<Cell> shuffled_cells(std::vector<Cell> cells, num::SplitMix64& rng) {
    for (std::size_t i = cells.size(); i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(cells[i - 1], cells[j]);
    }
    return cells;
}

}  // namespace

void GridConfig::validate() const {
    if (width < 3 || height < 3)
        throw ConfigError("grid must be at least 3x3 so foods fit in the interior", "env");
    if (n_agents < 2) throw ConfigError("need at least 2 agents", "env.n_agents");
    if (n_foods < 1) throw ConfigError("need at least 1 food", "env.n_foods");
    if (width * height < n_agents + n_foods)
        throw ConfigError("grid too small for all entities", "env");
    if ((width - 2) * (height - 2) < n_foods)
        throw ConfigError("interior too small for the requested foods", "env.n_foods");
    if (max_steps < 1) throw ConfigError("max_steps must be >= 1", "env.max_steps");
    if (level_min < 1 || level_max < level_min)
        throw ConfigError("invalid level range", "env.level_min");
    if (sight_radius && *sight_radius < 0)
        throw ConfigError("sight_radius must be >= 0", "env.sight_radius");
    if (cooperative && n_agents > 4)
        throw ConfigError("cooperative mode needs all agents adjacent at once; a cell has 4 sides",
                          "env.n_agents");
}

std::string GridConfig::digest() const {
    std::ostringstream os;
    os << "w=" << width << ";h=" << height << ";na=" << n_agents << ";nf=" << n_foods
       << ";coop=" << (cooperative ? 1 : 0) << ";sr=" << (sight_radius ? *sight_radius : -1)
       << ";ms=" << max_steps << ";lmin=" << level_min << ";lmax=" << level_max;
    std::uint64_t h = num::fnv1a(os.str());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::pair<EnvState, JointObservation> env_reset(const GridConfig& config, std::uint64_t seed) {
    config.validate();
    EnvState s;
    s.rng = num::SplitMix64(seed);

    // Foods land on interior cells, pairwise non-adjacent, so every food
    // keeps its four loading slots open.
    std::vector<Cell> interior;
    for (int y = 1; y < config.height - 1; ++y)
        for (int x = 1; x < config.width - 1; ++x) interior.push_back({x, y});
    interior = shuffled_cells(std::move(interior), s.rng);
    for (const Cell& c : interior) {
        if (static_cast<int>(s.food_pos.size()) == config.n_foods) break;
        bool clear = true;
        for (const Cell& f : s.food_pos)
            if (std::abs(f.x - c.x) + std::abs(f.y - c.y) < 2) clear = false;
        if (clear) s.food_pos.push_back(c);
    }
    if (static_cast<int>(s.food_pos.size()) < config.n_foods)
        throw ConfigError("could not place foods with spacing on this grid", "env.n_foods");

    std::vector<Cell> free;
    for (int y = 0; y < config.height; ++y)
        for (int x = 0; x < config.width; ++x) {
            Cell c{x, y};
            if (std::find(s.food_pos.begin(), s.food_pos.end(), c) == s.food_pos.end())
                free.push_back(c);
        }
    free = shuffled_cells(std::move(free), s.rng);
    if (free.size() < static_cast<std::size_t>(config.n_agents))
        throw ConfigError("no room left for agents", "env");
    s.agent_pos.assign(free.begin(), free.begin() + config.n_agents);

    s.agent_level.resize(config.n_agents);
    for (int& lv : s.agent_level)
        lv = config.level_min +
             static_cast<int>(s.rng.below(config.level_max - config.level_min + 1));

    const int team_level = std::accumulate(s.agent_level.begin(), s.agent_level.end(), 0);
    s.food_level.resize(config.n_foods);
    for (int& lv : s.food_level) {
        if (config.cooperative) {
            lv = team_level;
        } else {
            // Cap at what four loaders can muster so every food stays collectable.
            std::vector<int> lvls = s.agent_level;
            std::sort(lvls.begin(), lvls.end(), std::greater<int>());
            int cap = 0;
            for (std::size_t i = 0; i < lvls.size() && i < 4; ++i) cap += lvls[i];
            lv = config.level_min + static_cast<int>(s.rng.below(cap - config.level_min + 1));
        }
    }
    s.food_collected.assign(config.n_foods, false);
    s.total_food_level = std::accumulate(s.food_level.begin(), s.food_level.end(), 0.0);
    return {s, observe(s, config)};
}

StepResult env_step(const GridConfig& config, EnvState& state, std::span<const Action> actions) {
    if (state.done) throw ContractError("env_step: episode already terminated");
    if (actions.size() != static_cast<std::size_t>(config.n_agents))
        throw ContractError("env_step: need one action per agent");

    // Movement, resolved in ascending agent index against current occupancy.
    for (int i = 0; i < config.n_agents; ++i) {
        Cell target = state.agent_pos[i];
        switch (actions[i]) {
            case Action::Up: target.y -= 1; break;
            case Action::Down: target.y += 1; break;
            case Action::Left: target.x -= 1; break;
            case Action::Right: target.x += 1; break;
            default: continue;
        }
        if (target.x < 0 || target.x >= config.width || target.y < 0 || target.y >= config.height)
            continue;
        bool blocked = false;
        for (int f = 0; f < config.n_foods && !blocked; ++f)
            if (!state.food_collected[f] && state.food_pos[f] == target) blocked = true;
        for (int j = 0; j < config.n_agents && !blocked; ++j)
            if (j != i && state.agent_pos[j] == target) blocked = true;
        if (!blocked) state.agent_pos[i] = target;
    }

    // Loading: all foods are judged against the same post-move positions.
    double reward = 0.0;
    std::vector<int> collected_now;
    for (int f = 0; f < config.n_foods; ++f) {
        if (state.food_collected[f]) continue;
        int load = 0;
        for (int i = 0; i < config.n_agents; ++i)
            if (actions[i] == Action::Load && manhattan(state.agent_pos[i], state.food_pos[f]) == 1)
                load += state.agent_level[i];
        if (load >= state.food_level[f]) collected_now.push_back(f);
    }
    for (int f : collected_now) {
        state.food_collected[f] = true;
        reward += state.food_level[f] / state.total_food_level;
    }

    state.step += 1;
    const bool all_collected =
        std::all_of(state.food_collected.begin(), state.food_collected.end(), [](bool b) { return b; });
    state.done = all_collected || state.step >= config.max_steps;

    return {observe(state, config), reward, state.done, state.step};
}

JointObservation observe(const EnvState& state, const GridConfig& config) {
    JointObservation obs(config.n_agents, config.obs_dim());
    const int radius = config.sight_radius ? *config.sight_radius
                                           : std::max(config.width, config.height);
    for (int i = 0; i < config.n_agents; ++i) {
        double* row = obs.row(i).data();
        std::size_t k = 0;
        for (int f = 0; f < config.n_foods; ++f, k += 3) {
            if (state.food_collected[f] ||
                chebyshev(state.agent_pos[i], state.food_pos[f]) > radius)
                write_sentinel(row + k);
            else
                write_triple(row + k, state.food_pos[f], state.food_level[f], config);
        }
        write_triple(row + k, state.agent_pos[i], state.agent_level[i], config);
        k += 3;
        for (int j = 0; j < config.n_agents; ++j) {
            if (j == i) continue;
            if (chebyshev(state.agent_pos[i], state.agent_pos[j]) > radius)
                write_sentinel(row + k);
            else
                write_triple(row + k, state.agent_pos[j], state.agent_level[j], config);
            k += 3;
        }
    }
    return obs;
}

void append_trajectory_line(std::ostream& out, int t, std::span<const Action> actions,
                            double reward, const JointObservation& obs) {
    nlohmann::json j;
    j["t"] = t;
    std::vector<int> acts;
    for (Action a : actions) acts.push_back(static_cast<int>(a));
    j["actions"] = acts;
    j["reward"] = reward;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < obs.rows(); ++r) {
        auto row = obs.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["obs"] = std::move(rows);
    out << j.dump() << '\n';
}

}  // namespace misalign::env
