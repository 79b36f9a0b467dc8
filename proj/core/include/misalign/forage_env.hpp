#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "misalign/matrix.hpp"
#include "misalign/rng.hpp"

namespace misalign::env {

// One row per agent, 3*(n_foods + n_agents) columns. Row layout: a triple
// (x/width, y/height, level/level_scale) per food, then per agent with self
// first and the rest by ascending index. Entities out of sight (or collected
// foods) carry the sentinel triple (-1, -1, 0).
using JointObservation = num::Matrix;

enum class Action : int { None = 0, Up = 1, Down = 2, Left = 3, Right = 4, Load = 5 };
inline constexpr int kActionCount = 6;

struct GridConfig {
    int width = 8;
    int height = 8;
    int n_agents = 3;
    int n_foods = 2;
    bool cooperative = false;
    std::optional<int> sight_radius;  // absent = fully observable
    int max_steps = 64;
    int level_min = 1;
    int level_max = 2;

    int obs_dim() const { return 3 * (n_foods + n_agents); }
    // Normalizer for level entries; the largest level any entity can carry.
    double level_scale() const { return static_cast<double>(n_agents) * level_max; }
    void validate() const;  // throws ConfigError
    std::string digest() const;
};

struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct EnvState {
    std::vector<Cell> agent_pos;
    std::vector<int> agent_level;
    std::vector<Cell> food_pos;
    std::vector<int> food_level;
    std::vector<bool> food_collected;
    int step = 0;
    bool done = false;
    double total_food_level = 0.0;
    num::SplitMix64 rng{0};
};

struct StepResult {
    JointObservation obs;
    double reward = 0.0;
    bool done = false;
    int length = 0;  // steps taken so far this episode
};

// Seeded placement: foods on interior cells, agents anywhere free, levels
// uniform in [level_min, level_max]. Cooperative mode sets every food level
// to the sum of all agent levels.
std::pair<EnvState, JointObservation> env_reset(const GridConfig& config, std::uint64_t seed);

// Moves resolve in ascending agent index; blocked moves are no-ops. A food is
// collected when the levels of adjacent Loading agents sum to at least its
// level; its reward is level / total level, so a cleared episode returns 1.
StepResult env_step(const GridConfig& config, EnvState& state, std::span<const Action> actions);

JointObservation observe(const EnvState& state, const GridConfig& config);

// Clipping bounds of the observation encoding.
constexpr std::pair<double, double> obs_bounds(const GridConfig&) { return {-1.0, 1.0}; }

inline bool is_sentinel_triple(double x, double y) { return x < -0.5 && y < -0.5; }

// One trajectory-dump line: {"t", "actions", "reward", "obs"}.
void append_trajectory_line(std::ostream& out, int t, std::span<const Action> actions,
                            double reward, const JointObservation& obs);

}  // namespace misalign::env
