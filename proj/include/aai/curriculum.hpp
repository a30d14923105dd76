#pragma once

// Variance-driven task sampler over (task, difficulty) cells:
//   z_i = sigma_i / (|mu_i| + 1e-7),   p_i = (z_i + c) / sum_j (z_j + c)
// with mu, sigma the mean and population deviation of the last 10 rewards.

#include "aai/levels.hpp"
#include "aai/rng.hpp"

#include <array>
#include <compare>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aai {

struct Cell {
    TaskId task = TaskId::L0;
    int difficulty = 0;

    auto operator<=>(const Cell&) const = default;
};

std::string to_string(const Cell& cell);  // "L3/7"

inline constexpr int kRewardWindow = 10;
inline constexpr double kZEpsilon = 1e-7;

class CellStats {
public:
    void push(double reward);
    /// Rebuilds stats holding `window` (oldest first) after `count` pushes.
    static CellStats from_window(std::span<const double> window, std::int64_t count);

    /// Rewards currently in the window, oldest first.
    std::vector<double> window() const;
    int window_size() const { return count_ < kRewardWindow ? static_cast<int>(count_) : kRewardWindow; }
    std::int64_t count() const { return count_; }
    double mean() const { return mean_; }
    double variance() const { return variance_; }
    double stddev() const;

    bool operator==(const CellStats&) const = default;

private:
    std::array<double, kRewardWindow> ring_{};
    std::int64_t count_ = 0;
    double mean_ = 0.0;
    double variance_ = 0.0;
};

struct CurriculumConfig {
    double c = 0.05;
    double z_init = 1.0;

    void validate() const;
    bool operator==(const CurriculumConfig&) const = default;
};

/// z for a cell; z_init until two rewards have been recorded.
double z_value(const CellStats& stats, double z_init);

/// Normalized (z_i + c) weights. Sums to 1 within rounding.
std::vector<double> selection_probabilities(std::span<const double> z, double c);

/// Every (task, difficulty) pair for the given tasks and range.
std::vector<Cell> cell_grid(std::span<const TaskId> tasks, int min_difficulty, int max_difficulty);

class Curriculum {
public:
    /// Throws ConfigError on an empty or duplicated cell list.
    Curriculum(std::vector<Cell> cells, CurriculumConfig config, std::uint64_t seed);

    /// UnknownCell for cells outside the enabled set.
    const CellStats& record(const Cell& cell, double reward);
    const CellStats& stats(const Cell& cell) const;
    double z(const Cell& cell) const;

    /// In cells() order.
    std::vector<double> probabilities() const;
    /// One categorical draw; consumes exactly one value from the stream.
    Cell sample_next();

    const std::vector<Cell>& cells() const { return cells_; }
    const CurriculumConfig& config() const { return config_; }
    const Rng& rng() const { return rng_; }

    /// Canonical JSON checkpoint (cells, windows, counts, rng state).
    std::string checkpoint() const;
    /// Throws ConfigError on malformed input.
    static Curriculum restore(const std::string& json);

    bool operator==(const Curriculum&) const = default;

private:
    size_t index_of(const Cell& cell) const;

    std::vector<Cell> cells_;
    std::vector<CellStats> stats_;
    CurriculumConfig config_;
    Rng rng_;
};

struct TraceEntry {
    Cell cell;
    std::optional<double> reward;  // empty when the runner failed
    std::string error;
    std::vector<double> p;         // snapshot before the draw
};

/// Runs one episode on the cell and returns its total reward. May throw.
using CellRunner = std::function<double(const Cell& cell, std::int64_t episode)>;

/// sample_next -> runner -> record, `budget` times. Runner errors are traced
/// and the reward is not recorded.
std::vector<TraceEntry> train_loop(Curriculum& curriculum, const CellRunner& runner, std::int64_t budget,
                                   const std::function<void(const TraceEntry&)>& on_entry = {});

std::string trace_line(const TraceEntry& entry);

}  // namespace aai
