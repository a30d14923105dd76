#include "aai/curriculum.hpp"
#include "aai/codec.hpp"
#include "aai/errors.hpp"

#include <algorithm>
#include <cmath>

namespace aai {

std::string to_string(const Cell& cell) { return to_string(cell.task) + "/" + std::to_string(cell.difficulty); }

void CellStats::push(double reward) {
    ring_[static_cast<size_t>(count_ % kRewardWindow)] = reward;
    ++count_;
    const std::vector<double> w = window();
    double sum = 0.0;
    for (const double x : w) sum += x;
    mean_ = sum / static_cast<double>(w.size());
    double sq = 0.0;
    for (const double x : w) sq += (x - mean_) * (x - mean_);
    variance_ = sq / static_cast<double>(w.size());
}

CellStats CellStats::from_window(std::span<const double> window, std::int64_t count) {
    if (count < 0 || window.size() != static_cast<size_t>(std::min<std::int64_t>(count, kRewardWindow)))
        throw ConfigError("window length does not match the sample count");
    CellStats s;
    s.count_ = count - static_cast<std::int64_t>(window.size());
    for (const double x : window) s.push(x);
    return s;
}

std::vector<double> CellStats::window() const {
    const int n = window_size();
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n));
    for (std::int64_t k = count_ - n; k < count_; ++k) out.push_back(ring_[static_cast<size_t>(k % kRewardWindow)]);
    return out;
}

double CellStats::stddev() const { return std::sqrt(variance_); }

void CurriculumConfig::validate() const {
    if (!(std::isfinite(c) && c > 0.0)) throw ConfigError("curriculum c must be > 0");
    if (!(std::isfinite(z_init) && z_init >= 0.0)) throw ConfigError("curriculum z_init must be >= 0");
}

double z_value(const CellStats& stats, double z_init) {
    if (stats.count() < 2) return z_init;
    return stats.stddev() / (std::abs(stats.mean()) + kZEpsilon);
}

std::vector<double> selection_probabilities(std::span<const double> z, double c) {
    double total = 0.0;
    for (const double v : z) total += v + c;
    std::vector<double> p;
    p.reserve(z.size());
    for (const double v : z) p.push_back((v + c) / total);
    return p;
}

std::vector<Cell> cell_grid(std::span<const TaskId> tasks, int min_difficulty, int max_difficulty) {
    std::vector<Cell> out;
    for (const TaskId t : tasks)
        for (int d = min_difficulty; d <= max_difficulty; ++d) out.push_back({t, d});
    return out;
}

Curriculum::Curriculum(std::vector<Cell> cells, CurriculumConfig config, std::uint64_t seed)
    : cells_(std::move(cells)), stats_(cells_.size()), config_(config), rng_(derive_rng(seed, "curriculum")) {
    config_.validate();
    if (cells_.empty()) throw ConfigError("curriculum needs at least one enabled cell");
    std::vector<Cell> sorted = cells_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("duplicate curriculum cell");
    for (const Cell& c : cells_)
        if (c.difficulty < 0 || c.difficulty > 10) throw ConfigError("cell difficulty outside [0, 10]");
}

size_t Curriculum::index_of(const Cell& cell) const {
    const auto it = std::find(cells_.begin(), cells_.end(), cell);
    if (it == cells_.end()) throw UnknownCell(to_string(cell));
    return static_cast<size_t>(it - cells_.begin());
}

const CellStats& Curriculum::record(const Cell& cell, double reward) {
    CellStats& s = stats_[index_of(cell)];
    s.push(reward);
    return s;
}

const CellStats& Curriculum::stats(const Cell& cell) const { return stats_[index_of(cell)]; }

double Curriculum::z(const Cell& cell) const { return z_value(stats(cell), config_.z_init); }

std::vector<double> Curriculum::probabilities() const {
    std::vector<double> z;
    z.reserve(stats_.size());
    for (const CellStats& s : stats_) z.push_back(z_value(s, config_.z_init));
    return selection_probabilities(z, config_.c);
}

Cell Curriculum::sample_next() {
    const std::vector<double> p = probabilities();
    const double u = rng_.uniform();
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return cells_[i];
    }
    return cells_.back();
}

std::string Curriculum::checkpoint() const {
    Json j;
    j["schema_version"] = 1;
    j["c"] = config_.c;
    j["z_init"] = config_.z_init;
    j["rng_state"] = rng_.state();
    Json cells = Json::array();
    for (size_t i = 0; i < cells_.size(); ++i) {
        Json cj;
        cj["task"] = to_string(cells_[i].task);
        cj["difficulty"] = cells_[i].difficulty;
        cj["count"] = stats_[i].count();
        cj["window"] = stats_[i].window();
        cells.push_back(std::move(cj));
    }
    j["cells"] = std::move(cells);
    return j.dump();
}

Curriculum Curriculum::restore(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    if (integer_field(j, "schema_version") != 1) throw ConfigError("unsupported checkpoint schema_version");
    CurriculumConfig cfg{number_field(j, "c"), number_field(j, "z_init")};
    const Json& cells = require(j, "cells");
    if (!cells.is_array()) throw ConfigError("field 'cells' must be an array");
    std::vector<Cell> list;
    std::vector<CellStats> stats;
    for (const Json& cj : cells) {
        const auto task = parse_task(string_field(cj, "task"));
        if (!task) throw ConfigError("unknown task in checkpoint");
        list.push_back({*task, static_cast<int>(integer_field(cj, "difficulty"))});
        const Json& w = require(cj, "window");
        if (!w.is_array()) throw ConfigError("field 'window' must be an array");
        std::vector<double> values;
        for (const Json& x : w) {
            if (!x.is_number()) throw ConfigError("window values must be numbers");
            values.push_back(x.get<double>());
        }
        stats.push_back(CellStats::from_window(values, integer_field(cj, "count")));
    }
    Curriculum c(std::move(list), cfg, 0);
    c.stats_ = std::move(stats);
    c.rng_.set_state(unsigned_field(j, "rng_state"));
    return c;
}

std::vector<TraceEntry> train_loop(Curriculum& curriculum, const CellRunner& runner, std::int64_t budget,
                                   const std::function<void(const TraceEntry&)>& on_entry) {
    std::vector<TraceEntry> trace;
    for (std::int64_t e = 0; e < budget; ++e) {
        TraceEntry t;
        t.p = curriculum.probabilities();
        t.cell = curriculum.sample_next();
        try {
            const double r = runner(t.cell, e);
            curriculum.record(t.cell, r);
            t.reward = r;
        } catch (const std::exception& ex) {
            t.error = ex.what();
        }
        if (on_entry) on_entry(t);
        trace.push_back(std::move(t));
    }
    return trace;
}

std::string trace_line(const TraceEntry& entry) {
    Json j;
    j["task"] = to_string(entry.cell.task);
    j["difficulty"] = entry.cell.difficulty;
    j["reward"] = entry.reward ? Json(*entry.reward) : Json(nullptr);
    if (!entry.error.empty()) j["error"] = entry.error;
    j["p"] = entry.p;
    return j.dump();
}

}  // namespace aai
