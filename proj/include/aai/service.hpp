#pragma once

// Run modes behind the CLI: random and curriculum training runs, the
// JSON-lines session server (stdio or TCP) and reserved-seed evaluation.

#include "aai/curriculum.hpp"
#include "aai/episode.hpp"
#include "aai/protocol.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace aai {

enum class RunMode : std::uint8_t { random, curriculum, serve, eval, gen };
std::string to_string(RunMode m);
std::optional<RunMode> parse_run_mode(std::string_view s);

struct RunConfig {
    RunMode mode = RunMode::random;
    std::vector<TaskId> tasks{kAllTasks.begin(), kAllTasks.end()};
    int min_difficulty = 0;
    int max_difficulty = 10;
    EpisodeConfig episode;  // template; gen is filled per episode
    CurriculumConfig curriculum;
    std::uint64_t seed = 0;  // master seed for cell and episode-seed draws
    std::int64_t episodes = 100;
    std::string policy = "zero";  // zero | random | teleport
    std::filesystem::path seeds_file;
    std::filesystem::path log_dir;     // trajectories and traces; empty = none
    std::filesystem::path output;      // eval report / curriculum checkpoint
    std::filesystem::path resume;      // curriculum checkpoint to continue from
    std::string transport = "stdio";   // stdio | tcp
    std::string host = "127.0.0.1";
    int port = 5555;

    /// Throws ConfigError.
    void validate() const;
    std::vector<Cell> cells() const;
};

/// Applies the keys present in a JSON config file onto `base`.
RunConfig apply_config_json(const Json& j, RunConfig base);
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// Built-in policies by name; ConfigError for unknown names.
Policy make_policy(const std::string& name, std::uint64_t seed);

/// Single-writer wrapper: sampling and recording never interleave.
class SharedCurriculum {
public:
    explicit SharedCurriculum(Curriculum c) : curriculum_(std::move(c)) {}
    Cell next();
    CellStats record(const Cell& cell, double reward);
    std::string checkpoint() const;

private:
    mutable std::mutex mutex_;
    Curriculum curriculum_;
};

/// One client's view: an episode plus access to the shared curriculum.
class Session {
public:
    Session(const RunConfig& config, SharedCurriculum* curriculum);

    /// Handles one request line and returns the response line. Never throws.
    std::string handle(const std::string& line);
    Response dispatch(const Request& request);

    bool closed() const { return closed_; }
    const Episode& episode() const { return episode_; }

private:
    RunConfig config_;
    SharedCurriculum* curriculum_;
    Episode episode_;
    bool closed_ = false;
};

/// Serves one session over a line stream until close or end of input.
void serve_stream(std::istream& in, std::ostream& out, const RunConfig& config, SharedCurriculum* curriculum);

/// TCP server, one thread and one session per connection.
class TcpServer {
public:
    TcpServer(const RunConfig& config, SharedCurriculum* curriculum);
    ~TcpServer();
    /// Bound port (useful when configured with port 0).
    int port() const;
    /// Accepts connections until stop().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct EpisodeSummary {
    Cell cell;
    std::uint64_t seed = 0;
    double total_reward = 0.0;
    Termination reason = Termination::none;
    std::int64_t steps = 0;
    std::string error;
};

std::string summary_line(const EpisodeSummary& s);

/// Uniform cell draw per episode; writes trajectories and trace.jsonl under
/// log_dir when set.
std::vector<EpisodeSummary> run_random(const RunConfig& config);

/// Curriculum-driven run; writes trace lines to log_dir/curriculum_trace.jsonl
/// and the final checkpoint to `output` when set.
std::vector<TraceEntry> run_curriculum(const RunConfig& config, Curriculum& curriculum);

struct EvalRow {
    Cell cell;
    std::int64_t episodes = 0;
    double mean_reward = 0.0;
    double success_rate = 0.0;
    std::int64_t errors = 0;  // episodes that could not run (counted as failures)
};

struct EvalReport {
    std::string policy;
    std::vector<EvalRow> rows;  // sorted by cell
    Json to_json() const;
    std::string table() const;
};

/// {"schema_version":1,"seeds":[{"task","difficulty","seed"},...]}, a bare
/// array, or an empty file. ConfigError when unreadable.
std::vector<GenParams> load_seeds(const std::filesystem::path& path);

EvalReport evaluate(const std::vector<GenParams>& seeds, const std::string& policy, const EpisodeConfig& base);

bool is_success(Termination t);

}  // namespace aai
