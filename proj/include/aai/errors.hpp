#pragma once

#include <stdexcept>
#include <string>

namespace aai {

/// Base of every error the simulator raises. `code()` is the stable
/// identifier used on the wire and in logs.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class SimulationDiverged : public Error {
public:
    explicit SimulationDiverged(int part_id)
        : Error("simulation-diverged", "non-finite state in part " + std::to_string(part_id)),
          part_id_(part_id) {}
    int part_id() const noexcept { return part_id_; }

private:
    int part_id_;
};

class SpawnRejected : public Error {
public:
    explicit SpawnRejected(const std::string& why) : Error("spawn-rejected", why) {}
};

class MalformedAction : public Error {
public:
    explicit MalformedAction(const std::string& why) : Error("bad-action", why) {}
};

class InvalidSpec : public Error {
public:
    explicit InvalidSpec(const std::string& rule) : Error("invalid-spec", rule) {}
};

class GenerationFailed : public Error {
public:
    explicit GenerationFailed(const std::string& why) : Error("generation-failed", why) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& why) : Error("config-error", why) {}
};

class EpisodeFinished : public Error {
public:
    EpisodeFinished() : Error("episode-finished", "episode already finished") {}
};

class UnknownCell : public Error {
public:
    explicit UnknownCell(const std::string& cell) : Error("unknown-cell", "cell not enabled: " + cell) {}
};

}  // namespace aai
