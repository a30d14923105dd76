#pragma once

// JSON-lines wire messages. Requests carry "cmd"; responses are
// {"schema_version":1,"ok":true,"payload":{...}} or
// {"schema_version":1,"ok":false,"error":{"code":..., "message":...}}.

#include "aai/codec.hpp"
#include "aai/curriculum.hpp"
#include "aai/errors.hpp"

#include <string>
#include <variant>
#include <vector>

namespace aai {

inline constexpr int kWireSchemaVersion = 1;

struct ResetRequest {
    EpisodeConfig config;
    bool operator==(const ResetRequest&) const = default;
};
struct StepRequest {
    std::vector<double> action;
    bool operator==(const StepRequest&) const = default;
};
struct CurriculumNextRequest {
    bool operator==(const CurriculumNextRequest&) const = default;
};
struct RecordResultRequest {
    Cell cell;
    double reward = 0.0;
    bool operator==(const RecordResultRequest&) const = default;
};
struct EvalRequest {
    std::vector<GenParams> seeds;
    std::string policy = "zero";
    bool operator==(const EvalRequest&) const = default;
};
struct CloseRequest {
    bool operator==(const CloseRequest&) const = default;
};

using Request =
    std::variant<ResetRequest, StepRequest, CurriculumNextRequest, RecordResultRequest, EvalRequest, CloseRequest>;

/// Rejected request line; code() is the wire error code
/// (bad-json, bad-request, unknown-cmd, bad-action).
class ProtocolError : public Error {
public:
    ProtocolError(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

/// Unknown fields are ignored. Reset fields absent from the line take their
/// values from `defaults`.
Request parse_request(const std::string& line, const EpisodeConfig& defaults = {});
/// Canonical single-line form (every field written).
std::string serialize(const Request& request);

struct Response {
    bool ok = true;
    Json payload = Json::object();
    std::string code;
    std::string message;

    static Response success(Json payload);
    static Response failure(std::string code, std::string message);
    bool operator==(const Response&) const = default;
};

std::string serialize(const Response& response);
/// Throws ProtocolError.
Response parse_response(const std::string& line);

/// [{"task","difficulty","seed"}, ...]; throws ConfigError.
std::vector<GenParams> decode_seed_list(const Json& list);

}  // namespace aai
