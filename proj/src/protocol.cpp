#include "aai/protocol.hpp"

namespace aai {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

Json header(const char* cmd) {
    Json j;
    j["schema_version"] = kWireSchemaVersion;
    j["cmd"] = cmd;
    return j;
}

// Field errors surface as bad-request rather than config-error.
template <typename F>
auto as_request(F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ProtocolError("bad-request", e.what());
    }
}

Cell decode_cell(const Json& j) {
    const GenParams g = decode_gen(Json{{"task", require(j, "task")}, {"difficulty", require(j, "difficulty")}, {"seed", 0}});
    return {g.task, g.difficulty};
}

}  // namespace

std::vector<GenParams> decode_seed_list(const Json& list) {
    if (!list.is_array()) throw ConfigError("seed list must be an array");
    std::vector<GenParams> out;
    out.reserve(list.size());
    for (const Json& e : list) out.push_back(decode_gen(e));
    return out;
}

Request parse_request(const std::string& line, const EpisodeConfig& defaults) {
    Json j;
    try {
        j = Json::parse(line);
    } catch (const Json::exception& e) {
        throw ProtocolError("bad-json", e.what());
    }
    if (!j.is_object()) throw ProtocolError("bad-request", "request must be a JSON object");
    if (j.contains("schema_version") && j["schema_version"] != kWireSchemaVersion)
        throw ProtocolError("bad-request", "unsupported schema_version");
    const auto cmd_it = j.find("cmd");
    if (cmd_it == j.end() || !cmd_it->is_string()) throw ProtocolError("unknown-cmd", "missing 'cmd'");
    const std::string cmd = cmd_it->get<std::string>();

    if (cmd == "reset") return as_request([&] { return Request{ResetRequest{decode_episode_config(j, defaults)}}; });
    if (cmd == "step") {
        const auto it = j.find("action");
        if (it == j.end() || !it->is_array()) throw ProtocolError("bad-action", "step needs an 'action' array");
        StepRequest r;
        for (const Json& x : *it) {
            if (!x.is_number()) throw ProtocolError("bad-action", "action entries must be numbers");
            r.action.push_back(x.get<double>());
        }
        if (r.action.size() != static_cast<size_t>(kActionSize))
            throw ProtocolError("bad-action", "action must have " + std::to_string(kActionSize) + " entries, got " +
                                                  std::to_string(r.action.size()));
        return r;
    }
    if (cmd == "curriculum_next") return CurriculumNextRequest{};
    if (cmd == "record_result")
        return as_request([&] { return Request{RecordResultRequest{decode_cell(j), number_field(j, "reward")}}; });
    if (cmd == "eval") {
        return as_request([&] {
            EvalRequest r;
            r.seeds = decode_seed_list(require(j, "seeds"));
            if (j.contains("policy")) r.policy = string_field(j, "policy");
            return Request{std::move(r)};
        });
    }
    if (cmd == "close") return CloseRequest{};
    throw ProtocolError("unknown-cmd", "unknown cmd '" + cmd + "'");
}

std::string serialize(const Request& request) {
    const Json j = std::visit(
        Overloaded{
            [](const ResetRequest& r) {
                Json j = header("reset");
                const Json config = encode(r.config);
                for (auto it = config.begin(); it != config.end(); ++it) j[it.key()] = *it;
                return j;
            },
            [](const StepRequest& r) {
                Json j = header("step");
                j["action"] = r.action;
                return j;
            },
            [](const CurriculumNextRequest&) { return header("curriculum_next"); },
            [](const RecordResultRequest& r) {
                Json j = header("record_result");
                j["task"] = to_string(r.cell.task);
                j["difficulty"] = r.cell.difficulty;
                j["reward"] = r.reward;
                return j;
            },
            [](const EvalRequest& r) {
                Json j = header("eval");
                Json seeds = Json::array();
                for (const GenParams& g : r.seeds) seeds.push_back(encode(g));
                j["seeds"] = std::move(seeds);
                j["policy"] = r.policy;
                return j;
            },
            [](const CloseRequest&) { return header("close"); },
        },
        request);
    return j.dump();
}

Response Response::success(Json payload) {
    Response r;
    r.payload = std::move(payload);
    return r;
}

Response Response::failure(std::string code, std::string message) {
    Response r;
    r.ok = false;
    r.payload = Json::object();
    r.code = std::move(code);
    r.message = std::move(message);
    return r;
}

std::string serialize(const Response& r) {
    Json j;
    j["schema_version"] = kWireSchemaVersion;
    j["ok"] = r.ok;
    if (r.ok) j["payload"] = r.payload;
    else j["error"] = Json{{"code", r.code}, {"message", r.message}};
    return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

Response parse_response(const std::string& line) {
    Json j;
    try {
        j = Json::parse(line);
    } catch (const Json::exception& e) {
        throw ProtocolError("bad-json", e.what());
    }
    try {
        if (bool_field(j, "ok")) return Response::success(require(j, "payload"));
        const Json& err = require(j, "error");
        return Response::failure(string_field(err, "code"), string_field(err, "message"));
    } catch (const ConfigError& e) {
        throw ProtocolError("bad-request", e.what());
    }
}

}  // namespace aai
