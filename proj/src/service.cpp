#include "aai/service.hpp"

#include <boost/asio.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace aai {

namespace fs = std::filesystem;
namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

constexpr const char* kModeNames[] = {"random", "curriculum", "serve", "eval", "gen"};
constexpr size_t kMaxLineBytes = 64u << 20;

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

std::string episode_file(std::int64_t index) {
    char name[32];
    std::snprintf(name, sizeof name, "ep_%06lld.jsonl", static_cast<long long>(index));
    return name;
}

// Runs one logged episode; trajectory goes to dir/episodes/ep_NNNNNN.jsonl.
Trajectory logged_episode(const EpisodeConfig& config, const Policy& policy, const fs::path& log_dir,
                          std::int64_t index) {
    if (log_dir.empty()) return run_episode(config, policy);
    std::ofstream out = open_output(log_dir / "episodes" / episode_file(index));
    out << trajectory_header(config) << '\n';
    return run_episode(config, policy, [&](const StepResult& r) { out << trajectory_line(r) << '\n'; });
}

std::uint64_t episode_seed(std::uint64_t master, std::int64_t index) {
    return derive_rng(master + static_cast<std::uint64_t>(index), "episode").next();
}

Json stats_payload(const Cell& cell, const CellStats& s, double z_init) {
    Json j;
    j["task"] = to_string(cell.task);
    j["difficulty"] = cell.difficulty;
    j["count"] = s.count();
    j["mean"] = s.mean();
    j["variance"] = s.variance();
    j["z"] = z_value(s, z_init);
    return j;
}

}  // namespace

std::string to_string(RunMode m) { return kModeNames[static_cast<int>(m)]; }

std::optional<RunMode> parse_run_mode(std::string_view s) {
    for (int i = 0; i < 5; ++i)
        if (s == kModeNames[i]) return static_cast<RunMode>(i);
    return std::nullopt;
}

void RunConfig::validate() const {
    if (tasks.empty()) throw ConfigError("at least one task must be enabled");
    if (min_difficulty < 0 || max_difficulty > 10 || min_difficulty > max_difficulty)
        throw ConfigError("difficulty range must lie within [0, 10] with min <= max");
    if (episodes < 0) throw ConfigError("episodes must be >= 0");
    make_policy(policy, 0);
    curriculum.validate();
    EpisodeConfig probe = episode;
    probe.gen = {tasks.front(), min_difficulty, 0};
    probe.validate();
    if (mode == RunMode::eval && seeds_file.empty()) throw ConfigError("eval needs a seeds file");
    if (transport != "stdio" && transport != "tcp") throw ConfigError("transport must be stdio or tcp");
    if (port < 0 || port > 65535) throw ConfigError("port must lie in [0, 65535]");
    std::vector<TaskId> sorted = tasks;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("duplicate task");
}

std::vector<Cell> RunConfig::cells() const { return cell_grid(tasks, min_difficulty, max_difficulty); }

RunConfig apply_config_json(const Json& j, RunConfig c) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "schema_version") {
            if (*it != 1) throw ConfigError("unsupported config schema_version");
        } else if (k == "mode") {
            const auto m = parse_run_mode(string_field(j, "mode"));
            if (!m) throw ConfigError("unknown mode");
            c.mode = *m;
        } else if (k == "tasks") {
            if (!it->is_array()) throw ConfigError("tasks must be an array of names");
            c.tasks.clear();
            for (const Json& t : *it) {
                const auto task = t.is_string() ? parse_task(t.get<std::string>()) : std::nullopt;
                if (!task) throw ConfigError("unknown task in tasks");
                c.tasks.push_back(*task);
            }
        } else if (k == "min_difficulty") {
            c.min_difficulty = static_cast<int>(integer_field(j, "min_difficulty"));
        } else if (k == "max_difficulty") {
            c.max_difficulty = static_cast<int>(integer_field(j, "max_difficulty"));
        } else if (k == "episode") {
            Json e = *it;
            if (!e.is_object()) throw ConfigError("episode must be an object");
            e["task"] = "L0";
            e["difficulty"] = 0;
            e["seed"] = 0;
            const GenParams keep = c.episode.gen;
            c.episode = decode_episode_config(e, c.episode);
            c.episode.gen = keep;
        } else if (k == "c") {
            c.curriculum.c = number_field(j, "c");
        } else if (k == "z_init") {
            c.curriculum.z_init = number_field(j, "z_init");
        } else if (k == "seed") {
            c.seed = unsigned_field(j, "seed");
        } else if (k == "episodes") {
            c.episodes = integer_field(j, "episodes");
        } else if (k == "policy") {
            c.policy = string_field(j, "policy");
        } else if (k == "seeds_file") {
            c.seeds_file = string_field(j, "seeds_file");
        } else if (k == "log_dir") {
            c.log_dir = string_field(j, "log_dir");
        } else if (k == "output") {
            c.output = string_field(j, "output");
        } else if (k == "resume") {
            c.resume = string_field(j, "resume");
        } else if (k == "transport") {
            c.transport = string_field(j, "transport");
        } else if (k == "host") {
            c.host = string_field(j, "host");
        } else if (k == "port") {
            c.port = static_cast<int>(integer_field(j, "port"));
        } else {
            throw ConfigError("unknown config key '" + k + "'");
        }
    }
    return c;
}

RunConfig load_config_file(const fs::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return apply_config_json(j, std::move(base));
}

Policy make_policy(const std::string& name, std::uint64_t seed) {
    if (name == "zero") return zero_policy();
    if (name == "random") return random_policy(seed);
    if (name == "teleport") return teleport_policy();
    throw ConfigError("unknown policy '" + name + "' (zero, random, teleport)");
}

Cell SharedCurriculum::next() {
    std::lock_guard lock(mutex_);
    return curriculum_.sample_next();
}

CellStats SharedCurriculum::record(const Cell& cell, double reward) {
    std::lock_guard lock(mutex_);
    return curriculum_.record(cell, reward);
}

std::string SharedCurriculum::checkpoint() const {
    std::lock_guard lock(mutex_);
    return curriculum_.checkpoint();
}

Session::Session(const RunConfig& config, SharedCurriculum* curriculum) : config_(config), curriculum_(curriculum) {}

Response Session::dispatch(const Request& request) {
    if (const auto* r = std::get_if<ResetRequest>(&request)) {
        const Observation obs = episode_.reset(r->config);
        Json p;
        p["observation"] = encode(obs);
        p["config"] = encode(r->config);
        p["action_size"] = kActionSize;
        return Response::success(std::move(p));
    }
    if (const auto* r = std::get_if<StepRequest>(&request)) {
        if (!episode_.started()) return Response::failure("no-episode", "step before reset");
        return Response::success(encode(episode_.step(r->action)));
    }
    if (std::holds_alternative<CurriculumNextRequest>(request)) {
        if (!curriculum_) return Response::failure("no-curriculum", "server runs without a curriculum");
        const Cell c = curriculum_->next();
        return Response::success(Json{{"task", to_string(c.task)}, {"difficulty", c.difficulty}});
    }
    if (const auto* r = std::get_if<RecordResultRequest>(&request)) {
        if (!curriculum_) return Response::failure("no-curriculum", "server runs without a curriculum");
        if (!std::isfinite(r->reward)) return Response::failure("bad-request", "reward must be finite");
        const CellStats s = curriculum_->record(r->cell, r->reward);
        return Response::success(stats_payload(r->cell, s, config_.curriculum.z_init));
    }
    if (const auto* r = std::get_if<EvalRequest>(&request)) {
        return Response::success(evaluate(r->seeds, r->policy, config_.episode).to_json());
    }
    closed_ = true;
    return Response::success(Json::object());
}

std::string Session::handle(const std::string& line) {
    Response resp;
    try {
        resp = dispatch(parse_request(line, config_.episode));
    } catch (const ProtocolError& e) {
        // A step without an episode is reported as such whatever its action.
        if (e.code() == "bad-action" && !episode_.started()) resp = Response::failure("no-episode", "step before reset");
        else resp = Response::failure(e.code(), e.what());
    } catch (const Error& e) {
        resp = Response::failure(e.code(), e.what());
    } catch (const std::exception& e) {
        resp = Response::failure("internal", e.what());
    }
    return serialize(resp);
}

void serve_stream(std::istream& in, std::ostream& out, const RunConfig& config, SharedCurriculum* curriculum) {
    Session session(config, curriculum);
    std::string line;
    while (!session.closed() && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out << session.handle(line) << '\n' << std::flush;
    }
}

struct TcpServer::Impl {
    RunConfig config;
    SharedCurriculum* curriculum;
    asio::io_context io;
    tcp::acceptor acceptor{io};
    std::atomic<bool> stopping{false};
    std::mutex mutex;
    std::vector<std::shared_ptr<tcp::socket>> sockets;
    std::vector<std::thread> workers;

    void serve(std::shared_ptr<tcp::socket> sock) {
        Session session(config, curriculum);
        asio::streambuf buf(kMaxLineBytes);
        boost::system::error_code ec;
        while (!session.closed()) {
            asio::read_until(*sock, buf, '\n', ec);
            if (ec == asio::error::not_found) {
                const std::string resp = serialize(Response::failure("bad-request", "line too long")) + "\n";
                asio::write(*sock, asio::buffer(resp), ec);
                break;
            }
            if (ec) break;
            std::istream is(&buf);
            std::string line;
            std::getline(is, line);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::string resp = session.handle(line) + "\n";
            asio::write(*sock, asio::buffer(resp), ec);
            if (ec) break;
        }
        sock->shutdown(tcp::socket::shutdown_both, ec);
        sock->close(ec);
    }
};

TcpServer::TcpServer(const RunConfig& config, SharedCurriculum* curriculum) : impl_(std::make_unique<Impl>()) {
    impl_->config = config;
    impl_->curriculum = curriculum;
    boost::system::error_code ec;
    const auto address = asio::ip::make_address(config.host, ec);
    if (ec) throw ConfigError("bad host address '" + config.host + "'");
    const tcp::endpoint ep(address, static_cast<unsigned short>(config.port));
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(ep, ec);
    if (ec) throw std::runtime_error("cannot bind " + config.host + ":" + std::to_string(config.port) + ": " + ec.message());
    impl_->acceptor.listen();
}

TcpServer::~TcpServer() {
    stop();
    for (std::thread& t : impl_->workers)
        if (t.joinable()) t.join();
}

int TcpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void TcpServer::run() {
    while (!impl_->stopping) {
        auto sock = std::make_shared<tcp::socket>(impl_->io);
        boost::system::error_code ec;
        impl_->acceptor.accept(*sock, ec);
        if (impl_->stopping) break;
        if (ec) continue;
        std::lock_guard lock(impl_->mutex);
        impl_->sockets.push_back(sock);
        impl_->workers.emplace_back([this, sock] { impl_->serve(sock); });
    }
}

void TcpServer::stop() {
    if (impl_->stopping.exchange(true)) return;
    boost::system::error_code ec;
    // Wake a blocking accept with a throwaway connection.
    {
        asio::io_context io;
        tcp::socket poke(io);
        poke.connect(tcp::endpoint(asio::ip::make_address("127.0.0.1"), static_cast<unsigned short>(port())), ec);
    }
    std::lock_guard lock(impl_->mutex);
    for (const auto& s : impl_->sockets) s->shutdown(tcp::socket::shutdown_both, ec);
}

std::string summary_line(const EpisodeSummary& s) {
    Json j;
    j["task"] = to_string(s.cell.task);
    j["difficulty"] = s.cell.difficulty;
    j["seed"] = s.seed;
    j["total_reward"] = s.total_reward;
    j["reason"] = to_string(s.reason);
    j["steps"] = s.steps;
    if (!s.error.empty()) j["error"] = s.error;
    return j.dump();
}

std::vector<EpisodeSummary> run_random(const RunConfig& config) {
    config.validate();
    const std::vector<Cell> cells = config.cells();
    Rng rng = derive_rng(config.seed, "random-mode");
    std::ofstream trace;
    if (!config.log_dir.empty()) trace = open_output(config.log_dir / "trace.jsonl");

    std::vector<EpisodeSummary> out;
    for (std::int64_t e = 0; e < config.episodes; ++e) {
        EpisodeSummary s;
        s.cell = cells[static_cast<size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cells.size()) - 1))];
        s.seed = rng.next();
        EpisodeConfig ec = config.episode;
        ec.gen = {s.cell.task, s.cell.difficulty, s.seed};
        try {
            const Trajectory t = logged_episode(ec, make_policy(config.policy, s.seed), config.log_dir, e);
            s.total_reward = t.total_reward;
            s.reason = t.reason;
            s.steps = static_cast<std::int64_t>(t.steps.size());
        } catch (const Error& err) {
            s.error = err.code() + ": " + err.what();
        }
        if (trace) trace << summary_line(s) << '\n';
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<TraceEntry> run_curriculum(const RunConfig& config, Curriculum& curriculum) {
    config.validate();
    std::int64_t offset = 0;
    for (const Cell& c : curriculum.cells()) offset += curriculum.stats(c).count();
    std::ofstream trace;
    if (!config.log_dir.empty()) trace = open_output(config.log_dir / "curriculum_trace.jsonl");

    const CellRunner runner = [&](const Cell& cell, std::int64_t e) {
        const std::uint64_t seed = episode_seed(config.seed, offset + e);
        EpisodeConfig ec = config.episode;
        ec.gen = {cell.task, cell.difficulty, seed};
        return logged_episode(ec, make_policy(config.policy, seed), config.log_dir, offset + e).total_reward;
    };
    std::vector<TraceEntry> entries = train_loop(curriculum, runner, config.episodes, [&](const TraceEntry& t) {
        if (trace) trace << trace_line(t) << '\n';
    });
    if (!config.output.empty()) open_output(config.output) << curriculum.checkpoint() << '\n';
    return entries;
}

bool is_success(Termination t) {
    return t == Termination::green_consumed || t == Termination::all_sector_food_consumed;
}

std::vector<GenParams> load_seeds(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read seeds file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); })) return {};
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ConfigError("seeds file " + path.string() + ": " + e.what());
    }
    if (j.is_object()) {
        if (j.contains("schema_version") && j["schema_version"] != 1)
            throw ConfigError("unsupported seeds schema_version");
        return decode_seed_list(require(j, "seeds"));
    }
    return decode_seed_list(j);
}

EvalReport evaluate(const std::vector<GenParams>& seeds, const std::string& policy, const EpisodeConfig& base) {
    make_policy(policy, 0);
    struct Acc {
        std::int64_t n = 0, wins = 0, errors = 0;
        double reward = 0.0;
    };
    std::map<Cell, Acc> acc;
    for (const GenParams& g : seeds) {
        EpisodeConfig ec = base;
        ec.gen = g;
        Acc& a = acc[{g.task, g.difficulty}];
        ++a.n;
        try {
            const Trajectory t = run_episode(ec, make_policy(policy, g.seed));
            a.reward += t.total_reward;
            a.wins += is_success(t.reason) ? 1 : 0;
        } catch (const Error&) {
            ++a.errors;
        }
    }
    EvalReport report;
    report.policy = policy;
    for (const auto& [cell, a] : acc)
        report.rows.push_back({cell, a.n, a.reward / static_cast<double>(a.n),
                               static_cast<double>(a.wins) / static_cast<double>(a.n), a.errors});
    return report;
}

Json EvalReport::to_json() const {
    Json j;
    j["schema_version"] = 1;
    j["policy"] = policy;
    Json rs = Json::array();
    std::int64_t n = 0;
    double reward = 0.0, wins = 0.0;
    for (const EvalRow& r : rows) {
        rs.push_back(Json{{"task", to_string(r.cell.task)},
                          {"difficulty", r.cell.difficulty},
                          {"episodes", r.episodes},
                          {"mean_reward", r.mean_reward},
                          {"success_rate", r.success_rate},
                          {"errors", r.errors}});
        n += r.episodes;
        reward += r.mean_reward * static_cast<double>(r.episodes);
        wins += r.success_rate * static_cast<double>(r.episodes);
    }
    j["rows"] = std::move(rs);
    j["overall"] = Json{{"episodes", n},
                        {"mean_reward", n ? reward / static_cast<double>(n) : 0.0},
                        {"success_rate", n ? wins / static_cast<double>(n) : 0.0}};
    return j;
}

std::string EvalReport::table() const {
    std::ostringstream os;
    os << std::left << std::setw(6) << "task" << std::right << std::setw(4) << "d" << std::setw(10) << "episodes"
       << std::setw(14) << "mean_reward" << std::setw(10) << "success" << std::setw(8) << "errors" << '\n';
    os << std::fixed;
    for (const EvalRow& r : rows)
        os << std::left << std::setw(6) << to_string(r.cell.task) << std::right << std::setw(4) << r.cell.difficulty
           << std::setw(10) << r.episodes << std::setw(14) << std::setprecision(4) << r.mean_reward << std::setw(10)
           << std::setprecision(3) << r.success_rate << std::setw(8) << r.errors << '\n';
    return os.str();
}

}  // namespace aai
