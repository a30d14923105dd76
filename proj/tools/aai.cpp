// aai: command-line front end.
//   aai gen --task L3 --difficulty 4 --seed 7
//   aai run-random --episodes 100 --tasks L0,L1 --log-dir runs/a
//   aai run-curriculum --episodes 1000 --output ckpt.json
//   aai serve [--transport tcp --port 5555]
//   aai eval --seeds data/reserved_seeds.json --policy teleport
// Precedence: flags > AAI_PORT / AAI_LOG_DIR > --config file > defaults.
// Exit codes: 0 ok, 2 configuration error, 3 runtime error.

#include "aai/levels.hpp"
#include "aai/service.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <vector>

using namespace aai;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> list;

    template <typename T>
    void add(CLI::App* app, const std::string& name, const std::string& help, std::function<void(RunConfig&, const T&)> apply) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app->add_option(name, *value, help);
        list.emplace_back(opt, [value, apply](RunConfig& c) { apply(c, *value); });
    }

    void flag(CLI::App* app, const std::string& name, const std::string& help, std::function<void(RunConfig&)> apply) {
        list.emplace_back(app->add_flag(name, help), std::move(apply));
    }

    void apply(RunConfig& c) const {
        for (const auto& [opt, f] : list)
            if (opt->count() > 0) f(c);
    }
};

std::vector<TaskId> parse_task_list(const std::vector<std::string>& names) {
    std::vector<TaskId> out;
    for (const std::string& n : names) {
        const auto t = parse_task(n);
        if (!t) throw ConfigError("unknown task '" + n + "'");
        out.push_back(*t);
    }
    return out;
}

void add_run_options(CLI::App* app, Overrides& o) {
    o.add<std::vector<std::string>>(app, "--tasks", "Enabled tasks, comma separated (default all)",
                                    [](RunConfig& c, const auto& v) { c.tasks = parse_task_list(v); });
    app->get_option("--tasks")->delimiter(',');
    o.add<int>(app, "--dmin", "Lowest enabled difficulty", [](RunConfig& c, const int& v) { c.min_difficulty = v; });
    o.add<int>(app, "--dmax", "Highest enabled difficulty", [](RunConfig& c, const int& v) { c.max_difficulty = v; });
    o.add<std::uint64_t>(app, "--seed", "Master seed", [](RunConfig& c, const std::uint64_t& v) { c.seed = v; });
    o.add<std::int64_t>(app, "--episodes", "Episode budget", [](RunConfig& c, const std::int64_t& v) { c.episodes = v; });
    o.add<std::string>(app, "--policy", "Built-in policy: zero, random, teleport",
                       [](RunConfig& c, const std::string& v) { c.policy = v; });
    o.add<std::string>(app, "--log-dir", "Directory for trajectories and traces",
                       [](RunConfig& c, const std::string& v) { c.log_dir = v; });
}

void add_episode_options(CLI::App* app, Overrides& o) {
    o.add<int>(app, "--maxsteps", "Steps per episode", [](RunConfig& c, const int& v) { c.episode.maxsteps = v; });
    o.add<std::string>(app, "--action-mode", "rotation or velocity", [](RunConfig& c, const std::string& v) {
        if (v == "rotation") c.episode.action_mode.mode = MotorMode::rotation;
        else if (v == "velocity") c.episode.action_mode.mode = MotorMode::velocity;
        else throw ConfigError("action mode must be rotation or velocity");
    });
    o.add<double>(app, "--omega-max", "Velocity-mode joint speed limit, deg/s",
                  [](RunConfig& c, const double& v) { c.episode.action_mode.omega_max = v; });
    o.add<int>(app, "--rays-per-side", "Rays each side of forward", [](RunConfig& c, const int& v) {
        if (!c.episode.raycast) c.episode.raycast = RaycastConfig{};
        c.episode.raycast->rays_per_side = v;
    });
    o.add<double>(app, "--viewing-angle", "Raycast half-angle, degrees", [](RunConfig& c, const double& v) {
        if (!c.episode.raycast) c.episode.raycast = RaycastConfig{};
        c.episode.raycast->viewing_angle = v;
    });
    o.flag(app, "--no-raycast", "Disable the raycast sensor", [](RunConfig& c) { c.episode.raycast.reset(); });
    o.add<int>(app, "--camera", "Enable the camera at this resolution", [](RunConfig& c, const int& v) {
        if (!c.episode.camera) c.episode.camera = CameraConfig{};
        c.episode.camera->resolution = v;
    });
    o.flag(app, "--grayscale", "Single-channel camera", [](RunConfig& c) {
        if (!c.episode.camera) c.episode.camera = CameraConfig{};
        c.episode.camera->grayscale = true;
    });
    o.flag(app, "--joint-velocities", "Append joint velocities to proprioception",
           [](RunConfig& c) { c.episode.observe_joint_velocities = true; });
}

void add_curriculum_options(CLI::App* app, Overrides& o) {
    o.add<double>(app, "--c", "Smoothing constant c", [](RunConfig& c, const double& v) { c.curriculum.c = v; });
    o.add<double>(app, "--z-init", "z for cells with fewer than two samples",
                  [](RunConfig& c, const double& v) { c.curriculum.z_init = v; });
}

void apply_env(RunConfig& c) {
    if (const char* port = std::getenv("AAI_PORT")) {
        try {
            size_t used = 0;
            c.port = std::stoi(port, &used);
            if (used != std::string(port).size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError(std::string("AAI_PORT is not a port number: ") + port);
        }
    }
    if (const char* dir = std::getenv("AAI_LOG_DIR")) c.log_dir = dir;
}

Curriculum make_curriculum(const RunConfig& c) {
    if (!c.resume.empty()) {
        std::ifstream in(c.resume);
        if (!in) throw ConfigError("cannot read checkpoint " + c.resume.string());
        const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return Curriculum::restore(text);
    }
    return Curriculum(c.cells(), c.curriculum, c.seed);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Animal-cognition arena simulator"};
    app.require_subcommand(1);
    std::string config_file;
    app.add_option("--config", config_file, "JSON config file (flags override it)");

    Overrides o;
    GenParams gen;
    std::string gen_task = "L0";
    bool pretty = false;
    CLI::App* gen_cmd = app.add_subcommand("gen", "Print a generated arena as JSON");
    gen_cmd->add_option("--task", gen_task, "Task id L0..L11")->required();
    gen_cmd->add_option("--difficulty", gen.difficulty, "0..10")->required();
    gen_cmd->add_option("--seed", gen.seed, "Seed");
    gen_cmd->add_flag("--pretty", pretty, "Indent the output");

    CLI::App* random_cmd = app.add_subcommand("run-random", "Uniformly random task per episode");
    add_run_options(random_cmd, o);
    add_episode_options(random_cmd, o);

    CLI::App* cur_cmd = app.add_subcommand("run-curriculum", "Variance-driven curriculum run");
    add_run_options(cur_cmd, o);
    add_episode_options(cur_cmd, o);
    add_curriculum_options(cur_cmd, o);
    o.add<std::string>(cur_cmd, "--output", "Write the final checkpoint here",
                       [](RunConfig& c, const std::string& v) { c.output = v; });
    o.add<std::string>(cur_cmd, "--resume", "Continue from a checkpoint",
                       [](RunConfig& c, const std::string& v) { c.resume = v; });

    CLI::App* serve_cmd = app.add_subcommand("serve", "JSON-lines session server");
    add_episode_options(serve_cmd, o);
    add_curriculum_options(serve_cmd, o);
    o.add<std::vector<std::string>>(serve_cmd, "--tasks", "Cells offered by curriculum_next",
                                    [](RunConfig& c, const auto& v) { c.tasks = parse_task_list(v); });
    serve_cmd->get_option("--tasks")->delimiter(',');
    o.add<int>(serve_cmd, "--dmin", "Lowest curriculum difficulty", [](RunConfig& c, const int& v) { c.min_difficulty = v; });
    o.add<int>(serve_cmd, "--dmax", "Highest curriculum difficulty", [](RunConfig& c, const int& v) { c.max_difficulty = v; });
    o.add<std::uint64_t>(serve_cmd, "--seed", "Curriculum seed", [](RunConfig& c, const std::uint64_t& v) { c.seed = v; });
    o.add<std::string>(serve_cmd, "--transport", "stdio or tcp", [](RunConfig& c, const std::string& v) { c.transport = v; });
    o.add<std::string>(serve_cmd, "--host", "TCP bind address", [](RunConfig& c, const std::string& v) { c.host = v; });
    o.add<int>(serve_cmd, "--port", "TCP port", [](RunConfig& c, const int& v) { c.port = v; });

    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a policy on reserved seeds");
    add_episode_options(eval_cmd, o);
    o.add<std::string>(eval_cmd, "--seeds", "Seeds file", [](RunConfig& c, const std::string& v) { c.seeds_file = v; });
    o.add<std::string>(eval_cmd, "--policy", "Built-in policy: zero, random, teleport",
                       [](RunConfig& c, const std::string& v) { c.policy = v; });
    o.add<std::string>(eval_cmd, "--output", "Write the JSON report here",
                       [](RunConfig& c, const std::string& v) { c.output = v; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        RunConfig cfg;
        if (!config_file.empty()) cfg = load_config_file(config_file, cfg);
        apply_env(cfg);
        o.apply(cfg);

        if (gen_cmd->parsed()) {
            const auto task = parse_task(gen_task);
            if (!task) throw ConfigError("unknown task '" + gen_task + "'");
            gen.task = *task;
            std::cout << serialize(generate(gen), pretty ? 2 : -1) << '\n';
            return 0;
        }
        if (random_cmd->parsed()) {
            cfg.mode = RunMode::random;
            cfg.validate();
            for (const EpisodeSummary& s : run_random(cfg)) std::cout << summary_line(s) << '\n';
            return 0;
        }
        if (cur_cmd->parsed()) {
            cfg.mode = RunMode::curriculum;
            cfg.validate();
            Curriculum cur = make_curriculum(cfg);
            for (const TraceEntry& t : run_curriculum(cfg, cur)) std::cout << trace_line(t) << '\n';
            return 0;
        }
        if (serve_cmd->parsed()) {
            cfg.mode = RunMode::serve;
            cfg.validate();
            SharedCurriculum shared(Curriculum(cfg.cells(), cfg.curriculum, cfg.seed));
            if (cfg.transport == "stdio") {
                std::ios::sync_with_stdio(false);
                serve_stream(std::cin, std::cout, cfg, &shared);
            } else {
                TcpServer server(cfg, &shared);
                std::cerr << "listening on " << cfg.host << ":" << server.port() << std::endl;
                server.run();
            }
            return 0;
        }
        if (eval_cmd->parsed()) {
            cfg.mode = RunMode::eval;
            cfg.validate();
            const EvalReport report = evaluate(load_seeds(cfg.seeds_file), cfg.policy, cfg.episode);
            const std::string json = report.to_json().dump(2);
            if (!cfg.output.empty()) {
                std::ofstream out(cfg.output);
                if (!out) throw ConfigError("cannot write " + cfg.output.string());
                out << json << '\n';
            }
            std::cout << report.table();
            if (cfg.output.empty()) std::cout << json << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
