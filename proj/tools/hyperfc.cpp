// hyperfc: trim, train, eval, analyze and plot-data subcommands.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hyperfc/cli/config.hpp"
#include "hyperfc/eval/plot_data.hpp"
#include "hyperfc/eval/reports.hpp"
#include "hyperfc/ppo/trainer.hpp"
#include "hyperfc/reference/trim.hpp"

namespace fs = std::filesystem;
using namespace hyperfc;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kConfig = 3, kNumeric = 4, kIo = 5 };

struct UsageError : Error {
    using Error::Error;
};

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw IoError("cannot write '" + p.string() + "'");
    return os;
}

void write_resolved(const fs::path& dir, const RunConfig& cfg, const AirframeParams& ap) {
    fs::create_directories(dir);
    open_out(dir / "config.resolved.json") << run_config_to_json(cfg).dump(2) << '\n';
    auto os = open_out(dir / "airframe.resolved.cfg");
    write_airframe(os, ap);
}

int cmd_trim(double kappa, double gamma, double airspeed, const std::string& airframe) {
    const AirframeParams ap = airframe.empty() ? AirframeParams{} : load_airframe(airframe);
    TrimCondition t;
    try {
        t = solve_trim(ap, kappa, gamma, airspeed);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    const double deg = 180.0 / kPi;
    std::cout << std::setprecision(8) << "kappa        " << t.kappa << " 1/m\n"
              << "gamma        " << t.gamma << " rad\n"
              << "airspeed     " << t.airspeed << " m/s\n"
              << "alpha        " << t.alpha * deg << " deg\n"
              << "beta         " << t.beta * deg << " deg\n"
              << "phi          " << t.phi * deg << " deg\n"
              << "theta        " << t.theta * deg << " deg\n"
              << "turn rate    " << t.turn_rate << " rad/s\n"
              << "rates        " << t.rates.transpose() << " rad/s\n"
              << "elevator     " << t.command[0] << " rad\n"
              << "aileron      " << t.command[1] << " rad\n"
              << "rudder       " << t.command[2] << " rad\n"
              << "throttle     " << t.command[3] << " rev/s\n"
              << "residual     " << t.residual << "\n"
              << "iterations   " << t.iterations << "\n";
    return kOk;
}

struct TrainArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool resume = false;
    int workers = 0;
};

int cmd_train(const TrainArgs& a) {
    RunConfig cfg = load_run_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (!a.out.empty()) cfg.out = a.out;
    if (a.workers > 0) cfg.ppo.workers = a.workers;
    cfg.validate();
    const AirframeParams ap = cfg.airframe_params();
    const fs::path out(cfg.out);
    write_resolved(out, cfg, ap);
    Trainer trainer(ap, cfg.env, cfg.arch_spec(), cfg.ppo, cfg.seed);
    std::cout << "training " << cfg.arch << " (" << trainer.policy().param_count() << " parameters) seed " << cfg.seed
              << " -> " << out.string() << "\n";
    run_training(trainer, out, a.resume, run_config_to_json(cfg), &std::cout);
    std::cout << "final checkpoint: " << TrainOutputs{out}.final_checkpoint().string() << "\n";
    return kOk;
}

struct EvalArgs {
    std::string checkpoint;
    std::string config;
    std::string protocol = "static";
    std::optional<int> episodes;
    std::optional<std::uint64_t> seed;
    std::string out;
    int workers = 0;
    bool stochastic = false;
    bool worst_log = false;
};

/// Config for evaluation: explicit file, else the one embedded in the checkpoint.
RunConfig eval_run_config(const std::string& config, const Json& ckpt) {
    if (!config.empty()) return load_run_config(config);
    if (ckpt.contains("config") && ckpt.at("config").is_object()) return run_config_from_json(ckpt.at("config"));
    return RunConfig{};
}

int cmd_eval(const EvalArgs& a) {
    const Json ckpt = read_json_file(a.checkpoint);
    if (ckpt.value("format", "") != kCheckpointFormat) throw IoError("'" + a.checkpoint + "' is not a checkpoint");
    const Policy policy = policy_from_json(ckpt.at("policy"));
    RunConfig cfg = eval_run_config(a.config, ckpt);
    if (a.episodes) cfg.eval.episodes = *a.episodes;
    if (a.seed) cfg.eval.seed = *a.seed;
    if (a.workers > 0) cfg.eval.workers = a.workers;
    if (a.stochastic) cfg.eval.stochastic = true;
    cfg.validate();
    const EvalProtocol protocol = [&] {
        try {
            return eval_protocol_from_string(a.protocol);
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
    }();
    const AirframeParams ap = cfg.airframe_params();
    const fs::path out = a.out.empty() ? fs::path(cfg.out) / "eval" : fs::path(a.out);
    write_resolved(out, cfg, ap);
    if (cfg.eval.stochastic) std::cout << "note: stochastic policy evaluation\n";

    const EvalReport rep = run_evaluation(policy, ap, cfg.env, protocol, cfg.eval);
    const std::string stem = to_string(protocol);
    {
        auto os = open_out(out / (stem + "_table.csv"));
        write_table_csv(os, {rep});
    }
    {
        auto os = open_out(out / (stem + "_curve.csv"));
        write_curve_csv(os, {rep});
    }
    {
        auto os = open_out(out / (stem + "_episodes.csv"));
        write_episodes_csv(os, rep);
    }
    if (a.worst_log) {
        const auto worst = std::max_element(rep.episodes.begin(), rep.episodes.end(),
                                            [](const auto& x, const auto& y) { return x.maxpe < y.maxpe; });
        Environment env(ap, eval_env_config(cfg.env));
        RolloutOptions ro;
        ro.deterministic = !cfg.eval.stochastic;
        ro.record = true;
        ro.action_seed = mix_seed(worst->seed, 7);
        const EpisodeLog log = run_episode(env, policy, worst->seed, worst->scenario, ro);
        auto os = open_out(out / (stem + "_worst_episode.jsonl"));
        write_episode_jsonl(os, log);
    }
    std::cout << std::setprecision(4) << std::fixed << rep.policy << " " << stem << " (" << rep.episodes.size()
              << " episodes)\n";
    std::cout << "  actuator        n      MPE    MaxPE       WC       SD\n";
    for (const auto& r : rep.rows)
        std::cout << "  " << std::left << std::setw(14) << r.actuator << std::right << std::setw(5) << r.episodes
                  << std::setw(9) << r.mpe_mean << std::setw(9) << r.maxpe_mean << std::setw(9) << r.worst_case
                  << std::setw(9) << r.maxpe_sd << "\n";
    std::cout << "reports written to " << out.string() << "\n";
    return kOk;
}

int cmd_analyze(const std::vector<std::string>& checkpoints, const std::vector<std::string>& archs,
                std::uint64_t seed, const std::string& out) {
    std::vector<ArchitectureSummary> rows;
    for (const auto& c : checkpoints) rows.push_back(summarize(load_policy(c)));
    for (const auto& tag : archs) {
        Policy p(ArchSpec::parse(tag));
        Rng rng(mix_seed(seed, 100));
        p.initialize(rng);
        rows.push_back(summarize(p));
    }
    if (rows.empty()) throw UsageError("analyze needs --checkpoint or --arch");
    write_architecture_csv(std::cout, rows);
    if (!out.empty()) {
        fs::create_directories(out);
        auto os = open_out(fs::path(out) / "architecture.csv");
        write_architecture_csv(os, rows);
        auto ls = open_out(fs::path(out) / "lipschitz_layers.csv");
        ls << "policy,network,layer,spectral_norm\n" << std::setprecision(10);
        for (const auto& r : rows)
            for (const auto& e : r.lipschitz)
                for (std::size_t l = 0; l < e.layer_norms.size(); ++l)
                    ls << r.policy << ',' << e.network << ',' << l << ',' << e.layer_norms[l] << '\n';
    }
    return kOk;
}

int cmd_plot_data(const std::string& log, const std::string& out) {
    std::ifstream is(log);
    if (!is) throw IoError("cannot open episode log '" + log + "'");
    const PlotData d = read_episode_jsonl(is);
    for (const auto& f : write_plot_data(d, out)) std::cout << f.string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fault-tolerant fixed-wing flight control workbench"};
    app.require_subcommand(1);

    double kappa = 0.0, gamma = 0.0, airspeed = 21.0;
    std::string trim_airframe;
    auto* trim = app.add_subcommand("trim", "Solve and print a steady-flight trim");
    trim->add_option("--kappa", kappa, "Horizontal curvature, 1/m")->required();
    trim->add_option("--gamma", gamma, "Flight-path angle, rad")->required();
    trim->add_option("--airspeed", airspeed, "Airspeed, m/s");
    trim->add_option("--airframe", trim_airframe, "Airframe parameter file");

    TrainArgs ta;
    std::uint64_t train_seed = 0;
    auto* train = app.add_subcommand("train", "Train a policy with PPO");
    train->add_option("--config", ta.config, "Run config (JSON)")->required();
    auto* train_seed_opt = train->add_option("--seed", train_seed, "Override the run seed");
    train->add_option("--out", ta.out, "Override the output directory");
    train->add_flag("--resume", ta.resume, "Continue from the latest checkpoint in the output directory");
    train->add_option("--workers", ta.workers, "Rollout worker threads");

    EvalArgs ea;
    int eval_episodes = 0;
    std::uint64_t eval_seed = 0;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint under a failure protocol");
    eval->add_option("--checkpoint", ea.checkpoint, "Checkpoint file")->required();
    eval->add_option("--protocol", ea.protocol, "static or flutter");
    auto* eval_ep_opt = eval->add_option("--episodes", eval_episodes, "Number of episodes");
    auto* eval_seed_opt = eval->add_option("--seed", eval_seed, "Evaluation seed");
    eval->add_option("--config", ea.config, "Run config (defaults to the one stored in the checkpoint)");
    eval->add_option("--out", ea.out, "Report directory");
    eval->add_option("--workers", ea.workers, "Worker threads");
    eval->add_flag("--stochastic", ea.stochastic, "Sample actions instead of using the mean");
    eval->add_flag("--worst-log", ea.worst_log, "Record the worst-case episode as JSON-lines");

    std::vector<std::string> an_ckpts, an_archs;
    std::uint64_t an_seed = 0;
    std::string an_out;
    auto* analyze = app.add_subcommand("analyze", "Parameter count, FLOPs and Lipschitz bounds");
    analyze->add_option("--checkpoint", an_ckpts, "Checkpoint file(s)");
    analyze->add_option("--arch", an_archs, "Architecture tag(s) to analyze at initialization");
    analyze->add_option("--seed", an_seed, "Initialization seed for --arch");
    analyze->add_option("--out", an_out, "Directory for CSV output");

    std::string pd_log, pd_out = "plot_data";
    auto* plot = app.add_subcommand("plot-data", "Convert an episode log to CSV histories");
    plot->add_option("--log", pd_log, "Episode log (JSON-lines)")->required();
    plot->add_option("--out", pd_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*trim) return cmd_trim(kappa, gamma, airspeed, trim_airframe);
        if (*train) {
            if (*train_seed_opt) ta.seed = train_seed;
            return cmd_train(ta);
        }
        if (*eval) {
            if (*eval_ep_opt) ea.episodes = eval_episodes;
            if (*eval_seed_opt) ea.seed = eval_seed;
            return cmd_eval(ea);
        }
        if (*analyze) return cmd_analyze(an_ckpts, an_archs, an_seed, an_out);
        if (*plot) return cmd_plot_data(pd_log, pd_out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
