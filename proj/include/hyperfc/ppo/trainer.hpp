// Rollout collection over parallel environments and the PPO training loop.
#pragma once

#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hyperfc/eval/episode.hpp"
#include "hyperfc/ppo/checkpoint.hpp"
#include "hyperfc/ppo/update.hpp"

namespace hyperfc {

struct EpisodeSummary {
    int iteration = 0;
    int env = 0;
    std::uint64_t seed = 0;
    double total_reward = 0.0;
    int length = 0;
    Termination cause = Termination::None;
    ScenarioSpec scenario;
};

inline Json episode_summary_to_json(const EpisodeSummary& e) {
    return {{"iteration", e.iteration},
            {"env", e.env},
            {"seed", e.seed},
            {"total_reward", e.total_reward},
            {"length", e.length},
            {"cause", to_string(e.cause)},
            {"scenario", scenario_to_json(e.scenario)}};
}

struct IterationLog {
    int iteration = 0;
    long long total_steps = 0;
    int episodes = 0;
    double mean_reward = std::numeric_limits<double>::quiet_NaN();  // mean episode return
    double mean_length = std::numeric_limits<double>::quiet_NaN();
    double step_reward = 0.0;  // mean per-step reward in the rollout
    UpdateStats stats;
    double eval_reward = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;  // wall time, kept out of the deterministic log
    std::vector<EpisodeSummary> finished;
};

class Trainer {
public:
    Trainer(AirframeParams ap, EnvConfig env_cfg, ArchSpec arch, PPOConfig cfg, std::uint64_t seed)
        : cfg_(cfg), seed_(seed), policy_(arch), update_rng_(mix_seed(seed, 101)) {
        cfg_.validate();
        auto trims = std::make_shared<const TrimTable>(ap, env_cfg.airspeed);
        Rng init_rng(mix_seed(seed, 100));
        policy_.initialize(init_rng);
        opt_ = Adam(policy_.params().size(), AdamConfig{cfg_.lr});
        slots_.reserve(static_cast<std::size_t>(cfg_.n_env));
        for (int e = 0; e < cfg_.n_env; ++e) {
            Slot s{Environment(ap, env_cfg, trims), Rng(mix_seed(seed, 1000 + static_cast<std::uint64_t>(e))),
                   Rng(mix_seed(seed, 2000 + static_cast<std::uint64_t>(e))), 0.0, 0};
            s.env.reset(s.seed_rng.next_u64());
            slots_.push_back(std::move(s));
        }
        eval_env_ = std::make_unique<Environment>(ap, env_cfg, trims);
    }

    const Policy& policy() const { return policy_; }
    Policy& policy() { return policy_; }
    const PPOConfig& config() const { return cfg_; }
    int iteration() const { return iteration_; }
    long long total_steps() const { return total_steps_; }
    const Adam& optimizer() const { return opt_; }

    /// Fills the buffer with n_steps transitions per environment. Buffer columns
    /// and finished-episode order depend only on environment index.
    RolloutBuffer collect(std::vector<EpisodeSummary>& finished) {
        RolloutBuffer buf(cfg_.n_env, cfg_.n_steps, policy_.spec().state_dim, policy_.spec().fail_dim,
                          policy_.spec().action_dim);
        std::vector<std::vector<EpisodeSummary>> per_env(slots_.size());
        std::vector<std::exception_ptr> errors(slots_.size());
        auto work = [&](int w) {
            for (int e = w; e < cfg_.n_env; e += cfg_.workers) {
                try {
                    collect_env(e, buf, per_env[static_cast<std::size_t>(e)]);
                } catch (...) {
                    errors[static_cast<std::size_t>(e)] = std::current_exception();
                }
            }
        };
        if (cfg_.workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < cfg_.workers; ++w) pool.emplace_back(work, w);
            for (auto& t : pool) t.join();
        }
        for (std::size_t e = 0; e < errors.size(); ++e) {
            if (!errors[e]) continue;
            try {
                std::rethrow_exception(errors[e]);
            } catch (const ProtocolError& ex) {
                throw ProtocolError("environment " + std::to_string(e) + ": " + ex.what());
            } catch (const NumericError& ex) {
                throw NumericError("environment " + std::to_string(e) + ": " + ex.what());
            }
        }
        for (auto& v : per_env)
            for (auto& ep : v) finished.push_back(std::move(ep));
        return buf;
    }

    /// collect, GAE, update; returns the iteration record.
    IterationLog iterate() {
        const auto t0 = std::chrono::steady_clock::now();
        IterationLog log;
        log.iteration = iteration_ + 1;
        RolloutBuffer buf = collect(log.finished);
        for (auto& ep : log.finished) ep.iteration = log.iteration;
        compute_gae(buf, cfg_.gamma, cfg_.gae_lambda);
        log.stats = ppo_update(policy_, opt_, buf, cfg_, update_rng_);
        ++iteration_;
        total_steps_ += buf.size();
        log.total_steps = total_steps_;
        log.episodes = static_cast<int>(log.finished.size());
        log.step_reward = buf.rewards.mean();
        if (!log.finished.empty()) {
            double r = 0.0, l = 0.0;
            for (const auto& ep : log.finished) {
                r += ep.total_reward;
                l += ep.length;
            }
            log.mean_reward = r / static_cast<double>(log.finished.size());
            log.mean_length = l / static_cast<double>(log.finished.size());
        }
        if (cfg_.eval_interval > 0 && iteration_ % cfg_.eval_interval == 0) log.eval_reward = evaluate();
        log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return log;
    }

    /// Mean return of deterministic episodes on fixed seeds.
    double evaluate() {
        if (cfg_.eval_episodes == 0) return std::numeric_limits<double>::quiet_NaN();
        double sum = 0.0;
        for (int i = 0; i < cfg_.eval_episodes; ++i)
            sum += run_episode(*eval_env_, policy_, mix_seed(seed_, 5000 + static_cast<std::uint64_t>(i)))
                       .total_reward;
        return sum / cfg_.eval_episodes;
    }

    Json checkpoint(const Json& run_config = nullptr) const {
        Json envs = Json::array();
        for (const auto& s : slots_)
            envs.push_back({{"env", s.env.save_state()},
                            {"seed_rng", s.seed_rng.serialize()},
                            {"action_rng", s.action_rng.serialize()},
                            {"ep_return", s.ep_return},
                            {"ep_length", s.ep_length}});
        return {{"format", kCheckpointFormat},
                {"version", kCheckpointVersion},
                {"policy", policy_to_json(policy_)},
                {"optimizer", adam_to_json(opt_)},
                {"trainer",
                 {{"seed", seed_},
                  {"iteration", iteration_},
                  {"total_steps", total_steps_},
                  {"update_rng", update_rng_.serialize()},
                  {"envs", envs}}},
                {"config", run_config}};
    }

    void restore(const Json& j) {
        if (j.value("format", "") != kCheckpointFormat) throw IoError("not a checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion) throw IoError("unsupported checkpoint version");
        Policy p = policy_from_json(j.at("policy"));
        if (p.spec().tag() != policy_.spec().tag() || p.param_count() != policy_.param_count())
            throw ConfigError("checkpoint architecture " + p.spec().tag() + " does not match " + policy_.spec().tag());
        policy_ = std::move(p);
        opt_ = adam_from_json(j.at("optimizer"), policy_.params().size());
        const Json& t = j.at("trainer");
        if (t.at("seed").get<std::uint64_t>() != seed_) throw ConfigError("checkpoint was written with a different seed");
        iteration_ = t.at("iteration").get<int>();
        total_steps_ = t.at("total_steps").get<long long>();
        update_rng_ = Rng::deserialize(t.at("update_rng").get<std::string>());
        const Json& envs = t.at("envs");
        if (envs.size() != slots_.size()) throw ConfigError("checkpoint environment count does not match n_env");
        for (std::size_t e = 0; e < slots_.size(); ++e) {
            const Json& je = envs[e];
            slots_[e].env.load_state(je.at("env"));
            slots_[e].seed_rng = Rng::deserialize(je.at("seed_rng").get<std::string>());
            slots_[e].action_rng = Rng::deserialize(je.at("action_rng").get<std::string>());
            slots_[e].ep_return = je.at("ep_return").get<double>();
            slots_[e].ep_length = je.at("ep_length").get<int>();
        }
    }

private:
    struct Slot {
        Environment env;
        Rng seed_rng;
        Rng action_rng;
        double ep_return = 0.0;
        int ep_length = 0;
    };

    void collect_env(int e, RolloutBuffer& buf, std::vector<EpisodeSummary>& finished) {
        Slot& s = slots_[static_cast<std::size_t>(e)];
        const Eigen::VectorXd log_std = policy_.log_std();
        for (int t = 0; t < cfg_.n_steps; ++t) {
            const Eigen::Index i = buf.index(e, t);
            const Observation& obs = s.env.observation();
            const auto out = policy_.evaluate(obs.state, obs.lambda);
            const SampledAction a = sample_action(out.mean, log_std, s.action_rng);
            buf.states.col(i) = obs.state;
            buf.lambdas.col(i) = obs.lambda;
            buf.actions.col(i) = a.action;
            buf.log_probs[i] = a.log_prob;
            buf.values[i] = out.value;
            if (t > 0 && buf.dones[i - 1] == 0.0) buf.next_values[i - 1] = out.value;

            const StepResult r = s.env.step(a.action);
            buf.rewards[i] = r.reward.total;
            buf.causes[static_cast<std::size_t>(i)] = static_cast<int>(r.cause);
            s.ep_return += r.reward.total;
            ++s.ep_length;
            if (r.done) {
                buf.dones[i] = 1.0;
                buf.next_values[i] = is_terminal_failure(r.cause)
                                         ? 0.0
                                         : policy_.evaluate(r.obs.state, r.obs.lambda).value;
                finished.push_back({0, e, s.env.seed(), s.ep_return, s.ep_length, r.cause, s.env.scenario()});
                s.ep_return = 0.0;
                s.ep_length = 0;
                s.env.reset(s.seed_rng.next_u64());
            } else if (t == cfg_.n_steps - 1) {
                buf.next_values[i] = policy_.evaluate(r.obs.state, r.obs.lambda).value;
            }
        }
    }

    PPOConfig cfg_;
    std::uint64_t seed_;
    Policy policy_;
    Adam opt_;
    Rng update_rng_;
    std::vector<Slot> slots_;
    std::unique_ptr<Environment> eval_env_;
    int iteration_ = 0;
    long long total_steps_ = 0;
};

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline const char* kTrainLogHeader =
    "iteration,total_steps,episodes,mean_episode_reward,mean_episode_length,mean_step_reward,policy_loss,"
    "value_loss,entropy,approx_kl,clip_fraction,grad_norm,eval_reward";

inline std::string train_log_row(const IterationLog& l) {
    std::ostringstream os;
    os << l.iteration << ',' << l.total_steps << ',' << l.episodes << ',' << format_double(l.mean_reward) << ','
       << format_double(l.mean_length) << ',' << format_double(l.step_reward) << ','
       << format_double(l.stats.policy_loss) << ',' << format_double(l.stats.value_loss) << ','
       << format_double(l.stats.entropy) << ',' << format_double(l.stats.approx_kl) << ','
       << format_double(l.stats.clip_fraction) << ',' << format_double(l.stats.grad_norm) << ','
       << format_double(l.eval_reward);
    return os.str();
}

struct TrainOutputs {
    std::filesystem::path dir;
    std::filesystem::path train_log() const { return dir / "train_log.csv"; }
    std::filesystem::path timing_log() const { return dir / "timing.csv"; }
    std::filesystem::path episodes() const { return dir / "episodes.jsonl"; }
    std::filesystem::path checkpoint_dir() const { return dir / "checkpoints"; }
    std::filesystem::path latest() const { return dir / "checkpoint_latest.json"; }
    std::filesystem::path final_checkpoint() const { return dir / "checkpoint_final.json"; }
    std::filesystem::path numbered(int it) const {
        std::ostringstream os;
        os << "ckpt_" << std::setw(5) << std::setfill('0') << it << ".json";
        return checkpoint_dir() / os.str();
    }
};

/// Runs iterations until cfg.iterations, writing logs and checkpoints under out.
/// With resume, state comes from the latest checkpoint and logs are appended.
inline void run_training(Trainer& trainer, const std::filesystem::path& out, bool resume, const Json& run_config,
                         std::ostream* progress = nullptr) {
    TrainOutputs o{out};
    std::filesystem::create_directories(o.checkpoint_dir());
    if (resume) {
        if (!std::filesystem::exists(o.latest())) throw IoError("no checkpoint to resume in " + out.string());
        trainer.restore(read_json_file(o.latest().string()));
        // Drop log rows written after the checkpoint so the resumed log is contiguous.
        auto trim = [&](const std::filesystem::path& p, bool header, auto keep) {
            std::ifstream is(p);
            std::vector<std::string> lines;
            std::string line;
            bool first = header;
            while (std::getline(is, line)) {
                if (first || keep(line)) lines.push_back(line);
                first = false;
            }
            is.close();
            std::ofstream os(p, std::ios::trunc);
            for (const auto& l : lines) os << l << '\n';
        };
        const int done = trainer.iteration();
        trim(o.train_log(), true, [&](const std::string& l) { return std::stoi(l.substr(0, l.find(','))) <= done; });
        trim(o.timing_log(), true, [&](const std::string& l) { return std::stoi(l.substr(0, l.find(','))) <= done; });
        trim(o.episodes(), false,
             [&](const std::string& l) { return Json::parse(l).at("iteration").get<int>() <= done; });
    } else {
        std::ofstream(o.train_log(), std::ios::trunc) << kTrainLogHeader << '\n';
        std::ofstream(o.timing_log(), std::ios::trunc) << "iteration,seconds\n";
        std::ofstream(o.episodes(), std::ios::trunc);
    }
    const int interval = trainer.config().checkpoint_interval;
    while (trainer.iteration() < trainer.config().iterations) {
        const IterationLog l = trainer.iterate();
        std::ofstream(o.train_log(), std::ios::app) << train_log_row(l) << '\n';
        std::ofstream(o.timing_log(), std::ios::app) << l.iteration << ',' << format_double(l.seconds) << '\n';
        {
            std::ofstream ep(o.episodes(), std::ios::app);
            for (const auto& e : l.finished) ep << episode_summary_to_json(e).dump() << '\n';
        }
        const bool last = trainer.iteration() == trainer.config().iterations;
        if (last || (interval > 0 && l.iteration % interval == 0)) {
            const Json ck = trainer.checkpoint(run_config);
            write_json_file(o.numbered(l.iteration).string(), ck);
            write_json_file(o.latest().string(), ck);
            if (last) write_json_file(o.final_checkpoint().string(), ck);
        }
        if (progress)
            *progress << "iter " << l.iteration << "  episodes " << l.episodes << "  mean reward "
                      << format_double(l.mean_reward) << "  kl " << l.stats.approx_kl << "  " << l.seconds << " s\n";
    }
}

}  // namespace hyperfc
