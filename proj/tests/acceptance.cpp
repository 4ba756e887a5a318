// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Usage: acceptance [--work DIR] [criterion ...]
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "hyperfc/cli/config.hpp"
#include "hyperfc/eval/protocols.hpp"
#include "hyperfc/eval/reports.hpp"
#include "hyperfc/ppo/trainer.hpp"

using namespace hyperfc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

constexpr double kG = 9.81;
fs::path g_work;
const std::string kSource = HYPERFC_SOURCE_DIR;

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double sd = 1.0) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sd * rng.normal();
    return m;
}

Eigen::MatrixXd random_lambda(int b, Rng& rng) {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(6, b);
    for (int j = 0; j < b; ++j) {
        const int a = rng.uniform_int(0, 3);
        if (a < 3) {
            l(2 * a, j) = 1.0;
            l(2 * a + 1, j) = rng.uniform(-1.0, 1.0);
        }
    }
    return l;
}

Policy jittered(const ArchSpec& spec, std::uint64_t seed) {
    Policy p(spec);
    Rng rng(seed);
    p.initialize(rng);
    p.params() += random_matrix(p.params().size(), 1, rng, 0.2).col(0);
    return p;
}

int run_cli(const std::string& args, const fs::path& cwd, const fs::path& log) {
    const std::string cmd =
        "cd '" + cwd.string() + "' && '" + std::string(HYPERFC_CLI) + "' " + args + " > '" + log.string() + "' 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream is(p);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(is, line);) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        rows.push_back(f);
    }
    return rows;
}

// ---------------------------------------------------------------- 1

Outcome architecture_accounting() {
    Outcome o;
    const std::map<std::string, std::pair<double, double>> table = {{"FiLM", {23405, 32000}},
                                                                     {"FiLM+HC", {31510, 0}},
                                                                     {"LoRA(16)", {19629, 26000}},
                                                                     {"LoRA(64)", {33645, 57000}}};
    const Policy mlp(ArchSpec::parse("MLP"));
    o.check(mlp.param_count() == 13897, "MLP parameter count");
    o.check(std::abs(mlp.flop_count() / 14000.0 - 1.0) <= 0.15, "MLP FLOPs");
    o.detail << "MLP " << mlp.param_count() << "/" << mlp.flop_count();
    for (const auto& [tag, ref] : table) {
        const Policy p(ArchSpec::parse(tag));
        const double dp = p.param_count() / ref.first - 1.0;
        o.detail << "; " << tag << " " << p.param_count() << " (" << fmt(100 * dp, 3) << "%)";
        o.check(std::abs(dp) <= 0.02, tag + " parameter count");
        if (ref.second > 0) {
            const double df = p.flop_count() / ref.second - 1.0;
            o.detail << "/" << p.flop_count() << " (" << fmt(100 * df, 3) << "%)";
            o.check(std::abs(df) <= 0.15, tag + " FLOPs");
        }
    }
    return o;
}

// ---------------------------------------------------------------- 2

Outcome adaptation_identities() {
    Outcome o;
    Rng rng(2);
    int exact = 0;
    for (const char* tag : {"FiLM", "FiLM+HC", "LoRA(16)", "LoRA(64)"}) {
        const Policy p = jittered(ArchSpec::parse(tag), 20);
        const Eigen::MatrixXd s = random_matrix(34, 256, rng), l = random_lambda(256, rng);
        const ForwardCache z = p.forward(s, l, true);
        bool ok = z.mean == p.actor_main_net().forward(s);
        if (p.spec().hyper_critic) ok = ok && Eigen::MatrixXd(z.value) == p.critic_main_net().forward(s);
        o.check(ok, std::string(tag) + " zero-adaptation forward");
        exact += ok;
    }
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int m = rng.uniform_int(1, 64), n = rng.uniform_int(1, 64), k = rng.uniform_int(1, 64);
        const Eigen::MatrixXd w = random_matrix(m, n, rng), u = random_matrix(m, k, rng), v = random_matrix(n, k, rng);
        const Eigen::VectorXd r = random_matrix(k, 1, rng).col(0), h = random_matrix(n, 1, rng).col(0);
        const Eigen::VectorXd dense = (w + u * r.asDiagonal() * v.transpose() / static_cast<double>(k)) * h;
        const Eigen::VectorXd got = lora_apply(w, u, v, r, k, h);
        worst = std::max(worst, (got - dense).norm() / std::max(1.0, dense.norm()));
    }
    o.check(worst <= 1e-12, "LoRA factored vs dense");
    o.detail << exact << "/4 architectures element-exact; LoRA max relative error " << fmt(worst, 3)
             << " over 1000 instances";
    return o;
}

// ---------------------------------------------------------------- 3

Outcome gradient_correctness() {
    Outcome o;
    o.detail << "max relative error";
    for (const char* tag : {"MLP", "FiLM", "FiLM+HC", "LoRA(16)", "LoRA(64)"}) {
        ArchSpec spec = ArchSpec::parse(tag);
        spec.state_dim = 5;
        spec.hidden = 6;
        spec.hyper_hidden = 5;
        Policy p = jittered(spec, 30);
        Rng rng(31);
        const int b = 3;
        const Eigen::MatrixXd s = random_matrix(5, b, rng), l = random_lambda(b, rng);
        const Eigen::MatrixXd wm = random_matrix(4, b, rng);
        const Eigen::RowVectorXd wv = random_matrix(1, b, rng).row(0);
        const Eigen::VectorXd wl = random_matrix(4, 1, rng).col(0);
        auto loss = [&](const Policy& q) {
            const ForwardCache c = q.forward(s, l);
            return c.mean.cwiseProduct(wm).sum() + c.value.dot(wv) + q.log_std().dot(wl);
        };
        Eigen::VectorXd grad;
        p.backward(p.forward(s, l), wm, wv, wl, grad);
        Eigen::VectorXd fd(p.params().size());
        const double eps = 1e-6;
        for (Eigen::Index i = 0; i < fd.size(); ++i) {
            const double x = p.params()[i];
            p.params()[i] = x + eps;
            const double up = loss(p);
            p.params()[i] = x - eps;
            const double down = loss(p);
            p.params()[i] = x;
            fd[i] = (up - down) / (2 * eps);
        }
        double worst = 0.0;
        for (Eigen::Index i = 0; i < fd.size(); ++i)
            worst = std::max(worst, std::abs(fd[i] - grad[i]) / std::max(1e-3, std::abs(fd[i]) + std::abs(grad[i])));
        const double global = (fd - grad).norm() / fd.norm();
        o.detail << "; " << tag << " (" << fd.size() << " params) " << fmt(worst, 2) << ", norm-wise " << fmt(global, 2);
        o.check(worst < 1e-4 && global < 1e-4, tag);
    }
    return o;
}

// ---------------------------------------------------------------- 4

Outcome dynamics_fidelity() {
    Outcome o;
    const AirframeParams ap;
    // Trimmed turns, each also started slightly off trim so the attitude and
    // velocity states evolve. Started at the origin to keep position roundoff
    // well below the h = 0.01 truncation error.
    double rmin = 1e9, rmax = 0.0;
    o.detail << "RK4 ratios";
    for (auto [k, g] : {std::pair{0.02, 0.0}, {-0.02, -0.21}, {0.012, 0.11}}) {
        const TrimCondition t = solve_trim(ap, k, g);
        for (double offset : {0.0, 0.01}) {
            AircraftState s0 = t.state_at(Vec3::Zero(), 0.3);
            s0.rates += offset * Vec3(0.3, -0.2, 0.1);
            s0.velocity += offset * Vec3(1.0, 0.5, -0.5);
            auto run = [&](double dt) {
                AircraftState s = s0;
                const int n = static_cast<int>(std::lround(1.0 / dt));
                for (int i = 0; i < n; ++i) s = rk4_step(ap, s, Vec3::Zero(), Coeff6::Zero(), dt);
                return s.rigid_body();
            };
            const auto ref = run(0.04 / 32);
            const double e1 = (run(0.04) - ref).norm(), e2 = (run(0.02) - ref).norm(), e3 = (run(0.01) - ref).norm();
            o.detail << " " << fmt(e1 / e2, 4) << "/" << fmt(e2 / e3, 4);
            for (double r : {e1 / e2, e2 / e3}) {
                rmin = std::min(rmin, r);
                rmax = std::max(rmax, r);
            }
        }
    }
    o.check(rmin >= 12.0 && rmax <= 20.0, "RK4 error ratio");
    o.detail << " (range [" << fmt(rmin, 4) << ", " << fmt(rmax, 4) << "])";

    const TrimTable table(ap, 21.0);
    std::vector<double> kappas{0.0};
    kappas.insert(kappas.end(), kTurnCurvatures.begin(), kTurnCurvatures.end());
    double residual = 0.0, bank_err = 0.0, drift = 0.0;
    for (double k : kappas) {
        for (double g : kFlightPathAngles) {
            const TrimCondition& t = table.at(k, g);
            residual = std::max(residual, t.residual);
            if (g == 0.0) bank_err = std::max(bank_err, std::abs(t.phi - std::atan(21.0 * 21.0 * k / kG)));
            const Pose start{Vec3(0, 0, -100), 0.4};
            const PathSegment seg = build_segment(t, 5.0, start, 0.04);
            AircraftState s = t.state_at(start.position, start.heading);
            for (int i = 1; i <= 125; ++i) {
                s.delta = actuator_step(ap, s.delta, t.command, {}, 0.04);
                s = rk4_step(ap, s, Vec3::Zero(), Coeff6::Zero(), 0.04);
                const Vec3 ref = i < 125 ? seg.points[static_cast<std::size_t>(i)].position : seg.end.position;
                drift = std::max(drift, (s.position - ref).norm());
            }
        }
    }
    o.check(residual < 1e-6, "trim residual");
    o.check(bank_err * 180 / kPi <= 2.0, "coordinated-turn bank");
    o.check(drift < 0.5, "trim self-consistency");
    o.detail << "; max trim residual " << fmt(residual, 3) << " over 25 primitives; bank error "
             << fmt(bank_err * 180 / kPi, 3) << " deg; 5 s drift " << fmt(drift, 3) << " m";
    return o;
}

// ---------------------------------------------------------------- 5

Outcome reward_observation() {
    Outcome o;
    const CommandVector ref = CommandVector::Zero();
    const double dense = tracking_reward(TrackingErrors::Zero()) +
                         input_reward(control_margin(ref, ref, CommandVector::Constant(0.4)), ref, ref);
    o.check(std::abs(dense - (2.4 + 8.0e-8)) <= 1e-9, "zero-error dense reward");
    const double m = control_margin(CommandVector::Constant(0.2), ref, CommandVector::Constant(0.4))[0];
    o.check(m == 0.5, "control margin example");
    Observation obs;
    o.check(obs.state.size() == 34 && obs.concatenated().size() == 40, "observation widths");

    const AirframeParams ap;
    const TrimCondition t = solve_trim(ap, 0.012, 0.11);
    const PathSegment seg = build_segment(t, 1.0, Pose{Vec3(0, 0, -100), 0.5}, 0.04);
    const ReferencePoint& r = seg.points[5];
    Rng rng(5);
    double worst = 0.0;
    int nonfinite = 0;
    for (int i = 0; i < 100000; ++i) {
        ObservationInputs in;
        in.reference = &r;
        in.upper = command_upper(ap);
        in.lower = command_lower(ap);
        const double span = std::pow(10.0, rng.uniform(-2.0, 5.0));
        for (int a = 0; a < 3; ++a) {
            in.measured.rates[a] = rng.uniform(-span, span);
            in.measured.euler[a] = rng.uniform(-10.0, 10.0);
            in.measured.position[a] = r.position[a] + rng.uniform(-span, span);
            in.measured.accel[a] = rng.uniform(-span, span);
        }
        in.measured.airspeed = rng.uniform(-span, span);
        in.measured.course = rng.uniform(-10.0, 10.0);
        for (int c = 0; c < 4; ++c) in.previous_command[c] = rng.uniform(-2.0, 2.0) * in.upper[c];
        in.lambda = FailureVector::stuck(static_cast<FailActuator>(i % 3), rng.uniform(-1.0, 1.0));
        if (i % 50 == 0) in.measured.accel[i % 3] = std::numeric_limits<double>::quiet_NaN();
        if (i % 70 == 0) in.measured.rates[i % 3] = -std::numeric_limits<double>::infinity();
        const Observation ob = build_observation(in);
        if (!ob.state.allFinite()) ++nonfinite;
        worst = std::max({worst, ob.state.cwiseAbs().maxCoeff(), ob.lambda.cwiseAbs().maxCoeff()});
    }
    o.check(worst <= 1.0 && nonfinite == 0, "observation range under fuzzing");
    o.detail << "dense reward - 2.4 = " << fmt(dense - 2.4, 6) << "; margin " << m << "; widths 34/40; max |obs| "
             << worst << " over 1e5 fuzzed samples";
    return o;
}

// ---------------------------------------------------------------- 6

Outcome scenario_protocol() {
    Outcome o;
    Rng rng(6);
    const std::set<double> train(kTrainLevels.begin(), kTrainLevels.end());
    int bad_level = 0;
    for (int i = 0; i < 100000; ++i) bad_level += !train.count(sample_training_scenario(rng, 750).level);
    o.check(bad_level == 0, "training levels");

    int bad_flutter = 0;
    int min_dur = 1 << 30, max_dur = 0, min_hold = 1 << 30, max_hold = 0;
    double max_exc = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const ScenarioSpec s = sample_flutter_scenario(rng, 750, 0.04);
        min_dur = std::min(min_dur, s.duration);
        max_dur = std::max(max_dur, s.duration);
        for (std::size_t h = 0; h < s.holds.size(); ++h) {
            const int end = h + 1 < s.holds.size() ? s.holds[h + 1].start : s.onset + s.duration;
            min_hold = std::min(min_hold, end - s.holds[h].start);
            max_hold = std::max(max_hold, end - s.holds[h].start);
            max_exc = std::max(max_exc, std::abs(s.holds[h].level - s.level));
            bad_flutter += std::abs(s.holds[h].level) > 1.0;
        }
        bad_flutter += s.holds.empty() || s.holds.front().start != s.onset || s.onset + s.duration > 750;
    }
    o.check(bad_flutter == 0 && max_exc <= 0.2 + 1e-12, "flutter excursion");
    o.check(min_dur >= 25 && max_dur <= 250, "flutter duration 1-10 s");
    o.check(min_hold >= 5 && max_hold <= 25, "flutter holds 0.2-1.0 s");

    // Onset episodes through the environment: the applied and observed failure
    // vectors switch on exactly at the onset step.
    EnvConfig cfg = EnvConfig::disturbance_free();
    cfg.termination_distance = 0.0;
    Environment env(AirframeParams{}, cfg);
    int mismatches = 0, episodes = 0;
    for (int i = 0; i < 40; ++i) {
        ScenarioSpec s = sample_training_scenario(rng, 750, ScenarioMixture{0, 0, 1});
        env.reset(static_cast<std::uint64_t>(i), s);
        ++episodes;
        for (int k = 0; k <= s.onset + 1 && !env.done(); ++k) {
            const StepResult r = env.step(CommandVector::Zero());
            const bool on = r.lambda.failed(s.actuator);
            mismatches += on != (k >= s.onset);
            // Observation after step k carries the vector for step k.
            mismatches += (r.obs.lambda[2 * static_cast<int>(s.actuator)] == 1.0) != (k >= s.onset);
        }
    }
    o.check(mismatches == 0, "onset flip");
    o.detail << "1e5 training scenarios, " << bad_level << " off-grid levels; 1e5 flutter traces: duration ["
             << min_dur << ", " << max_dur << "] steps, holds [" << min_hold << ", " << max_hold
             << "] steps, max excursion " << fmt(max_exc, 4) << "; onset flips exact in " << episodes << " episodes";
    return o;
}

// ---------------------------------------------------------------- 7 and 8 share the smoke runs

struct SmokeRuns {
    fs::path a, b;
    int rc_a = -1, rc_b = -1;
    double seconds = 0.0;
};

const SmokeRuns& smoke_runs() {
    static const SmokeRuns runs = [] {
        SmokeRuns s;
        const fs::path root = g_work / "smoke";
        fs::remove_all(root);
        fs::create_directories(root / "a");
        fs::create_directories(root / "b");
        const std::string args = "train --config '" + kSource + "/configs/smoke.json' --out run";
        const auto t0 = std::chrono::steady_clock::now();
        s.rc_a = run_cli(args, root / "a", root / "a.log");
        s.rc_b = run_cli(args, root / "b", root / "b.log");
        s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        s.a = root / "a" / "run";
        s.b = root / "b" / "run";
        return s;
    }();
    return runs;
}

Outcome determinism() {
    Outcome o;
    const SmokeRuns& s = smoke_runs();
    o.check(s.rc_a == 0 && s.rc_b == 0, "smoke training exit status");
    if (!o.pass) return o;
    int compared = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(s.a)) {
        if (!e.is_regular_file() || e.path().filename() == "timing.csv") continue;
        const fs::path rel = fs::relative(e.path(), s.a);
        ++compared;
        if (!fs::exists(s.b / rel) || slurp(e.path()) != slurp(s.b / rel)) {
            ++differing;
            o.detail << " differs: " << rel.string();
        }
    }
    o.check(differing == 0 && compared >= 7, "bit-identical outputs");

    // Restore the final checkpoint into a fresh trainer and write it back out.
    const RunConfig cfg = load_run_config(kSource + "/configs/smoke.json");
    const std::string text = slurp(s.a / "checkpoint_final.json");
    Trainer t(cfg.airframe_params(), cfg.env, cfg.arch_spec(), cfg.ppo, cfg.seed);
    const Json ck = Json::parse(text);
    t.restore(ck);
    const bool round_trip = t.checkpoint(ck.at("config")).dump() + "\n" == text;
    const Policy reread = policy_from_json(Json::parse(policy_to_json(t.policy()).dump()));
    const bool params_exact = std::memcmp(reread.params().data(), t.policy().params().data(),
                                          sizeof(double) * t.policy().param_count()) == 0;
    o.check(round_trip && params_exact, "checkpoint round trip");
    o.detail << compared << " files compared across two runs (" << fmt(s.seconds, 3)
             << " s), identical: " << (differing == 0 ? "yes" : "no") << "; checkpoint round trip bit-exact: "
             << (round_trip && params_exact ? "yes" : "no");
    return o;
}

Outcome learning_and_evaluation() {
    Outcome o;
    const SmokeRuns& s = smoke_runs();
    o.check(s.rc_a == 0, "smoke training exit status");
    if (!o.pass) return o;
    const auto log = read_csv(s.a / "train_log.csv");
    o.check(log.size() == 51 && log[0][3] == "mean_episode_reward", "train log shape");
    if (!o.pass) return o;
    const double base = std::stod(log[1][3]);
    double best = -1e300;
    int best_it = 0;
    for (std::size_t i = 1; i < log.size(); ++i) {
        const double r = std::stod(log[i][3]);
        if (r > best) best = r, best_it = static_cast<int>(i);
    }
    const double final_r = std::stod(log.back()[3]);
    o.check(best >= 1.5 * base, "50% improvement within 50 iterations");
    o.detail << "mean episode reward " << fmt(base, 5) << " at iteration 1, best " << fmt(best, 5) << " at "
             << best_it << ", final " << fmt(final_r, 5) << " (+" << fmt(100 * (final_r / base - 1), 3) << "%)";

    // Full-size evaluation of the trained checkpoint under the training disturbances.
    const fs::path eval_dir = g_work / "smoke" / "eval";
    for (const char* protocol : {"static", "flutter"}) {
        const int rc = run_cli(std::string("eval --checkpoint '") + (s.a / "checkpoint_final.json").string() +
                                   "' --config '" + kSource + "/configs/default.json' --protocol " + protocol +
                                   " --episodes 1000 --workers 4 --out '" + eval_dir.string() + "'",
                               g_work, g_work / "smoke" / (std::string(protocol) + "_eval.log"));
        o.check(rc == 0, std::string(protocol) + " evaluation exit status");
        if (rc != 0) continue;
        const auto table = read_csv(eval_dir / (std::string(protocol) + "_table.csv"));
        const auto curve = read_csv(eval_dir / (std::string(protocol) + "_curve.csv"));
        const auto eps = read_csv(eval_dir / (std::string(protocol) + "_episodes.csv"));
        o.check(table.size() == 5 && eps.size() == 1001 && curve.size() > 3, std::string(protocol) + " report shape");
        int total = 0;
        bool ordered = true;
        std::string all;
        for (std::size_t i = 1; i < table.size(); ++i) {
            const double mpe = std::stod(table[i][4]), maxpe = std::stod(table[i][5]), wc = std::stod(table[i][6]);
            ordered = ordered && wc >= maxpe && maxpe >= mpe;
            if (table[i][2] == "all") {
                all = "MPE " + fmt(mpe, 4) + ", MaxPE " + fmt(maxpe, 4) + ", WC " + fmt(wc, 4);
                o.check(std::stoi(table[i][3]) == 1000, "all-row episode count");
            } else {
                total += std::stoi(table[i][3]);
            }
        }
        o.check(ordered, std::string(protocol) + " WC >= MaxPE >= MPE");
        o.check(total == 1000, std::string(protocol) + " per-actuator counts");
        o.detail << "; " << protocol << " n=1000: " << all << " (" << curve.size() - 1 << " curve points)";
    }
    return o;
}

// ---------------------------------------------------------------- 9

Outcome lipschitz_tooling() {
    Outcome o;
    Rng rng(9);
    double worst = 0.0;
    for (auto [r, c] : {std::pair{256, 64}, {64, 256}, {128, 32}, {64, 64}, {32, 6}, {6, 32}, {256, 1}, {1, 64}}) {
        for (int rep = 0; rep < 3; ++rep) {
            const Eigen::MatrixXd w = random_matrix(r, c, rng, rng.uniform(0.1, 2.0));
            const double svd = Eigen::JacobiSVD<Eigen::MatrixXd>(w).singularValues()[0];
            worst = std::max(worst, std::abs(spectral_norm(w) - svd));
        }
    }
    o.check(worst <= 1e-6, "spectral norm vs SVD");
    o.detail << "max |power iteration - SVD| " << fmt(worst, 3) << " up to 256x64";

    // Briefly trained hypernetworks, one per hyper architecture.
    RunConfig cfg = load_run_config(kSource + "/configs/smoke.json");
    cfg.env.failures = true;
    cfg.ppo.n_env = 4;
    cfg.ppo.n_steps = 200;
    cfg.ppo.epochs = 4;
    for (const char* tag : {"FiLM", "FiLM+HC", "LoRA(16)", "LoRA(64)"}) {
        Trainer t(cfg.airframe_params(), cfg.env, ArchSpec::parse(tag), cfg.ppo, 9);
        for (int i = 0; i < 5; ++i) t.iterate();
        const DenseNet h = t.policy().hypernet();
        const double bound = lipschitz_bound(h);
        double ratio = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const Eigen::VectorXd x = random_lambda(1, rng).col(0);
            Eigen::VectorXd y = i % 2 ? random_lambda(1, rng).col(0) : x;
            y += random_matrix(6, 1, rng, std::pow(10.0, rng.uniform(-6.0, 0.0))).col(0);
            const double d = (x - y).norm();
            if (d == 0.0) continue;
            ratio = std::max(ratio, (h.forward(x) - h.forward(y)).norm() / d);
        }
        o.check(ratio <= bound, std::string(tag) + " bound");
        o.detail << "; " << tag << " bound " << fmt(bound, 4) << " >= max quotient " << fmt(ratio, 4);
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    g_work = fs::temp_directory_path() / "hyperfc_acceptance";
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--work" && i + 1 < argc) g_work = argv[++i];
        else only.insert(std::stoi(a));
    }
    fs::create_directories(g_work);
    g_work = fs::absolute(g_work);

    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, architecture_accounting}, {2, adaptation_identities}, {3, gradient_correctness},
        {4, dynamics_fidelity},       {5, reward_observation},    {6, scenario_protocol},
        {7, determinism},             {8, learning_and_evaluation}, {9, lipschitz_tooling}};
    int failed = 0;
    for (const auto& [n, fn] : criteria) {
        if (!only.empty() && !only.count(n)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        bool pass = false;
        std::string detail;
        try {
            const Outcome o = fn();
            pass = o.pass;
            detail = o.detail.str();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << "  (" << fmt(sec, 3) << " s)  " << detail
                  << std::endl;
        failed += !pass;
    }
    return failed == 0 ? 0 : 1;
}
