// CSV writers for evaluation tables, failure-magnitude curves, and architecture summaries.
#pragma once

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hyperfc/eval/protocols.hpp"
#include "hyperfc/nets/policy.hpp"
#include "hyperfc/nets/spectral.hpp"

namespace hyperfc {

namespace detail {
inline std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}
}  // namespace detail

/// policy,protocol,actuator,episodes,mpe_mean,maxpe_mean,worst_case,maxpe_sd
inline void write_table_csv(std::ostream& os, const std::vector<EvalReport>& reports) {
    os << "policy,protocol,actuator,episodes,mpe_mean,maxpe_mean,worst_case,maxpe_sd\n";
    for (const auto& r : reports)
        for (const auto& row : r.rows)
            os << r.policy << ',' << to_string(r.protocol) << ',' << row.actuator << ',' << row.episodes << ','
               << detail::num(row.mpe_mean) << ',' << detail::num(row.maxpe_mean) << ','
               << detail::num(row.worst_case) << ',' << detail::num(row.maxpe_sd) << '\n';
}

/// policy,protocol,actuator,level,episodes,maxpe_mean
inline void write_curve_csv(std::ostream& os, const std::vector<EvalReport>& reports) {
    os << "policy,protocol,actuator,level,episodes,maxpe_mean\n";
    for (const auto& r : reports)
        for (const auto& p : r.curve)
            os << r.policy << ',' << to_string(r.protocol) << ',' << p.actuator << ',' << detail::num(p.level) << ','
               << p.episodes << ',' << detail::num(p.maxpe_mean) << '\n';
}

inline void write_episodes_csv(std::ostream& os, const EvalReport& r) {
    os << "index,seed,kind,actuator,level,onset,duration,mpe,maxpe,length,cause,total_reward\n";
    for (const auto& e : r.episodes)
        os << e.index << ',' << e.seed << ',' << to_string(e.scenario.kind) << ','
           << actuator_name(e.scenario.actuator) << ',' << detail::num(e.scenario.level) << ',' << e.scenario.onset
           << ',' << e.scenario.duration << ',' << detail::num(e.mpe) << ',' << detail::num(e.maxpe) << ','
           << e.length << ',' << to_string(e.cause) << ',' << detail::num(e.total_reward) << '\n';
}

struct LipschitzEntry {
    std::string network;  // hypernet, actor, critic
    std::vector<double> layer_norms;
    double bound = 0.0;
};

/// Spectral-norm product per network; the hypernetwork row is absent for the MLP.
inline std::vector<LipschitzEntry> lipschitz_report(const Policy& p, const PowerIterationOptions& opt = {}) {
    std::vector<LipschitzEntry> out;
    auto add = [&](const std::string& name, const DenseNet& net) {
        LipschitzEntry e;
        e.network = name;
        e.bound = 1.0;
        for (const auto& l : net.layers) {
            e.layer_norms.push_back(spectral_norm(l.w, opt));
            e.bound *= e.layer_norms.back();
        }
        out.push_back(e);
    };
    if (p.spec().hyper()) add("hypernet", p.hypernet());
    add("actor", p.actor_main_net());
    add("critic", p.critic_main_net());
    return out;
}

struct ArchitectureSummary {
    std::string policy;
    std::size_t parameters = 0;
    long long flops = 0;
    std::vector<LipschitzEntry> lipschitz;
};

inline ArchitectureSummary summarize(const Policy& p) {
    return {p.spec().tag(), p.param_count(), p.flop_count(), lipschitz_report(p)};
}

/// policy,parameters,flops,lipschitz_hypernet,lipschitz_actor,lipschitz_critic
inline void write_architecture_csv(std::ostream& os, const std::vector<ArchitectureSummary>& rows) {
    os << "policy,parameters,flops,lipschitz_hypernet,lipschitz_actor,lipschitz_critic\n";
    for (const auto& r : rows) {
        std::string hyper = "", actor = "", critic = "";
        for (const auto& e : r.lipschitz) {
            if (e.network == "hypernet") hyper = detail::num(e.bound);
            if (e.network == "actor") actor = detail::num(e.bound);
            if (e.network == "critic") critic = detail::num(e.bound);
        }
        os << r.policy << ',' << r.parameters << ',' << r.flops << ',' << hyper << ',' << actor << ',' << critic
           << '\n';
    }
}

}  // namespace hyperfc
