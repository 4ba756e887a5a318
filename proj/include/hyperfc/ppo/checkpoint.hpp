// Versioned JSON checkpoints: architecture, row-major tensors, optimizer, trainer state.
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "hyperfc/core/json_io.hpp"
#include "hyperfc/nets/policy.hpp"
#include "hyperfc/ppo/adam.hpp"

namespace hyperfc {

inline constexpr const char* kCheckpointFormat = "hyperfc-checkpoint";
inline constexpr int kCheckpointVersion = 1;

inline Json arch_to_json(const ArchSpec& s) {
    return {{"tag", s.tag()},
            {"state_dim", s.state_dim},
            {"fail_dim", s.fail_dim},
            {"action_dim", s.action_dim},
            {"hidden", s.hidden},
            {"hyper_hidden", s.hyper_hidden}};
}

inline ArchSpec arch_from_json(const Json& j) {
    ArchSpec s = ArchSpec::parse(j.at("tag").get<std::string>());
    s.state_dim = j.at("state_dim").get<int>();
    s.fail_dim = j.at("fail_dim").get<int>();
    s.action_dim = j.at("action_dim").get<int>();
    s.hidden = j.at("hidden").get<int>();
    s.hyper_hidden = j.at("hyper_hidden").get<int>();
    s.validate();
    return s;
}

inline Json policy_to_json(const Policy& p) {
    Json tensors = Json::array();
    for (const auto& t : p.layout().tensors()) {
        std::vector<double> data(p.params().data() + t.offset, p.params().data() + t.offset + t.size());
        tensors.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}, {"data", data}});
    }
    return {{"arch", arch_to_json(p.spec())}, {"param_count", p.param_count()}, {"tensors", tensors}};
}

inline Policy policy_from_json(const Json& j) {
    Policy p(arch_from_json(j.at("arch")));
    const Json& tensors = j.at("tensors");
    if (tensors.size() != p.layout().tensors().size()) throw IoError("checkpoint tensor count does not match architecture");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& t = p.layout().tensors()[i];
        const Json& jt = tensors[i];
        if (jt.at("name").get<std::string>() != t.name || jt.at("shape").at(0).get<int>() != t.rows ||
            jt.at("shape").at(1).get<int>() != t.cols)
            throw IoError("checkpoint tensor '" + jt.at("name").get<std::string>() + "' incompatible with " +
                          p.spec().tag());
        const auto data = jt.at("data").get<std::vector<double>>();
        if (data.size() != t.size()) throw IoError("checkpoint tensor '" + t.name + "' has wrong length");
        std::copy(data.begin(), data.end(), p.params().data() + t.offset);
    }
    return p;
}

inline Json adam_to_json(const Adam& a) {
    const auto& m = a.first_moment();
    const auto& v = a.second_moment();
    return {{"lr", a.config().lr},
            {"beta1", a.config().beta1},
            {"beta2", a.config().beta2},
            {"epsilon", a.config().epsilon},
            {"t", a.steps()},
            {"m", std::vector<double>(m.data(), m.data() + m.size())},
            {"v", std::vector<double>(v.data(), v.data() + v.size())}};
}

inline Adam adam_from_json(const Json& j, Eigen::Index n) {
    AdamConfig c{j.at("lr").get<double>(), j.at("beta1").get<double>(), j.at("beta2").get<double>(),
                 j.at("epsilon").get<double>()};
    Adam a(n, c);
    const auto m = j.at("m").get<std::vector<double>>();
    const auto v = j.at("v").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(m.size()) != n || static_cast<Eigen::Index>(v.size()) != n)
        throw IoError("optimizer state length does not match parameters");
    a.restore(Eigen::Map<const Eigen::VectorXd>(m.data(), n), Eigen::Map<const Eigen::VectorXd>(v.data(), n),
              j.at("t").get<long long>());
    return a;
}

inline void write_json_file(const std::string& path, const Json& j) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write '" + path + "'");
    os << j.dump() << '\n';
    if (!os) throw IoError("write failed for '" + path + "'");
}

inline Json read_json_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    try {
        return Json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed JSON in '" + path + "': " + e.what());
    }
}

/// Reads the policy out of a checkpoint file (trainer state ignored).
inline Policy load_policy(const std::string& path) {
    const Json j = read_json_file(path);
    if (j.value("format", "") != kCheckpointFormat) throw IoError("'" + path + "' is not a checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(j.at("version").get<int>()));
    return policy_from_json(j.at("policy"));
}

}  // namespace hyperfc
