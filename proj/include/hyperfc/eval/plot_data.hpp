// Converts a recorded episode (JSON-lines) into flat CSV histories for plotting.
#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <string>
#include <vector>

#include "hyperfc/core/json_io.hpp"

namespace hyperfc {

inline constexpr const char* kEpisodeSchema = "hyperfc-episode/1";

struct PlotData {
    Json header;
    std::vector<Json> steps;
};

inline PlotData read_episode_jsonl(std::istream& in) {
    PlotData d;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError("episode log line " + std::to_string(lineno) + ": " + e.what());
        }
        if (d.header.is_null()) {
            if (j.value("schema", "") != kEpisodeSchema) throw IoError("episode log: missing or unknown schema header");
            d.header = std::move(j);
        } else {
            d.steps.push_back(std::move(j));
        }
    }
    if (d.header.is_null()) throw IoError("episode log is empty");
    return d;
}

namespace detail {

inline void put(std::ostream& os, const Json& arr) {
    if (!arr.is_array()) throw IoError("episode log: expected array field");
    for (const auto& x : arr) os << ',' << x.get<double>();
}

}  // namespace detail

/// Writes attitude.csv, position_error.csv, commands.csv and lambda.csv, one row per step.
inline std::vector<std::filesystem::path> write_plot_data(const PlotData& d, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const double dt = d.header.value("dt", 0.04);
    const std::vector<std::filesystem::path> files{dir / "attitude.csv", dir / "position_error.csv",
                                                   dir / "commands.csv", dir / "lambda.csv"};
    std::ofstream att(files[0]), pos(files[1]), cmd(files[2]), lam(files[3]);
    if (!att || !pos || !cmd || !lam) throw IoError("cannot write plot data in '" + dir.string() + "'");
    for (auto* os : {&att, &pos, &cmd, &lam}) *os << std::setprecision(10);
    att << "k,t,phi,theta,psi,phi_ref,theta_ref,psi_ref\n";
    pos << "k,t,error,x,y,z,x_ref,y_ref,z_ref\n";
    cmd << "k,t,elevator,aileron,rudder,throttle,elevator_ref,aileron_ref,rudder_ref,throttle_ref,"
           "delta_elevator,delta_aileron_left,delta_aileron_right,delta_rudder,delta_throttle\n";
    lam << "k,t,right_aileron_fail,right_aileron_level,left_aileron_fail,left_aileron_level,rudder_fail,rudder_level\n";
    try {
        for (const auto& s : d.steps) {
            const int k = s.at("k").get<int>();
            const double t = (k + 1) * dt;
            const Json& st = s.at("state");
            const Json& ref = s.at("reference");
            att << k << ',' << t;
            detail::put(att, st.at("euler"));
            detail::put(att, ref.at("euler"));
            att << '\n';
            pos << k << ',' << t << ',' << s.at("position_error").get<double>();
            detail::put(pos, st.at("p"));
            detail::put(pos, ref.at("p"));
            pos << '\n';
            cmd << k << ',' << t;
            detail::put(cmd, s.at("command"));
            detail::put(cmd, ref.at("command"));
            detail::put(cmd, st.at("delta"));
            cmd << '\n';
            lam << k << ',' << t;
            detail::put(lam, s.at("lambda"));
            lam << '\n';
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("episode log: malformed step record: ") + e.what());
    }
    return files;
}

}  // namespace hyperfc
