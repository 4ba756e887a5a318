// Airframe description: mass properties, geometry, aerodynamic derivatives,
// actuator limits. Loaded from a flat "key = value" file.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "hyperfc/core/error.hpp"
#include "hyperfc/core/math.hpp"

namespace hyperfc {

/// Stability-derivative model. Lift/drag act in wind axes and are rotated to
/// body X/Z; lateral and moment coefficients are linear in their regressors.
/// Thrust enters C_X as a quadratic in the inverse advance ratio.
struct AeroDerivatives {
    double lift0 = 0.1;
    double lift_alpha = 4.5;
    double lift_q = 5.0;
    double lift_de = 0.3;

    double drag0 = 0.04;
    double drag_k = 0.05;  // induced drag factor, C_D = drag0 + drag_k * C_Lift^2

    double side_beta = -0.25;
    double side_p = 0.0;
    double side_r = 0.25;
    double side_da = 0.0;
    double side_dr = 0.15;

    double roll_beta = -0.08;
    double roll_p = -0.5;
    double roll_r = 0.12;
    double roll_da = 0.20;
    double roll_dr = 0.005;

    double pitch0 = 0.02;
    double pitch_alpha = -0.8;
    double pitch_q = -10.0;
    double pitch_de = -0.8;
    double pitch_da_diff = -0.02;  // asymmetric-aileron pitching term

    double yaw_beta = 0.08;
    double yaw_p = -0.03;
    double yaw_r = -0.12;
    double yaw_da = -0.01;
    double yaw_dr = -0.08;

    double thrust0 = -0.03;  // windmilling drag at zero rotation
    double thrust1 = 0.02;
    double thrust2 = 0.03;
};

/// Representative ~3 kg fixed-wing. Not the identified parameters of any
/// particular airframe.
struct AirframeParams {
    double mass = 3.0;     // kg
    double gravity = 9.81; // m/s^2
    double jxx = 0.20;     // kg m^2
    double jyy = 0.20;
    double jzz = 0.35;
    double jxz = 0.01;
    double chord = 0.30;   // m
    double span = 2.0;     // m
    double area = 0.60;    // m^2
    double prop_diameter = 0.28;  // m
    double air_density = 1.225;   // kg/m^3

    double tau_surface = 0.05;  // s
    double tau_throttle = 0.2;  // s
    double elevator_sat = 0.4;  // rad
    double aileron_sat = 0.4;   // rad, both surfaces
    double rudder_sat = 0.4;    // rad
    double throttle_max = 160.0; // rev/s; lower limit is 0

    double min_airspeed = 3.0;  // m/s validity floor of the aero model

    AeroDerivatives aero;

    Mat3 inertia() const {
        Mat3 j;
        j << jxx, 0.0, -jxz,
             0.0, jyy, 0.0,
             -jxz, 0.0, jzz;
        return j;
    }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ConfigError(std::string("airframe: ") + name + " must be > 0");
        };
        positive(mass, "mass");
        positive(gravity, "gravity");
        positive(chord, "chord");
        positive(span, "span");
        positive(area, "area");
        positive(prop_diameter, "prop_diameter");
        positive(air_density, "air_density");
        positive(tau_surface, "tau_surface");
        positive(tau_throttle, "tau_throttle");
        positive(elevator_sat, "elevator_sat");
        positive(aileron_sat, "aileron_sat");
        positive(rudder_sat, "rudder_sat");
        positive(throttle_max, "throttle_max");
        positive(min_airspeed, "min_airspeed");
        Eigen::SelfAdjointEigenSolver<Mat3> es(inertia());
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw ConfigError("airframe: inertia matrix is not positive definite");
    }
};

namespace detail {

inline std::map<std::string, double*> airframe_fields(AirframeParams& p) {
    AeroDerivatives& a = p.aero;
    return {
        {"mass", &p.mass}, {"gravity", &p.gravity},
        {"jxx", &p.jxx}, {"jyy", &p.jyy}, {"jzz", &p.jzz}, {"jxz", &p.jxz},
        {"chord", &p.chord}, {"span", &p.span}, {"area", &p.area},
        {"prop_diameter", &p.prop_diameter}, {"air_density", &p.air_density},
        {"tau_surface", &p.tau_surface}, {"tau_throttle", &p.tau_throttle},
        {"elevator_sat", &p.elevator_sat}, {"aileron_sat", &p.aileron_sat},
        {"rudder_sat", &p.rudder_sat}, {"throttle_max", &p.throttle_max},
        {"min_airspeed", &p.min_airspeed},
        {"lift0", &a.lift0}, {"lift_alpha", &a.lift_alpha}, {"lift_q", &a.lift_q},
        {"lift_de", &a.lift_de},
        {"drag0", &a.drag0}, {"drag_k", &a.drag_k},
        {"side_beta", &a.side_beta}, {"side_p", &a.side_p}, {"side_r", &a.side_r},
        {"side_da", &a.side_da}, {"side_dr", &a.side_dr},
        {"roll_beta", &a.roll_beta}, {"roll_p", &a.roll_p}, {"roll_r", &a.roll_r},
        {"roll_da", &a.roll_da}, {"roll_dr", &a.roll_dr},
        {"pitch0", &a.pitch0}, {"pitch_alpha", &a.pitch_alpha}, {"pitch_q", &a.pitch_q},
        {"pitch_de", &a.pitch_de}, {"pitch_da_diff", &a.pitch_da_diff},
        {"yaw_beta", &a.yaw_beta}, {"yaw_p", &a.yaw_p}, {"yaw_r", &a.yaw_r},
        {"yaw_da", &a.yaw_da}, {"yaw_dr", &a.yaw_dr},
        {"thrust0", &a.thrust0}, {"thrust1", &a.thrust1}, {"thrust2", &a.thrust2},
    };
}

inline std::string trim_ws(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses "key = value" lines; '#' starts a comment. Keys not present keep
/// their defaults; unknown keys are rejected.
inline AirframeParams parse_airframe(std::istream& in, const std::string& origin = "<stream>") {
    AirframeParams p;
    auto fields = detail::airframe_fields(p);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim_ws(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim_ws(line.substr(0, eq));
        const std::string val = detail::trim_ws(line.substr(eq + 1));
        auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != val.size())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad number '" + val + "'");
        *it->second = v;
    }
    p.validate();
    return p;
}

inline AirframeParams load_airframe(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open airframe file '" + path + "'");
    return parse_airframe(in, path);
}

/// Writes every field, so the output fully pins the airframe used by a run.
inline void write_airframe(std::ostream& out, const AirframeParams& params) {
    AirframeParams copy = params;
    out.precision(17);
    for (const auto& [key, ptr] : detail::airframe_fields(copy)) out << key << " = " << *ptr << "\n";
}

}  // namespace hyperfc
