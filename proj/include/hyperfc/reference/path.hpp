// Motion-primitive reference paths and timing-relaxed reference advancement.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "hyperfc/core/rng.hpp"
#include "hyperfc/reference/trim.hpp"

namespace hyperfc {

inline constexpr std::array<double, 4> kTurnCurvatures = {-0.02, -0.012, 0.012, 0.02};
inline constexpr std::array<double, 5> kFlightPathAngles = {-0.21, -0.11, 0.0, 0.11, 0.21};

/// One sample of the reference trajectory.
struct ReferencePoint {
    Vec3 position = Vec3::Zero();
    Vec3 euler = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();  // body
    Vec3 rates = Vec3::Zero();
    double airspeed = 0.0;
    double course = 0.0;
    Vec3 specific_force = Vec3::Zero();
    CommandVector command = CommandVector::Zero();
    double kappa = 0.0;
    double gamma = 0.0;
    int segment = 0;
};

struct Pose {
    Vec3 position = Vec3::Zero();
    double heading = 0.0;
};

struct PathSegment {
    double kappa = 0.0;
    double gamma = 0.0;
    double airspeed = 0.0;
    double duration = 0.0;
    Pose start;
    Pose end;
    std::vector<ReferencePoint> points;

    double length() const { return airspeed * duration; }
};

/// Pose reached after t seconds of trimmed flight: line, arc, or helix.
inline Pose propagate_pose(const TrimCondition& trim, const Pose& start, double t) {
    const double vh = trim.airspeed * std::cos(trim.gamma);
    const double w = trim.turn_rate;
    Pose out;
    out.heading = start.heading + w * t;
    const double h0 = start.heading;
    if (w == 0.0) {
        out.position.x() = start.position.x() + vh * t * std::cos(h0);
        out.position.y() = start.position.y() + vh * t * std::sin(h0);
    } else {
        out.position.x() = start.position.x() + vh / w * (std::sin(out.heading) - std::sin(h0));
        out.position.y() = start.position.y() - vh / w * (std::cos(out.heading) - std::cos(h0));
    }
    out.position.z() = start.position.z() - trim.airspeed * std::sin(trim.gamma) * t;
    out.heading = wrap_angle(out.heading);
    return out;
}

/// Samples a trimmed segment at dt; commands are constant at the trim input.
inline PathSegment build_segment(const TrimCondition& trim, double duration, const Pose& start, double dt) {
    PathSegment seg;
    seg.kappa = trim.kappa;
    seg.gamma = trim.gamma;
    seg.airspeed = trim.airspeed;
    const int steps = std::max(1, static_cast<int>(std::lround(duration / dt)));
    seg.duration = steps * dt;
    seg.start = start;
    seg.points.reserve(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const Pose pose = propagate_pose(trim, start, k * dt);
        ReferencePoint p;
        p.position = pose.position;
        p.euler = Vec3(trim.phi, trim.theta, pose.heading);
        p.velocity = trim.velocity;
        p.rates = trim.rates;
        p.airspeed = trim.airspeed;
        p.course = pose.heading;
        p.specific_force = trim.specific_force;
        p.command = trim.command;
        p.kappa = trim.kappa;
        p.gamma = trim.gamma;
        seg.points.push_back(p);
    }
    seg.end = propagate_pose(trim, start, seg.duration);
    return seg;
}

class ReferencePath {
public:
    ReferencePath() = default;
    ReferencePath(std::vector<ReferencePoint> pts, double dt, double length)
        : points_(std::move(pts)), dt_(dt), length_(length) {}

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const ReferencePoint& operator[](std::size_t i) const { return points_[i]; }
    const std::vector<ReferencePoint>& points() const { return points_; }
    double dt() const { return dt_; }
    double length() const { return length_; }

private:
    std::vector<ReferencePoint> points_;
    double dt_ = 0.04;
    double length_ = 0.0;
};

/// Chains segments; each must start where the previous one ended.
inline ReferencePath concatenate_segments(const std::vector<PathSegment>& segments, double dt) {
    if (segments.empty()) throw ProtocolError("cannot build a path from zero segments");
    std::vector<ReferencePoint> pts;
    double length = 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const PathSegment& s = segments[i];
        if (i > 0) {
            const Pose& prev = segments[i - 1].end;
            if ((prev.position - s.start.position).norm() > 1e-9 ||
                std::abs(wrap_angle(prev.heading - s.start.heading)) > 1e-12)
                throw ProtocolError("segment " + std::to_string(i) + " does not start at previous end pose");
        }
        for (ReferencePoint p : s.points) {
            p.segment = static_cast<int>(i);
            pts.push_back(p);
        }
        length += s.length();
    }
    return ReferencePath(std::move(pts), dt, length);
}

/// Trims for every (kappa, gamma) combination a path can use, solved once.
class TrimTable {
public:
    TrimTable(const AirframeParams& ap, double airspeed) : airspeed_(airspeed) {
        for (double g : kFlightPathAngles) {
            table_.emplace(std::make_pair(0.0, g), solve_trim(ap, 0.0, g, airspeed));
            for (double k : kTurnCurvatures) table_.emplace(std::make_pair(k, g), solve_trim(ap, k, g, airspeed));
        }
    }

    const TrimCondition& at(double kappa, double gamma) const {
        auto it = table_.find({kappa, gamma});
        if (it == table_.end()) throw ConfigError("no trim for requested (kappa, gamma)");
        return it->second;
    }

    double airspeed() const { return airspeed_; }

private:
    double airspeed_;
    std::map<std::pair<double, double>, TrimCondition> table_;
};

enum class PathMode { Random, StraightLevel };

struct PathConfig {
    PathMode mode = PathMode::Random;
    double min_segment = 5.0;   // s
    double max_segment = 15.0;  // s
    double altitude = 100.0;    // m, start height above the NED origin
    bool random_heading = true;
};

/// Alternating straight and turning segments whose turns alternate direction
/// (figure-eight style). Covers at least `min_steps` samples.
inline ReferencePath sample_path(Rng& rng, const TrimTable& trims, const PathConfig& cfg, int min_steps,
                                 double dt) {
    Pose pose;
    pose.position = Vec3(0.0, 0.0, -cfg.altitude);
    pose.heading = cfg.random_heading ? wrap_angle(rng.uniform(0.0, 2.0 * kPi)) : 0.0;
    std::vector<PathSegment> segs;
    if (cfg.mode == PathMode::StraightLevel) {
        segs.push_back(build_segment(trims.at(0.0, 0.0), (min_steps + 1) * dt, pose, dt));
        return concatenate_segments(segs, dt);
    }
    double sign = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    bool turning = false;
    std::size_t total = 0;
    while (total < static_cast<std::size_t>(min_steps)) {
        const double gamma = kFlightPathAngles[static_cast<std::size_t>(rng.uniform_int(0, 4))];
        double kappa = 0.0;
        if (turning) {
            kappa = sign * (rng.uniform(0.0, 1.0) < 0.5 ? 0.012 : 0.02);
            sign = -sign;
        }
        const double duration = rng.uniform(cfg.min_segment, cfg.max_segment);
        segs.push_back(build_segment(trims.at(kappa, gamma), duration, pose, dt));
        pose = segs.back().end;
        total += segs.back().points.size();
        turning = !turning;
    }
    return concatenate_segments(segs, dt);
}

struct AdvanceConfig {
    int lookahead = 25;   // search window ahead of the current index, steps
    int max_advance = 3;  // largest index increase per control step
};

struct AdvanceResult {
    std::size_t index = 0;
    bool complete = false;
};

/// Moves the reference to the closest path sample within the lookahead window,
/// never backwards and by at most max_advance samples.
inline AdvanceResult advance_reference(const ReferencePath& path, const Vec3& position, std::size_t idx,
                                       const AdvanceConfig& cfg = {}) {
    if (idx >= path.size()) throw ProtocolError("reference index outside path");
    const std::size_t last = path.size() - 1;
    const std::size_t hi = std::min(last, idx + static_cast<std::size_t>(cfg.lookahead));
    std::size_t best = idx;
    double best_d = (path[idx].position - position).squaredNorm();
    for (std::size_t j = idx + 1; j <= hi; ++j) {
        const double d = (path[j].position - position).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    const std::size_t next = std::min(best, idx + static_cast<std::size_t>(cfg.max_advance));
    return {next, next >= last};
}

}  // namespace hyperfc
