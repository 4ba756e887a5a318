// Actuator failure parameterization shared by dynamics and the environment.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <string_view>

#include "hyperfc/core/error.hpp"

namespace hyperfc {

/// Actuators that can fail, in packing order.
enum class FailActuator : int { RightAileron = 0, LeftAileron = 1, Rudder = 2 };

inline constexpr int kNumFailActuators = 3;

inline std::string_view actuator_name(FailActuator a) {
    switch (a) {
        case FailActuator::RightAileron: return "right_aileron";
        case FailActuator::LeftAileron: return "left_aileron";
        case FailActuator::Rudder: return "rudder";
    }
    return "?";
}

inline FailActuator actuator_from_name(std::string_view s) {
    if (s == "right_aileron") return FailActuator::RightAileron;
    if (s == "left_aileron") return FailActuator::LeftAileron;
    if (s == "rudder") return FailActuator::Rudder;
    throw ConfigError("unknown actuator '" + std::string(s) + "'");
}

/// Six-element lambda: [A_r fail, A_r val, A_l fail, A_l val, R fail, R val].
/// A level is reported as 0 whenever its flag is 0.
class FailureVector {
public:
    FailureVector() { packed_.fill(0.0); }

    static FailureVector nominal() { return {}; }

    static FailureVector stuck(FailActuator a, double level) {
        FailureVector f;
        f.set_stuck(a, level);
        return f;
    }

    void set_stuck(FailActuator a, double level) {
        if (level < -1.0 || level > 1.0) throw ConfigError("stuck level outside [-1, 1]");
        const int i = static_cast<int>(a);
        packed_[2 * i] = 1.0;
        packed_[2 * i + 1] = level;
    }

    bool failed(FailActuator a) const { return packed_[2 * static_cast<int>(a)] == 1.0; }
    double level(FailActuator a) const { return packed_[2 * static_cast<int>(a) + 1]; }

    bool any_failed() const {
        return packed_[0] == 1.0 || packed_[2] == 1.0 || packed_[4] == 1.0;
    }

    const std::array<double, 6>& packed() const { return packed_; }

    Eigen::Matrix<double, 6, 1> as_vector() const {
        return Eigen::Map<const Eigen::Matrix<double, 6, 1>>(packed_.data());
    }

    friend bool operator==(const FailureVector&, const FailureVector&) = default;

private:
    std::array<double, 6> packed_;
};

}  // namespace hyperfc
