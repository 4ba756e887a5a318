#pragma once

#include <optional>

#include "hyperfc/core/error.hpp"
#include "hyperfc/dynamics/state.hpp"

namespace hyperfc {

/// Zero- or one-step command delay line. With delay 1 the first output of an
/// episode is the reference command.
class CommandDelay {
public:
    CommandDelay() = default;
    explicit CommandDelay(int steps) { reset(steps); }

    void reset(int steps) {
        if (steps != 0 && steps != 1) throw ConfigError("command delay must be 0 or 1 steps");
        steps_ = steps;
        pending_.reset();
    }

    int steps() const { return steps_; }

    CommandVector push(const CommandVector& cmd, const CommandVector& reference_cmd) {
        if (steps_ == 0) return cmd;
        const CommandVector out = pending_.value_or(reference_cmd);
        pending_ = cmd;
        return out;
    }

    const std::optional<CommandVector>& pending() const { return pending_; }
    void set_pending(const std::optional<CommandVector>& p) { pending_ = p; }

private:
    int steps_ = 0;
    std::optional<CommandVector> pending_;
};

}  // namespace hyperfc
