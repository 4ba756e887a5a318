// Bounded random-walk perturbation of the six aerodynamic coefficients.
#pragma once

#include <algorithm>

#include "hyperfc/core/rng.hpp"
#include "hyperfc/dynamics/aero.hpp"

namespace hyperfc {

struct CoeffPerturbation {
    Coeff6 value = Coeff6::Zero();
    Coeff6 magnitude = Coeff6::Zero();  // |value_i| <= magnitude_i
    Coeff6 rate = Coeff6::Zero();       // |value_i(k) - value_i(k-1)| <= rate_i
};

/// Magnitude is `fraction` of each nominal coefficient (with a floor); the
/// per-step rate bound is magnitude / rate_divisor.
inline CoeffPerturbation perturbation_bounds_from_trim(const Coeff6& trim_coeffs, double fraction = 0.1,
                                                       double floor = 0.01, double rate_divisor = 25.0) {
    CoeffPerturbation p;
    for (int i = 0; i < 6; ++i) {
        p.magnitude[i] = std::max(fraction * std::abs(trim_coeffs[i]), floor);
        p.rate[i] = p.magnitude[i] / rate_divisor;
    }
    return p;
}

/// Uniform increment within the rate bound, then clipped to the magnitude bound.
inline Coeff6 perturb_step(CoeffPerturbation& pert, Rng& rng) {
    for (int i = 0; i < 6; ++i) {
        if (pert.magnitude[i] <= 0.0 || pert.rate[i] <= 0.0) {
            pert.value[i] = std::clamp(pert.value[i], -pert.magnitude[i], pert.magnitude[i]);
            continue;
        }
        const double inc = rng.uniform(-pert.rate[i], pert.rate[i]);
        pert.value[i] = std::clamp(pert.value[i] + inc, -pert.magnitude[i], pert.magnitude[i]);
    }
    return pert.value;
}

}  // namespace hyperfc
