#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "boselearn/homodyne.hpp"

namespace boselearn {

// Distance to 0 on the circle: |theta|_{2pi} = pi - |(theta mod 2pi) - pi|, in [0, pi].
inline double modular_distance(double a, double b) {
    double d = std::fmod(a - b, 2.0 * M_PI);
    if (d < 0.0) d += 2.0 * M_PI;
    return M_PI - std::abs(d - M_PI);
}

// Iterative frequency refinement: J rounds of signals at doubling times with
// per-round failure budgets delta_j chosen so the failure tail contributes at
// most (3/4) eps^2 to the mean squared error.
//
//   Wtilde = 3W/pi,  J = max{1, ceil(log2(4 pi Wtilde / (3 eps)))},
//   t_j = 2^j / Wtilde,
//   delta_j = 27 eps^2/(pi^2 Wtilde^2) * 2^{3j-6}/(2^J - 1)      (j >= 1)
//   delta_0 = 3 eps^2 / (16 pi^2 Wtilde^2 (2^J - 1)),
// each clamped into (0, 1]. The j = 0 budget is the optimizer's share for the
// round-0 error level E_0 = 2 pi Wtilde; for j >= 1 the closed form above
// coincides with the optimizer's delta_j = (3 eps^2 / 4 E_j^2) 2^j/(2^J-1).
struct RfeSchedule {
    double W = 1.0;
    double epsilon = 1e-2;
    double Wtilde = 0.0;
    int J = 1;

    RfeSchedule(double bound, double eps) : W(bound), epsilon(eps) {
        if (!(bound > 0.0) || !(eps > 0.0)) throw std::invalid_argument("RfeSchedule: W > 0, eps > 0 required");
        Wtilde = 3.0 * W / M_PI;
        J = std::max(1, static_cast<int>(std::ceil(std::log2(4.0 * M_PI * Wtilde / (3.0 * eps)))));
    }

    double t(int j) const { return std::pow(2.0, j) / Wtilde; }

    double delta(int j) const {
        double d;
        if (j == 0) {
            d = 3.0 * epsilon * epsilon / (16.0 * M_PI * M_PI * Wtilde * Wtilde * (std::pow(2.0, J) - 1.0));
        } else {
            d = 27.0 * epsilon * epsilon / (M_PI * M_PI * Wtilde * Wtilde) * std::pow(2.0, 3 * j - 6) /
                (std::pow(2.0, J) - 1.0);
        }
        return std::min(d, 1.0);
    }

    // error level if round j is the first failure
    double E(int j) const {
        if (j == 0) return 2.0 * M_PI * Wtilde;
        return 4.0 * M_PI * Wtilde / (3.0 * std::pow(2.0, j));
    }
};

using SignalProvider = std::function<PhaseSignal(double t, double delta)>;

struct RfeResult {
    double estimate = 0.0;
    double total_time = 0.0;
    std::int64_t total_shots = 0;
    int iterations = 0;
    int clamp_warnings = 0;
};

// Candidate-set refinement: round j folds arg Z into 2^j candidates and keeps
// the one closest to the previous estimate in the circle metric (smallest
// index on ties). The provider's failures surface only as statistical
// outliers; the run never aborts on a bad signal.
inline RfeResult rfe_run(const SignalProvider& provider, const RfeSchedule& sched) {
    RfeResult res;
    double theta_prev = 0.0;
    for (int j = 0; j < sched.J; ++j) {
        const double tj = sched.t(j);
        const double dj = sched.delta(j);
        const PhaseSignal sig = provider(tj, dj);
        res.total_time += sig.ledger_time;
        res.total_shots += sig.shots;
        res.clamp_warnings += sig.clamp_warnings;
        const double arg = std::arg(sig.value);
        const double scale = std::pow(2.0, j);
        double best = 0.0, best_d = 0.0;
        for (std::int64_t k = 0; k < static_cast<std::int64_t>(scale); ++k) {
            const double cand = (2.0 * M_PI * static_cast<double>(k) - arg) / scale;
            const double d = modular_distance(cand, theta_prev);
            if (k == 0 || d < best_d) {
                best = cand;
                best_d = d;
            }
        }
        theta_prev = best;
        ++res.iterations;
    }
    // wrap into [-pi, pi]
    double theta = std::fmod(theta_prev, 2.0 * M_PI);
    if (theta > M_PI) theta -= 2.0 * M_PI;
    if (theta < -M_PI) theta += 2.0 * M_PI;
    res.estimate = sched.Wtilde * theta;
    return res;
}

}  // namespace boselearn
