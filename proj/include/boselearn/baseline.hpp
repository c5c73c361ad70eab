#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "boselearn/evolve.hpp"
#include "boselearn/homodyne.hpp"
#include "boselearn/rng.hpp"

namespace boselearn {

// Standard-quantum-limit control: estimate omega of an anharmonic mode from
// repeated sampling at one fixed short time, omega_hat = -arg(Z̄)/t0. The
// precision improves like 1/sqrt(samples), so the sample count needed for a
// target RMSE scales like epsilon^-2; the quantum-enhanced protocol's ledger
// grows only like epsilon^-1.
struct SqlBaselinePoint {
    double epsilon = 0.0;
    std::int64_t samples = 0;  // total measurement shots (X and P)
    double rmse = 0.0;
};

inline double sql_rmse(double omega, double xi, double alpha, double t0, std::int64_t L, int cutoff, int trials,
                       RngStream& rng) {
    LatticeModel m(1);
    m.omega[0] = omega;
    m.xi[0] = xi;
    const auto psi = evolve_exact(HamiltonianAction(m, cutoff), coherent_state(cplx(alpha, 0), 1, 0, cutoff), t0);
    const QuadratureGrid grid{8.0, 0.01};
    SampleDistribution dx(psi, 0, Quadrature::X, grid), dp(psi, 0, Quadrature::P, grid);
    const double f_shift = alpha * alpha * std::sin(xi * t0);  // known-phase correction of the closed form
    double se = 0.0;
    for (int k = 0; k < trials; ++k) {
        double sx = 0, sp = 0;
        for (std::int64_t i = 0; i < L; ++i) sx += dx.sample(rng);
        for (std::int64_t i = 0; i < L; ++i) sp += dp.sample(rng);
        const cplx zb(sx / static_cast<double>(L), sp / static_cast<double>(L));
        const double est = -(std::arg(zb) + f_shift) / t0;
        se += (est - omega) * (est - omega);
    }
    return std::sqrt(se / trials);
}

// For each epsilon, grow the sample count until the measured RMSE drops below
// the target; the resulting L(epsilon) curve carries the epsilon^-2 law.
inline std::vector<SqlBaselinePoint> sql_baseline_curve(const std::vector<double>& epsilons, double omega, double xi,
                                                        double alpha, std::uint64_t seed, int trials = 48,
                                                        int cutoff = 14) {
    RngStream rng(seed);
    std::vector<SqlBaselinePoint> out;
    const double t0 = 1.0;
    std::int64_t L = 4;
    for (const double eps : epsilons) {  // epsilons assumed descending
        double rmse = 0.0;
        for (;;) {
            rmse = sql_rmse(omega, xi, alpha, t0, L, cutoff, trials, rng);
            if (rmse <= eps || L > (1LL << 40)) break;
            L = static_cast<std::int64_t>(std::ceil(static_cast<double>(L) * 1.5));
        }
        out.push_back({eps, 2 * L, rmse});
    }
    return out;
}

inline double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys, double* stderr_out = nullptr) {
    const int n = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(xs[static_cast<std::size_t>(i)]);
        const double y = std::log(ys[static_cast<std::size_t>(i)]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    if (stderr_out) {
        const double intercept = (sy - slope * sx) / n;
        double ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = std::log(xs[static_cast<std::size_t>(i)]);
            const double y = std::log(ys[static_cast<std::size_t>(i)]);
            const double r = y - (slope * x + intercept);
            ss += r * r;
        }
        *stderr_out = (n > 2) ? std::sqrt(ss / (n - 2) / (sxx - sx * sx / n)) : 0.0;
    }
    return slope;
}

}  // namespace boselearn
