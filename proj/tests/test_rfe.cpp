#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "boselearn/rfe.hpp"
#include "boselearn/rng.hpp"

using namespace boselearn;

TEST_CASE("modular distance") {
    REQUIRE(modular_distance(0.0, 2 * M_PI) < 1e-14);
    REQUIRE(std::abs(modular_distance(0.1, -0.1) - 0.2) < 1e-14);
    REQUIRE(std::abs(modular_distance(M_PI - 0.05, -M_PI + 0.05) - 0.1) < 1e-12);
    // symmetry and triangle inequality on random triples
    RngStream rng(4);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(-20, 20), b = rng.uniform(-20, 20), c = rng.uniform(-20, 20);
        REQUIRE(std::abs(modular_distance(a, b) - modular_distance(b, a)) < 1e-12);
        REQUIRE(modular_distance(a, b) <= modular_distance(a, c) + modular_distance(c, b) + 1e-12);
        REQUIRE(modular_distance(a, b) >= 0.0);
        REQUIRE(modular_distance(a, b) <= M_PI + 1e-12);
    }
}

TEST_CASE("schedule invariants") {
    for (const double W : {0.5, 1.05, 2.05, 10.0}) {
        for (const double eps : {1e-1, 1e-2, 1e-3}) {
            RfeSchedule s(W, eps);
            REQUIRE(s.J >= 1);
            double sum = 0.0;
            for (int j = 0; j < s.J; ++j) {
                REQUIRE(s.delta(j) > 0.0);
                REQUIRE(s.delta(j) <= 1.0);
                if (j + 1 < s.J) REQUIRE(std::abs(s.t(j + 1) - 2 * s.t(j)) < 1e-12 * s.t(j + 1));
                sum += s.E(j) * s.E(j) * s.delta(j);
            }
            // failure-tail contribution to the MSE stays within (3/4) eps^2
            REQUIRE(sum <= 0.75 * eps * eps * (1 + 1e-9));
            // for j >= 1 the closed form equals the optimizer's delta_j = (3 eps^2/4 E_j^2) 2^j/(2^J-1)
            for (int j = 1; j < s.J; ++j) {
                const double opt = 3 * eps * eps / (4 * s.E(j) * s.E(j)) * std::pow(2.0, j) / (std::pow(2.0, s.J) - 1);
                if (opt <= 1.0) REQUIRE(std::abs(s.delta(j) - opt) < 1e-12 * opt);
            }
        }
    }
}

TEST_CASE("noise-free provider recovers the frequency deterministically") {
    for (const double omega : {0.5, 0.0, -0.83, 0.999}) {
        const RfeSchedule sched(1.0, 1e-3);
        const auto provider = [&](double t, double delta) {
            PhaseSignal s;
            s.value = std::exp(cplx(0.0, -omega * t));
            s.t = t;
            s.delta = delta;
            s.shots = 1;
            s.ledger_time = t * (std::log(1.0 / delta) + 1.0);
            return s;
        };
        const auto res = rfe_run(provider, sched);
        REQUIRE(std::abs(res.estimate - omega) <= 1e-3);
    }
}

TEST_CASE("boundary-contract provider keeps the RMSE within epsilon") {
    // eta and C_f on the contract boundary: 2 asin(eta/2) + C_f = pi/3 - 0.01,
    // phase noise adversarially sign-flipped, failures (prob delta) return a
    // uniformly random phase.
    const double eps = 1e-2;
    const double W = 1.0;
    const double Cf = M_PI / 6.0;
    const double eta = 2.0 * std::sin((M_PI / 3.0 - 0.01 - Cf) / 2.0);
    const int trials = 100;
    double se = 0.0;
    RngStream rng(2024);
    for (int k = 0; k < trials; ++k) {
        const double omega = rng.uniform(-W, W) * 0.999;
        RngStream local = rng.derive(static_cast<std::uint64_t>(k));
        const auto provider = [&](double t, double delta) {
            PhaseSignal s;
            s.t = t;
            s.delta = delta;
            s.shots = 1;
            s.ledger_time = t * (std::log(1.0 / delta) + 1.0);
            if (local.uniform() < delta) {
                s.value = std::exp(cplx(0.0, local.uniform(0.0, 2 * M_PI)));
                return s;
            }
            // worst in-contract signal: full phase offset of magnitude
            // 2 asin(eta/2) + Cf with adversarial sign
            const double sgn = (std::sin(omega * t * 7.3) > 0) ? 1.0 : -1.0;
            const double shift = sgn * (2.0 * std::asin(eta / 2.0) + Cf);
            s.value = std::exp(cplx(0.0, -(omega * t + shift)));
            return s;
        };
        const auto res = rfe_run(provider, RfeSchedule(W, eps));
        se += (res.estimate - omega) * (res.estimate - omega);
    }
    REQUIRE(std::sqrt(se / trials) <= eps);
}

TEST_CASE("total evolution time scales like 1/epsilon") {
    // synthetic cost model C_Z t (log(1/delta) + 1), C_Z = 1
    std::vector<double> epss = {1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<double> times;
    for (const double eps : epss) {
        const RfeSchedule sched(1.0, eps);
        const auto provider = [&](double t, double delta) {
            PhaseSignal s;
            s.value = std::exp(cplx(0.0, -0.37 * t));
            s.t = t;
            s.delta = delta;
            s.shots = 1;
            s.ledger_time = t * (std::log(1.0 / delta) + 1.0);
            return s;
        };
        times.push_back(rfe_run(provider, sched).total_time);
    }
    // least-squares slope of log T vs log(1/eps)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(epss.size());
    for (int i = 0; i < n; ++i) {
        const double x = std::log(1.0 / epss[static_cast<std::size_t>(i)]);
        const double y = std::log(times[static_cast<std::size_t>(i)]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    REQUIRE(slope > 0.9);
    REQUIRE(slope < 1.1);
}

TEST_CASE("candidate separation: exactly one candidate falls inside the certified interval") {
    // when the previous estimate certifies |theta_{j-1} - w~|_{2pi} < pi/(3 2^{j-1}),
    // exactly one element of S_j lies within pi/2^j of theta_{j-1}
    RngStream rng(77);
    for (int rep = 0; rep < 300; ++rep) {
        const int j = 1 + static_cast<int>(rng.below(8));
        const double wt = rng.uniform(-M_PI / 3, M_PI / 3);
        const double theta_prev = wt + rng.uniform(-1.0, 1.0) * M_PI / (3.0 * std::pow(2.0, j - 1)) * 0.999;
        const double phase_err = rng.uniform(-1.0, 1.0) * (M_PI / 3 - 1e-6);
        const double arg = -(wt * std::pow(2.0, j) + phase_err);  // arg Z, within the contract
        int inside = 0;
        for (int k = 0; k < (1 << j); ++k) {
            const double cand = (2 * M_PI * k - (-arg)) / std::pow(2.0, j);
            if (modular_distance(cand, theta_prev) < M_PI / std::pow(2.0, j)) ++inside;
        }
        REQUIRE(inside == 1);
    }
}

TEST_CASE("final estimate is wrapped into [-pi W~, pi W~]") {
    const RfeSchedule sched(1.0, 1e-2);
    const auto provider = [&](double t, double) {
        PhaseSignal s;
        s.value = std::exp(cplx(0.0, -0.9 * t));
        s.t = t;
        s.shots = 1;
        s.ledger_time = t;
        return s;
    };
    const auto res = rfe_run(provider, sched);
    REQUIRE(std::abs(res.estimate) <= M_PI * sched.Wtilde + 1e-12);
}
