#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "boselearn/fock.hpp"
#include "boselearn/rng.hpp"

namespace boselearn {

enum class Quadrature { X, P };

// Position-basis discretization for homodyne sampling: the wavefunction is
// expanded over Hermite functions phi_n on a uniform grid of step dx covering
// [-x_max, x_max].
struct QuadratureGrid {
    double x_max = 6.0;
    double dx = 0.01;

    static QuadratureGrid for_threshold(double M) { return {std::max(6.0, M + 2.0), 0.01}; }
};

// phi_n(x) for n = 0..nmax by the stable normalized recurrence
//   phi_0 = pi^{-1/4} e^{-x^2/2},  phi_{n+1} = sqrt(2/(n+1)) x phi_n - sqrt(n/(n+1)) phi_{n-1}.
inline void hermite_functions(double x, int nmax, double* out) {
    out[0] = std::pow(M_PI, -0.25) * std::exp(-x * x / 2.0);
    if (nmax >= 1) out[1] = std::sqrt(2.0) * x * out[0];
    for (int n = 1; n < nmax; ++n)
        out[n + 1] = std::sqrt(2.0 / (n + 1)) * x * out[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * out[n - 1];
}

// |psi(x)|^2 of one mode of a (possibly multi-mode) state, tabulated on the
// grid with an inverse-CDF sampler. For product states this is exactly the
// mode's marginal; in general it is the reduced position density
// sum_rest |sum_k c(k, rest) phi_k(x)|^2. P is sampled by rotating the mode by
// exp(-i (pi/2) n) and reusing the X machinery.
class SampleDistribution {
public:
    SampleDistribution(const FockVector& state, int mode, Quadrature quad, const QuadratureGrid& grid,
                       double mass_tol = 1e-6) {
        if (mode < 0 || mode >= state.num_modes) throw std::out_of_range("SampleDistribution: mode out of range");
        const int lv = state.levels();
        const std::size_t st = state.stride(mode);
        const std::size_t fibers = state.dim() / static_cast<std::size_t>(lv);

        // collect fibers along the mode axis, with the P-rotation phase folded in
        std::vector<cplx> fiber_amps(state.dim());
        std::vector<cplx> phase(static_cast<std::size_t>(lv), cplx(1.0, 0.0));
        if (quad == Quadrature::P)
            for (int k = 0; k < lv; ++k) phase[static_cast<std::size_t>(k)] = std::exp(cplx(0.0, -M_PI / 2.0 * k));
        for (std::size_t f = 0; f < fibers; ++f) {
            const std::size_t outer = f / st;
            const std::size_t inner = f % st;
            const std::size_t base = outer * st * static_cast<std::size_t>(lv) + inner;
            for (int k = 0; k < lv; ++k)
                fiber_amps[f * static_cast<std::size_t>(lv) + static_cast<std::size_t>(k)] =
                    state.amps[base + static_cast<std::size_t>(k) * st] * phase[static_cast<std::size_t>(k)];
        }

        const std::size_t n = static_cast<std::size_t>(std::llround(2.0 * grid.x_max / grid.dx)) + 1;
        xs_.resize(n);
        pdf_.resize(n);
        dx_ = grid.dx;
        std::vector<double> phi(static_cast<std::size_t>(lv));
        for (std::size_t i = 0; i < n; ++i) {
            const double x = -grid.x_max + static_cast<double>(i) * grid.dx;
            xs_[i] = x;
            hermite_functions(x, lv - 1, phi.data());
            double p = 0.0;
            for (std::size_t f = 0; f < fibers; ++f) {
                cplx amp(0.0, 0.0);
                const cplx* fa = &fiber_amps[f * static_cast<std::size_t>(lv)];
                for (int k = 0; k < lv; ++k) amp += fa[static_cast<std::size_t>(k)] * phi[static_cast<std::size_t>(k)];
                p += std::norm(amp);
            }
            pdf_[i] = p;
        }
        cdf_.resize(n);
        cdf_[0] = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) cdf_[i + 1] = cdf_[i] + 0.5 * (pdf_[i] + pdf_[i + 1]) * dx_;
        mass_ = cdf_.back();
        if (std::abs(mass_ - 1.0) > mass_tol)
            throw std::runtime_error("SampleDistribution: grid mass outside tolerance (grid underflow)");
        build_lut();
    }

    double mass() const { return mass_; }

    double sample(RngStream& rng) const {
        const double u = rng.uniform() * mass_;
        std::size_t i = lut_[std::min(static_cast<std::size_t>(u / mass_ * kLut), kLut - 1)];
        while (i + 2 < cdf_.size() && cdf_[i + 1] < u) ++i;
        const double tau = u - cdf_[i];
        const double a = pdf_[i], b = pdf_[i + 1];
        double s;
        if (std::abs(b - a) < 1e-300) {
            s = (a > 0.0) ? tau / (a * dx_) : 0.5;
        } else {
            const double disc = std::max(0.0, a * a + 2.0 * (b - a) * tau / dx_);
            s = (std::sqrt(disc) - a) / (b - a);
        }
        s = std::clamp(s, 0.0, 1.0);
        return xs_[i] + s * dx_;
    }

    // exact grid moments of the tabulated density (normalized by the grid mass)
    double mean() const { return moment([](double x) { return x; }); }
    double second_moment() const { return moment([](double x) { return x * x; }); }
    double mean_truncated(double M) const {
        return moment([M](double x) { return (std::abs(x) <= M) ? x : 0.0; });
    }
    double prob_beyond(double M) const {
        return moment([M](double x) { return (std::abs(x) > M) ? 1.0 : 0.0; });
    }

    double cdf_at(double x) const {
        if (x <= xs_.front()) return 0.0;
        if (x >= xs_.back()) return 1.0;
        const std::size_t i = static_cast<std::size_t>((x - xs_.front()) / dx_);
        const double s = (x - xs_[i]) / dx_;
        const double a = pdf_[i], b = pdf_[std::min(i + 1, pdf_.size() - 1)];
        return (cdf_[i] + dx_ * (a * s + 0.5 * (b - a) * s * s)) / mass_;
    }

private:
    template <class F>
    double moment(F f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
            acc += 0.5 * (f(xs_[i]) * pdf_[i] + f(xs_[i + 1]) * pdf_[i + 1]) * dx_;
        return acc / mass_;
    }

    void build_lut() {
        lut_.resize(kLut);
        std::size_t j = 0;
        for (std::size_t k = 0; k < kLut; ++k) {
            const double target = static_cast<double>(k) / kLut * mass_;
            while (j + 2 < cdf_.size() && cdf_[j + 1] < target) ++j;
            lut_[k] = j;
        }
    }

    static constexpr std::size_t kLut = 2048;
    std::vector<double> xs_, pdf_, cdf_;
    std::vector<std::size_t> lut_;
    double dx_ = 0.0;
    double mass_ = 0.0;
};

// One homodyne draw from |psi(x)|^2 of the given mode.
inline double sample_quadrature(const FockVector& state, int mode, Quadrature quad, const QuadratureGrid& grid,
                                RngStream& rng) {
    return SampleDistribution(state, mode, quad, grid).sample(rng);
}

// --- truncated-observable estimation ----------------------------------------

// A shot is a freshly prepared-and-evolved state. `key` identifies the state
// content: factories that can only produce a finite set of distinct states
// (deterministic preparation, discrete SPAM variants) reuse keys so the
// per-state sampling tables are built once; genuinely stochastic factories
// return a fresh key per shot and pay the full rebuild.
struct ShotState {
    const FockVector* state;
    std::uint64_t key;
};

using StateFactory = std::function<ShotState(RngStream&)>;

class DistCache {
public:
    explicit DistCache(std::size_t capacity = 256) : cap_(capacity) {}

    const SampleDistribution& get(const ShotState& shot, int mode, Quadrature quad, const QuadratureGrid& grid) {
        const std::uint64_t key = shot.key * 4u + static_cast<std::uint64_t>(quad) * 2u + 1u;
        auto it = map_.find(key);
        if (it != map_.end()) return *it->second;
        auto dist = std::make_unique<SampleDistribution>(*shot.state, mode, quad, grid);
        if (order_.size() >= cap_) {
            map_.erase(order_.front());
            order_.pop_front();
        }
        order_.push_back(key);
        return *map_.emplace(key, std::move(dist)).first->second;
    }

private:
    std::size_t cap_;
    std::unordered_map<std::uint64_t, std::unique_ptr<SampleDistribution>> map_;
    std::deque<std::uint64_t> order_;
};

struct TruncatedBEstimate {
    cplx z_bar;                    // (x̄ + i p̄)/sqrt(2), zero-out discarding
    std::int64_t shots = 0;        // total prepare-evolve-measure cycles (2L)
    std::int64_t discarded = 0;    // samples beyond |x| > M (counted as 0)
};

// Z̄ from L X-shots and L P-shots with threshold M. Discarded samples
// contribute zero, matching the truncated observables X 1{|X|<=M}, P 1{|P|<=M},
// so the estimator stays unbiased for their expectations.
inline TruncatedBEstimate estimate_truncated_b(const StateFactory& factory, int mode, double M, std::int64_t L,
                                               const QuadratureGrid& grid, RngStream& rng,
                                               DistCache* cache = nullptr) {
    if (M <= 0.0) throw std::invalid_argument("estimate_truncated_b: M > 0 required");
    if (L < 1) throw std::invalid_argument("estimate_truncated_b: L >= 1 required");
    DistCache local;
    DistCache& c = cache ? *cache : local;
    TruncatedBEstimate out;
    double sums[2] = {0.0, 0.0};
    for (int q = 0; q < 2; ++q) {
        const Quadrature quad = (q == 0) ? Quadrature::X : Quadrature::P;
        for (std::int64_t s = 0; s < L; ++s) {
            const ShotState shot = factory(rng);
            const double x = c.get(shot, mode, quad, grid).sample(rng);
            if (std::abs(x) <= M)
                sums[q] += x;
            else
                ++out.discarded;
            ++out.shots;
        }
    }
    out.z_bar = cplx(sums[0], sums[1]) / (std::sqrt(2.0) * static_cast<double>(L));
    return out;
}

// --- unit-circle signals -----------------------------------------------------

// One Z_delta(t) sample: complex unit value plus the evolution-time ledger of
// the experiments that produced it.
struct PhaseSignal {
    cplx value;
    double t = 0.0;
    std::int64_t shots = 0;
    double delta = 0.0;
    double ledger_time = 0.0;
    int clamp_warnings = 0;
};

struct ZeroSignalError : std::runtime_error {
    ZeroSignalError() : std::runtime_error("signal: vanishing Z-bar") {}
};

inline PhaseSignal signal_for_omega(cplx z_bar, double t, std::int64_t shots, double delta, double ledger_time) {
    const double m = std::abs(z_bar);
    if (m == 0.0) throw ZeroSignalError();
    return PhaseSignal{z_bar / m, t, shots, delta, ledger_time, 0};
}

// cos(xi t) is reconstructed from |Z̄_1| via (1/|a1|^2) log(|Z̄_1|/a1) + 1 and
// sin(xi t) from the unit ratio Z̄_1/Z̄_2 via (1/beta) arcsin(Im ·) with
// beta = |a2|^2 - |a1|^2. Requires a2 > a1 > 0, |a|^2 < pi/3 and |beta| <= pi/3.
inline PhaseSignal signal_for_xi(cplx z1, cplx z2, double alpha1, double alpha2, double t, std::int64_t shots,
                                 double delta, double ledger_time) {
    if (!(alpha1 > 0.0) || !(alpha2 > alpha1))
        throw std::invalid_argument("signal_for_xi: need alpha2 > alpha1 > 0");
    const double a1sq = alpha1 * alpha1, a2sq = alpha2 * alpha2;
    if (a1sq >= M_PI / 3.0 || a2sq >= M_PI / 3.0)
        throw std::invalid_argument("signal_for_xi: |alpha|^2 < pi/3 required");
    const double beta = a2sq - a1sq;
    if (beta > M_PI / 3.0) throw std::invalid_argument("signal_for_xi: beta <= pi/3 required");
    if (std::abs(z1) == 0.0 || std::abs(z2) == 0.0) throw ZeroSignalError();

    PhaseSignal sig;
    const double c_hat = std::log(std::abs(z1) / alpha1) / a1sq + 1.0;
    cplx ratio = z1 / z2;
    ratio /= std::abs(ratio);
    double im = ratio.imag();
    if (im > 1.0) { im = 1.0; ++sig.clamp_warnings; }
    if (im < -1.0) { im = -1.0; ++sig.clamp_warnings; }
    const double s_hat = std::asin(im) / beta;
    const cplx v(c_hat, s_hat);
    const double m = std::abs(v);
    if (m == 0.0) throw ZeroSignalError();
    sig.value = v / m;
    sig.t = t;
    sig.shots = shots;
    sig.delta = delta;
    sig.ledger_time = ledger_time;
    return sig;
}

// Shot counts from the statistical failure budget (Hoeffding with the union
// over two quadratures, and over two amplitudes for the xi signal).
inline std::int64_t shots_for_omega(double M, double eta1, double delta) {
    return static_cast<std::int64_t>(std::ceil(2.0 * M * M / (eta1 * eta1) * std::log(4.0 / delta)));
}

inline std::int64_t shots_for_xi(double M, double eta1, double delta) {
    return static_cast<std::int64_t>(std::ceil(2.0 * M * M / (eta1 * eta1) * std::log(8.0 / delta)));
}

}  // namespace boselearn
