#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "boselearn/fock.hpp"
#include "boselearn/rng.hpp"

namespace boselearn {

// Truncated displacement exp(g b† - g* b) on a single mode, renormalized on
// the truncated space.
inline Eigen::MatrixXcd displacement_operator(cplx gamma, int cutoff) {
    const int d = cutoff + 1;
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < cutoff; ++k) {
        const double s = std::sqrt(static_cast<double>(k + 1));
        G(k + 1, k) = cplx(0.0, -1.0) * gamma * s;        // -i * g b†
        G(k, k + 1) = std::conj(G(k + 1, k));             // Hermitian part
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    Eigen::VectorXcd ph(d);
    for (int i = 0; i < d; ++i) ph[i] = std::exp(cplx(0.0, es.eigenvalues()[i]));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// Stochastic SPAM model: with probability 1-strength nothing happens; with
// probability strength one of a fixed set of random coherent kicks (drawn once
// from the channel seed) displaces the target mode. The mixture weight equals
// `strength`, which bounds the ensemble deviation from the identity channel.
struct SpamChannel {
    enum class Kind { StatePrep, PreMeasurement };

    double strength = 0.0;
    Kind kind = Kind::StatePrep;
    double kick_radius = 0.1;
    int num_variants = 6;
    std::uint64_t seed = 0;
    std::vector<cplx> kicks;

    SpamChannel() = default;
    SpamChannel(double s, Kind k, double radius, int variants, std::uint64_t sd)
        : strength(s), kind(k), kick_radius(radius), num_variants(variants), seed(sd) {
        if (s < 0.0 || s >= 1.0) throw std::invalid_argument("SpamChannel: strength in [0,1) required");
        if (variants < 1) throw std::invalid_argument("SpamChannel: need at least one kick variant");
        RngStream rng = RngStream(sd).derive(0x7370616dULL);
        kicks.reserve(static_cast<std::size_t>(variants));
        for (int v = 0; v < variants; ++v) {
            const double r = radius * std::sqrt(rng.uniform());
            const double ph = rng.uniform(0.0, 2.0 * M_PI);
            kicks.push_back(cplx(r * std::cos(ph), r * std::sin(ph)));
        }
    }

    // -1: identity; otherwise index of the kick variant applied this shot.
    int draw_variant(RngStream& rng) const {
        if (strength == 0.0) return -1;
        if (rng.uniform() >= strength) return -1;
        return static_cast<int>(rng.below(static_cast<std::uint64_t>(num_variants)));
    }
};

inline FockVector apply_kick(const FockVector& state, int mode, cplx gamma) {
    const Eigen::MatrixXcd D = displacement_operator(gamma, state.cutoff);
    FockVector out = state;
    const std::size_t st = state.stride(mode);
    const int lv = state.levels();
    const std::size_t blocks = state.dim() / static_cast<std::size_t>(lv);
    // apply D along the mode axis
    std::vector<cplx> buf(static_cast<std::size_t>(lv));
    for (std::size_t blk = 0; blk < blocks; ++blk) {
        // base index of this 1D fiber
        const std::size_t outer = blk / st;
        const std::size_t inner = blk % st;
        const std::size_t base = outer * st * static_cast<std::size_t>(lv) + inner;
        for (int k = 0; k < lv; ++k) buf[static_cast<std::size_t>(k)] = state.amps[base + static_cast<std::size_t>(k) * st];
        for (int r = 0; r < lv; ++r) {
            cplx acc(0.0, 0.0);
            for (int c = 0; c < lv; ++c) acc += D(r, c) * buf[static_cast<std::size_t>(c)];
            out.amps[base + static_cast<std::size_t>(r) * st] = acc;
        }
    }
    const double n = out.norm();
    out.leakage = state.leakage + std::abs(1.0 - n);
    out.normalize();
    return out;
}

// One stochastic realization of the channel on the given mode.
inline FockVector apply_spam(const SpamChannel& ch, const FockVector& state, int mode, RngStream& rng) {
    const int v = ch.draw_variant(rng);
    if (v < 0) return state;
    return apply_kick(state, mode, ch.kicks[static_cast<std::size_t>(v)]);
}

}  // namespace boselearn
