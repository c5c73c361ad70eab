#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace boselearn {

using cplx = std::complex<double>;

// Multi-mode pure state on a truncated occupation-number basis. Amplitudes are
// dense, indexed row-major with mode 0 most significant: per-mode dimension is
// cutoff+1 and index = sum_m n_m * (cutoff+1)^(num_modes-1-m).
struct FockVector {
    int num_modes = 0;
    int cutoff = 0;  // max occupation per mode
    std::vector<cplx> amps;
    double leakage = 0.0;  // accumulated truncation mass (state preparation + solver drift)

    FockVector() = default;
    FockVector(int modes, int cut)
        : num_modes(modes), cutoff(cut), amps(dimension(modes, cut), cplx(0.0, 0.0)) {
        if (modes < 1 || cut < 1) throw std::invalid_argument("FockVector: need modes >= 1, cutoff >= 1");
    }

    static std::size_t dimension(int modes, int cut) {
        std::size_t d = 1;
        for (int m = 0; m < modes; ++m) d *= static_cast<std::size_t>(cut + 1);
        return d;
    }

    int levels() const { return cutoff + 1; }
    std::size_t dim() const { return amps.size(); }

    std::size_t stride(int mode) const {
        std::size_t s = 1;
        for (int m = mode + 1; m < num_modes; ++m) s *= static_cast<std::size_t>(levels());
        return s;
    }

    int occupation(std::size_t index, int mode) const {
        return static_cast<int>((index / stride(mode)) % static_cast<std::size_t>(levels()));
    }

    std::size_t to_index(std::span<const int> occ) const {
        if (static_cast<int>(occ.size()) != num_modes)
            throw std::invalid_argument("to_index: occupation tuple size mismatch");
        std::size_t idx = 0;
        for (int m = 0; m < num_modes; ++m) {
            if (occ[m] < 0 || occ[m] > cutoff) throw std::out_of_range("to_index: occupation out of range");
            idx = idx * static_cast<std::size_t>(levels()) + static_cast<std::size_t>(occ[m]);
        }
        return idx;
    }

    std::vector<int> to_tuple(std::size_t index) const {
        std::vector<int> occ(num_modes);
        for (int m = num_modes - 1; m >= 0; --m) {
            occ[m] = static_cast<int>(index % static_cast<std::size_t>(levels()));
            index /= static_cast<std::size_t>(levels());
        }
        return occ;
    }

    double norm() const {
        double s = 0.0;
        for (const auto& a : amps) s += std::norm(a);
        return std::sqrt(s);
    }

    void scale(cplx c) {
        for (auto& a : amps) a *= c;
    }

    void normalize() {
        double n = norm();
        if (n == 0.0) throw std::runtime_error("normalize: zero vector");
        scale(cplx(1.0 / n, 0.0));
    }
};

inline cplx inner_product(const FockVector& a, const FockVector& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("inner_product: dimension mismatch");
    cplx s(0.0, 0.0);
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a.amps[i]) * b.amps[i];
    return s;
}

inline double fidelity(const FockVector& a, const FockVector& b) {
    return std::norm(inner_product(a, b));
}

enum class OpKind { Annihilate, Create, Number, QuadX, QuadP };

// Single-mode ladder/number/quadrature operator acting on the truncated basis.
// Truncation rule: b|k> = sqrt(k)|k-1>, b†|k> = sqrt(k+1)|k+1>, b†|cutoff> = 0.
struct ModeOperator {
    OpKind kind;
    int mode;
};

namespace detail {

// out += coeff * b_mode |in>
inline void accumulate_annihilate(const FockVector& in, int mode, cplx coeff, FockVector& out) {
    const std::size_t st = in.stride(mode);
    const int lv = in.levels();
    for (std::size_t i = 0; i < in.dim(); ++i) {
        const int k = static_cast<int>((i / st) % static_cast<std::size_t>(lv));
        if (k > 0 && in.amps[i] != cplx(0.0, 0.0))
            out.amps[i - st] += coeff * std::sqrt(static_cast<double>(k)) * in.amps[i];
    }
}

// out += coeff * b†_mode |in>
inline void accumulate_create(const FockVector& in, int mode, cplx coeff, FockVector& out) {
    const std::size_t st = in.stride(mode);
    const int lv = in.levels();
    for (std::size_t i = 0; i < in.dim(); ++i) {
        const int k = static_cast<int>((i / st) % static_cast<std::size_t>(lv));
        if (k < lv - 1 && in.amps[i] != cplx(0.0, 0.0))
            out.amps[i + st] += coeff * std::sqrt(static_cast<double>(k + 1)) * in.amps[i];
    }
}

}  // namespace detail

inline FockVector apply_operator(const ModeOperator& op, const FockVector& state) {
    if (op.mode < 0 || op.mode >= state.num_modes) throw std::out_of_range("apply_operator: mode out of range");
    FockVector out(state.num_modes, state.cutoff);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    switch (op.kind) {
        case OpKind::Annihilate:
            detail::accumulate_annihilate(state, op.mode, cplx(1.0, 0.0), out);
            break;
        case OpKind::Create:
            detail::accumulate_create(state, op.mode, cplx(1.0, 0.0), out);
            break;
        case OpKind::Number: {
            const std::size_t st = state.stride(op.mode);
            const int lv = state.levels();
            for (std::size_t i = 0; i < state.dim(); ++i) {
                const int k = static_cast<int>((i / st) % static_cast<std::size_t>(lv));
                out.amps[i] = static_cast<double>(k) * state.amps[i];
            }
            break;
        }
        case OpKind::QuadX:  // (b + b†)/sqrt(2)
            detail::accumulate_annihilate(state, op.mode, cplx(inv_sqrt2, 0.0), out);
            detail::accumulate_create(state, op.mode, cplx(inv_sqrt2, 0.0), out);
            break;
        case OpKind::QuadP:  // i(b† - b)/sqrt(2)
            detail::accumulate_create(state, op.mode, cplx(0.0, inv_sqrt2), out);
            detail::accumulate_annihilate(state, op.mode, cplx(0.0, -inv_sqrt2), out);
            break;
    }
    return out;
}

// <psi| O_1 O_2 ... O_n |psi>, product applied right to left.
inline cplx expectation(std::span<const ModeOperator> ops, const FockVector& state, double leak_tol = 1e-8) {
    const double n = state.norm();
    if (std::abs(n - 1.0) > leak_tol)
        throw std::invalid_argument("expectation: state not normalized within leak tolerance");
    FockVector cur = state;
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) cur = apply_operator(*it, cur);
    return inner_product(state, cur);
}

inline cplx expectation(const ModeOperator& op, const FockVector& state, double leak_tol = 1e-8) {
    return expectation(std::span<const ModeOperator>(&op, 1), state, leak_tol);
}

// Coherent amplitudes e^{-|a|^2/2} a^k / sqrt(k!) for k = 0..cutoff, plus the
// truncated tail mass. Requires |a|^2 <= cutoff/4 so the tail is negligible.
inline std::vector<cplx> coherent_amplitudes(cplx alpha, int cutoff, double* tail_mass = nullptr) {
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
        throw std::invalid_argument("coherent_amplitudes: non-finite alpha");
    const double a2 = std::norm(alpha);
    if (a2 > static_cast<double>(cutoff) / 4.0)
        throw std::invalid_argument("coherent_amplitudes: cutoff too small for |alpha|^2 <= cutoff/4");
    std::vector<cplx> c(static_cast<std::size_t>(cutoff) + 1);
    c[0] = std::exp(-a2 / 2.0);
    for (int k = 1; k <= cutoff; ++k) c[k] = c[k - 1] * alpha / std::sqrt(static_cast<double>(k));
    double mass = 0.0;
    for (const auto& v : c) mass += std::norm(v);
    if (tail_mass) *tail_mass = std::max(0.0, 1.0 - mass);
    return c;
}

// Coherent state |alpha> on one mode, vacuum elsewhere; renormalized, with the
// discarded tail recorded as leakage.
inline FockVector coherent_state(cplx alpha, int num_modes, int mode, int cutoff) {
    if (mode < 0 || mode >= num_modes) throw std::out_of_range("coherent_state: mode out of range");
    double tail = 0.0;
    const auto c = coherent_amplitudes(alpha, cutoff, &tail);
    FockVector st(num_modes, cutoff);
    const std::size_t stm = st.stride(mode);
    for (int k = 0; k <= cutoff; ++k) st.amps[static_cast<std::size_t>(k) * stm] = c[k];
    st.normalize();
    st.leakage = tail;
    return st;
}

// Product of per-mode single-mode amplitude vectors (each of length cutoff+1).
inline FockVector product_state(const std::vector<std::vector<cplx>>& per_mode, int cutoff) {
    const int modes = static_cast<int>(per_mode.size());
    FockVector st(modes, cutoff);
    for (std::size_t i = 0; i < st.dim(); ++i) {
        cplx v(1.0, 0.0);
        std::size_t rest = i;
        for (int m = modes - 1; m >= 0; --m) {
            const int k = static_cast<int>(rest % static_cast<std::size_t>(cutoff + 1));
            rest /= static_cast<std::size_t>(cutoff + 1);
            v *= per_mode[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
        }
        st.amps[i] = v;
    }
    return st;
}

}  // namespace boselearn
