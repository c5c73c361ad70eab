#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "boselearn/fock.hpp"
#include "boselearn/hamiltonian.hpp"
#include "boselearn/rng.hpp"

namespace boselearn {

struct EvolveOptions {
    double leak_tol = 1e-8;        // allowed norm drift per evolve call
    std::size_t dense_limit = 4096;  // diagonalization up to this dimension
    double krylov_tol = 1e-10;     // per-step tolerance of the Lanczos stepper
    int krylov_dim = 40;
};

namespace detail {

inline Eigen::VectorXcd to_eigen(const FockVector& v) {
    Eigen::VectorXcd out(static_cast<Eigen::Index>(v.dim()));
    for (std::size_t i = 0; i < v.dim(); ++i) out[static_cast<Eigen::Index>(i)] = v.amps[i];
    return out;
}

inline void from_eigen(const Eigen::VectorXcd& in, FockVector& out) {
    for (std::size_t i = 0; i < out.dim(); ++i) out.amps[i] = in[static_cast<Eigen::Index>(i)];
}

}  // namespace detail

// Norm-preserving propagator for a fixed Hamiltonian: spectral decomposition
// below dense_limit, adaptive Lanczos stepping above it.
class Propagator {
public:
    explicit Propagator(const HamiltonianAction& H, EvolveOptions opts = {}) : H_(&H), opts_(opts) {
        if (H.dim() <= opts_.dense_limit) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.dense());
            if (es.info() != Eigen::Success) throw std::runtime_error("Propagator: eigensolver failed");
            evals_ = es.eigenvalues();
            evecs_ = es.eigenvectors();
            dense_ = true;
        }
    }

    const HamiltonianAction& hamiltonian() const { return *H_; }

    FockVector evolve(const FockVector& state, double t) const {
        if (t < 0.0) throw std::invalid_argument("Propagator::evolve: t >= 0 required");
        const double norm_in = state.norm();
        FockVector out = state;
        if (t > 0.0) {
            if (dense_) {
                Eigen::VectorXcd v = detail::to_eigen(state);
                Eigen::VectorXcd w = evecs_.adjoint() * v;
                for (Eigen::Index i = 0; i < w.size(); ++i)
                    w[i] *= std::exp(cplx(0.0, -evals_[i] * t));
                v = evecs_ * w;
                detail::from_eigen(v, out);
            } else {
                lanczos_evolve(out, t);
            }
        }
        const double drift = std::abs(out.norm() - norm_in);
        if (drift > opts_.leak_tol)
            throw std::runtime_error("Propagator::evolve: norm drift exceeds leak tolerance");
        out.leakage = state.leakage + drift;
        return out;
    }

private:
    void lanczos_evolve(FockVector& psi, double t) const {
        const int m = opts_.krylov_dim;
        const std::size_t dim = psi.dim();
        double remaining = t;
        std::vector<FockVector> basis;
        FockVector w(psi.num_modes, psi.cutoff);
        while (remaining > 1e-15 * t) {
            basis.clear();
            const double beta0 = psi.norm();
            FockVector v = psi;
            v.scale(1.0 / beta0);
            basis.push_back(v);
            std::vector<double> alpha, beta;
            int built = 0;
            bool breakdown = false;
            for (int j = 0; j < m; ++j) {
                H_->apply(basis.back(), w);
                cplx a = inner_product(basis.back(), w);
                alpha.push_back(a.real());
                for (std::size_t i = 0; i < dim; ++i) w.amps[i] -= a * basis.back().amps[i];
                if (j > 0) {
                    const double b = beta[static_cast<std::size_t>(j - 1)];
                    for (std::size_t i = 0; i < dim; ++i) w.amps[i] -= b * basis[static_cast<std::size_t>(j - 1)].amps[i];
                }
                // one re-orthogonalization pass keeps the basis clean at small m
                for (const auto& q : basis) {
                    const cplx c = inner_product(q, w);
                    for (std::size_t i = 0; i < dim; ++i) w.amps[i] -= c * q.amps[i];
                }
                const double nb = w.norm();
                built = j + 1;
                if (nb < 1e-13) { breakdown = true; break; }
                beta.push_back(nb);
                if (j + 1 < m) {
                    FockVector q = w;
                    q.scale(1.0 / nb);
                    basis.push_back(q);
                }
            }
            const int k = built;
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
            for (int i = 0; i < k; ++i) {
                T(i, i) = alpha[static_cast<std::size_t>(i)];
                if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            const Eigen::MatrixXd& Q = es.eigenvectors();
            const Eigen::VectorXd& lam = es.eigenvalues();
            double dt = breakdown ? remaining : std::min(remaining, suggest_step(beta, lam));
            Eigen::VectorXcd u;
            for (;;) {
                u = Eigen::VectorXcd::Zero(k);
                for (int i = 0; i < k; ++i) {
                    const cplx phase = std::exp(cplx(0.0, -lam[i] * dt));
                    for (int r = 0; r < k; ++r) u[r] += Q(r, i) * phase * Q(0, i);
                }
                if (breakdown || k < m) break;
                const double err = std::abs(u[k - 1]) * beta[static_cast<std::size_t>(k - 1)] * dt;
                if (err < opts_.krylov_tol || dt < 1e-12) break;
                dt *= 0.5;
            }
            for (std::size_t i = 0; i < dim; ++i) {
                cplx acc(0.0, 0.0);
                for (int r = 0; r < k; ++r) acc += u[r] * basis[static_cast<std::size_t>(r)].amps[i];
                psi.amps[i] = beta0 * acc;
            }
            // renormalize to the incoming norm; the drift is checked by the caller
            const double n = psi.norm();
            if (n > 0) psi.scale(beta0 / n);
            remaining -= dt;
        }
    }

    static double suggest_step(const std::vector<double>& beta, const Eigen::VectorXd& lam) {
        const double spread = std::max(1e-12, lam.maxCoeff() - lam.minCoeff());
        (void)beta;
        return 4.0 / spread;  // refined by the error loop
    }

    const HamiltonianAction* H_;
    EvolveOptions opts_;
    bool dense_ = false;
    Eigen::VectorXd evals_;
    Eigen::MatrixXcd evecs_;
};

inline FockVector evolve_exact(const HamiltonianAction& H, const FockVector& state, double t,
                               const EvolveOptions& opts = {}) {
    return Propagator(H, opts).evolve(state, t);
}

enum class InsertionKind { PhaseShifters, TwoModeRotationX, TwoModeRotationY };

// Schedule of inserted random unitaries: r steps of length tau = t/r, fresh
// i.i.d. angles per step (and per mode for phase plans). antithetic pairs
// trajectory 2k+1 with the pi-shifted angle sequence of trajectory 2k, a
// variance-reduction choice that leaves the per-trajectory distribution
// uniform.
struct RandomizationPlan {
    int r = 1;
    InsertionKind kind = InsertionKind::PhaseShifters;
    std::vector<int> modes;  // phase plans: the randomized mode set; rotations: {m1, m2}
    std::uint64_t seed = 0;
    bool antithetic = false;

    double tau(double total_time) const { return total_time / r; }
};

// Dense two-mode rotation on the truncated space, oriented so that the ladder
// operators transform as
//   U_x(th) b1 U_x(th)† = cos(th) b1 + i sin(th) b2
//   U_y(th) b1 U_y(th)† = cos(th) b1 +   sin(th) b2,
// i.e. U_x(th) = exp(-i th (b1†b2 + b2†b1)), U_y(th) = exp(-th (b1†b2 - b2†b1)).
// Exact on every total-occupation sector that fits under the cutoff. In
// randomized insertions only the angle distribution matters and it is
// symmetric, so the orientation is fixed by the frame-change algebra (the
// rotated-frame frequency must come out as (w1+w2)/2 + Re h, resp. + Im h).
namespace detail {

inline Eigen::MatrixXcd pair_generator(InsertionKind kind, int num_modes, int cutoff, int m1, int m2) {
    FockVector probe(num_modes, cutoff);
    const std::size_t dim = probe.dim();
    Eigen::MatrixXcd G(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    FockVector e(num_modes, cutoff), t1(num_modes, cutoff), t2(num_modes, cutoff);
    for (std::size_t c = 0; c < dim; ++c) {
        std::fill(e.amps.begin(), e.amps.end(), cplx(0.0, 0.0));
        e.amps[c] = cplx(1.0, 0.0);
        // b1† b2 |e>
        t1 = apply_operator({OpKind::Annihilate, m2}, e);
        t1 = apply_operator({OpKind::Create, m1}, t1);
        // b2† b1 |e>
        t2 = apply_operator({OpKind::Annihilate, m1}, e);
        t2 = apply_operator({OpKind::Create, m2}, t2);
        for (std::size_t r = 0; r < dim; ++r) {
            if (kind == InsertionKind::TwoModeRotationX)  // U_x = exp(i th G), G = -(b1†b2 + b2†b1)
                G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = -(t1.amps[r] + t2.amps[r]);
            else  // U_y = exp(i th G), G = i(b1†b2 - b2†b1)
                G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cplx(0.0, 1.0) * (t1.amps[r] - t2.amps[r]);
        }
    }
    return G;
}

}  // namespace detail

// Cached eigenbasis of a pair generator; applies exp(i theta G) as two dense
// transforms. U_x(theta) and U_y(theta) form one-parameter groups, so adjacent
// insertions merge by angle addition.
class PairRotation {
public:
    PairRotation(InsertionKind kind, int num_modes, int cutoff, int m1, int m2) {
        if (kind != InsertionKind::TwoModeRotationX && kind != InsertionKind::TwoModeRotationY)
            throw std::invalid_argument("PairRotation: X or Y kind required");
        if (m1 == m2) throw std::invalid_argument("PairRotation: two distinct modes required");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(detail::pair_generator(kind, num_modes, cutoff, m1, m2));
        if (es.info() != Eigen::Success) throw std::runtime_error("PairRotation: eigensolver failed");
        w_ = es.eigenvalues();
        V_ = es.eigenvectors();
    }

    void apply(double theta, FockVector& state) const {
        Eigen::VectorXcd v = detail::to_eigen(state);
        Eigen::VectorXcd c = V_.adjoint() * v;
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::exp(cplx(0.0, theta * w_[i]));
        v = V_ * c;
        detail::from_eigen(v, state);
    }

    Eigen::MatrixXcd matrix(double theta) const {
        Eigen::VectorXcd ph(w_.size());
        for (Eigen::Index i = 0; i < w_.size(); ++i) ph[i] = std::exp(cplx(0.0, theta * w_[i]));
        return V_ * ph.asDiagonal() * V_.adjoint();
    }

private:
    Eigen::VectorXd w_;
    Eigen::MatrixXcd V_;
};

inline Eigen::MatrixXcd two_mode_rotation(InsertionKind kind, double theta, int num_modes, int cutoff, int m1,
                                          int m2) {
    return PairRotation(kind, num_modes, cutoff, m1, m2).matrix(theta);
}

// Reusable context for randomized trajectories under a fixed (H, t, plan):
// the short-time propagator and the insertion machinery are built once.
class RandomizedEvolver {
public:
    RandomizedEvolver(const HamiltonianAction& H, double t, const RandomizationPlan& plan,
                      EvolveOptions opts = {})
        : plan_(plan), t_(t), prop_(H, opts), opts_(opts) {
        if (plan.r < 1) throw std::invalid_argument("RandomizedEvolver: r >= 1 required");
        for (int m : plan.modes)
            if (m < 0 || m >= H.num_modes()) throw std::invalid_argument("RandomizedEvolver: plan/model mode mismatch");
        if (plan.kind != InsertionKind::PhaseShifters) {
            if (plan.modes.size() != 2) throw std::invalid_argument("RandomizedEvolver: rotation plans need a mode pair");
            rot_ = std::make_unique<PairRotation>(plan.kind, H.num_modes(), H.cutoff(), plan.modes[0], plan.modes[1]);
        }
    }

    // One stochastic trajectory prod_{j=1..r} U_j† e^{-iH tau} U_j |psi>.
    FockVector trajectory(const FockVector& psi0, int trajectory_index) const {
        const int base_index = (plan_.antithetic && (trajectory_index % 2 == 1)) ? trajectory_index - 1 : trajectory_index;
        const double shift = (plan_.antithetic && (trajectory_index % 2 == 1)) ? M_PI : 0.0;
        RngStream rng = RngStream(plan_.seed).derive(0x72616a64ULL, static_cast<std::uint64_t>(base_index));
        const double tau = plan_.tau(t_);
        FockVector psi = psi0;
        const double norm_in = psi.norm();
        if (plan_.kind == InsertionKind::PhaseShifters) {
            std::vector<double> thetas(plan_.modes.size());
            for (int j = 0; j < plan_.r; ++j) {
                for (auto& th : thetas) th = rng.uniform(0.0, 2.0 * M_PI) + shift;
                apply_phases(psi, thetas, -1.0);  // U_j
                psi = prop_.evolve(psi, tau);
                apply_phases(psi, thetas, +1.0);  // U_j†
            }
        } else {
            // Insertion U_j = R(s_j) with s_j = -theta_j/2 (X plans) or +theta_j/2
            // (Y plans); adjacent R's merge into a single rotation per step.
            const double sgn = (plan_.kind == InsertionKind::TwoModeRotationX) ? -1.0 : 1.0;
            std::vector<double> s(static_cast<std::size_t>(plan_.r));
            for (auto& v : s) v = sgn * (rng.uniform(0.0, 2.0 * M_PI) + shift) / 2.0;
            rot_->apply(s[0], psi);
            for (int j = 0; j < plan_.r; ++j) {
                psi = prop_.evolve(psi, tau);
                const double next = (j + 1 < plan_.r) ? s[static_cast<std::size_t>(j + 1)] : 0.0;
                rot_->apply(next - s[static_cast<std::size_t>(j)], psi);
            }
        }
        if (std::abs(psi.norm() - norm_in) > opts_.leak_tol)
            throw std::runtime_error("RandomizedEvolver: cumulative norm drift exceeds leak tolerance");
        return psi;
    }

    const Propagator& propagator() const { return prop_; }

private:
    void apply_phases(FockVector& psi, const std::vector<double>& thetas, double sign) const {
        // diag exp(-i sign sum_m theta_m n_m) over the plan's modes
        for (std::size_t mi = 0; mi < plan_.modes.size(); ++mi) {
            const int mode = plan_.modes[mi];
            const std::size_t st = psi.stride(mode);
            const int lv = psi.levels();
            std::vector<cplx> ph(static_cast<std::size_t>(lv));
            for (int k = 0; k < lv; ++k) ph[static_cast<std::size_t>(k)] = std::exp(cplx(0.0, -sign * thetas[mi] * k));
            for (std::size_t i = 0; i < psi.dim(); ++i)
                psi.amps[i] *= ph[static_cast<std::size_t>((i / st) % static_cast<std::size_t>(lv))];
        }
    }

    RandomizationPlan plan_;
    double t_;
    Propagator prop_;
    EvolveOptions opts_;
    std::unique_ptr<PairRotation> rot_;
};

inline FockVector evolve_randomized(const HamiltonianAction& H, const FockVector& psi0, double t,
                                    const RandomizationPlan& plan, int trajectory_index = 0,
                                    const EvolveOptions& opts = {}) {
    return RandomizedEvolver(H, t, plan, opts).trajectory(psi0, trajectory_index);
}

// --- density-matrix helpers for the deviation suite -------------------------

inline Eigen::MatrixXcd density_matrix(const FockVector& psi) {
    const Eigen::VectorXcd v = detail::to_eigen(psi);
    return v * v.adjoint();
}

inline double trace_distance(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho - sigma);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// Ensemble-averaged trajectory state vs. the analytic effective evolution.
inline double ensemble_deviation(const HamiltonianAction& H, const HamiltonianAction& Heff,
                                 const FockVector& psi0, double t, RandomizationPlan plan, int ensemble) {
    RandomizedEvolver ev(H, t, plan);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(psi0.dim()),
                                                  static_cast<Eigen::Index>(psi0.dim()));
    for (int k = 0; k < ensemble; ++k) rho += density_matrix(ev.trajectory(psi0, k));
    rho /= static_cast<double>(ensemble);
    const FockVector eff = evolve_exact(Heff, psi0, t);
    return trace_distance(rho, density_matrix(eff));
}

// Empirical choice of r for a requested simulation-error budget: double r
// until the measured signal (ensemble mean of <b_mode>) moves by less than
// eta0/2 between r and 2r.
inline int calibrate_r(const HamiltonianAction& H, const FockVector& psi0, double t, RandomizationPlan plan,
                       int mode, double eta0, int ensemble = 64, int r_start = 4, int r_max = 1 << 14) {
    auto signal = [&](int r) {
        plan.r = r;
        RandomizedEvolver ev(H, t, plan);
        cplx acc(0.0, 0.0);
        for (int k = 0; k < ensemble; ++k) {
            FockVector psi = ev.trajectory(psi0, k);
            psi.normalize();
            acc += expectation(ModeOperator{OpKind::Annihilate, mode}, psi);
        }
        return acc / static_cast<double>(ensemble);
    };
    int r = r_start;
    cplx prev = signal(r);
    while (r < r_max) {
        const cplx next = signal(2 * r);
        if (std::abs(next - prev) < eta0 / 2.0) return 2 * r;
        prev = next;
        r *= 2;
    }
    return r_max;
}

}  // namespace boselearn
