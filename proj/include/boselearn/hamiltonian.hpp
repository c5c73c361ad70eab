#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "boselearn/fock.hpp"
#include "boselearn/lattice.hpp"

namespace boselearn {

// Matrix-free action of H = sum_<i,j> (h_ij b_i† b_j + h.c.) + sum_i omega_i n_i
// + sum_i (xi_i/2) n_i (n_i - 1) on the truncated basis. Hopping transitions
// that would exceed the cutoff vanish (b†|cutoff> = 0), so H maps each total
// occupation sector into itself and stays Hermitian.
class HamiltonianAction {
public:
    // No |coefficient| <= 1 normalization check here: derived models (e.g. the
    // rotated-frame effective mode with frequency (w1+w2)/2 + Re h) exceed the
    // input-model bounds by construction. Input normalization is enforced at
    // the protocol and config entry points.
    HamiltonianAction(LatticeModel model, int cutoff) : model_(std::move(model)), cutoff_(cutoff) {
        if (cutoff < 1) throw std::invalid_argument("HamiltonianAction: cutoff >= 1 required");
        dim_ = FockVector::dimension(model_.num_modes, cutoff_);
        strides_.resize(static_cast<std::size_t>(model_.num_modes));
        std::size_t s = 1;
        for (int m = model_.num_modes - 1; m >= 0; --m) {
            strides_[static_cast<std::size_t>(m)] = s;
            s *= static_cast<std::size_t>(cutoff_ + 1);
        }
        // per-index diagonal: sum_i omega_i k_i + (xi_i/2) k_i (k_i - 1)
        diag_.resize(dim_);
        for (std::size_t idx = 0; idx < dim_; ++idx) {
            double d = 0.0;
            std::size_t rest = idx;
            for (int m = model_.num_modes - 1; m >= 0; --m) {
                const int k = static_cast<int>(rest % static_cast<std::size_t>(cutoff_ + 1));
                rest /= static_cast<std::size_t>(cutoff_ + 1);
                d += model_.omega[static_cast<std::size_t>(m)] * k +
                     0.5 * model_.xi[static_cast<std::size_t>(m)] * k * (k - 1);
            }
            diag_[idx] = d;
        }
    }

    const LatticeModel& model() const { return model_; }
    int cutoff() const { return cutoff_; }
    std::size_t dim() const { return dim_; }
    int num_modes() const { return model_.num_modes; }

    void apply(const FockVector& in, FockVector& out) const {
        if (in.dim() != dim_ || in.cutoff != cutoff_ || in.num_modes != model_.num_modes)
            throw std::invalid_argument("HamiltonianAction::apply: state/model mismatch");
        if (out.dim() != dim_) out = FockVector(model_.num_modes, cutoff_);
        for (std::size_t idx = 0; idx < dim_; ++idx) out.amps[idx] = diag_[idx] * in.amps[idx];
        const int lv = cutoff_ + 1;
        for (std::size_t e = 0; e < model_.edges.size(); ++e) {
            const auto [i, j] = model_.edges[e];
            const cplx hij = model_.h[e];
            if (hij == cplx(0.0, 0.0)) continue;
            const std::size_t si = strides_[static_cast<std::size_t>(i)];
            const std::size_t sj = strides_[static_cast<std::size_t>(j)];
            for (std::size_t idx = 0; idx < dim_; ++idx) {
                const cplx a = in.amps[idx];
                if (a == cplx(0.0, 0.0)) continue;
                const int ki = static_cast<int>((idx / si) % static_cast<std::size_t>(lv));
                const int kj = static_cast<int>((idx / sj) % static_cast<std::size_t>(lv));
                // h_ij b_i† b_j : k_j -> k_j - 1, k_i -> k_i + 1
                if (kj > 0 && ki < cutoff_) {
                    const double w = std::sqrt(static_cast<double>(kj) * (ki + 1));
                    out.amps[idx + si - sj] += hij * w * a;
                }
                // conj(h_ij) b_j† b_i : k_i -> k_i - 1, k_j -> k_j + 1
                if (ki > 0 && kj < cutoff_) {
                    const double w = std::sqrt(static_cast<double>(ki) * (kj + 1));
                    out.amps[idx + sj - si] += std::conj(hij) * w * a;
                }
            }
        }
    }

    FockVector operator()(const FockVector& in) const {
        FockVector out(model_.num_modes, cutoff_);
        apply(in, out);
        return out;
    }

    Eigen::MatrixXcd dense() const {
        Eigen::MatrixXcd H(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
        FockVector e(model_.num_modes, cutoff_), col(model_.num_modes, cutoff_);
        for (std::size_t c = 0; c < dim_; ++c) {
            std::fill(e.amps.begin(), e.amps.end(), cplx(0.0, 0.0));
            e.amps[c] = cplx(1.0, 0.0);
            apply(e, col);
            for (std::size_t r = 0; r < dim_; ++r) H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col.amps[r];
        }
        return H;
    }

    // max-norm Hermiticity defect of the dense build; asserted <= 1e-12 in tests.
    double hermiticity_defect() const {
        const Eigen::MatrixXcd H = dense();
        return (H - H.adjoint()).cwiseAbs().maxCoeff();
    }

private:
    LatticeModel model_;
    int cutoff_;
    std::size_t dim_ = 0;
    std::vector<std::size_t> strides_;
    std::vector<double> diag_;
};

}  // namespace boselearn
