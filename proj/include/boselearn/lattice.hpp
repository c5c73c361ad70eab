#pragma once

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "boselearn/fock.hpp"

namespace boselearn {

// Interaction graph plus the true parameters {h_ij, omega_i, xi_i}. Edges are
// stored once with i < j and lexicographically sorted; h_ji = conj(h_ij) is
// implicit. Normalization |h_ij|, |omega_i|, |xi_i| <= 1.
struct LatticeModel {
    int num_modes = 0;
    std::vector<std::pair<int, int>> edges;  // (i, j) with i < j, sorted
    std::vector<cplx> h;                     // per edge
    std::vector<double> omega;
    std::vector<double> xi;

    LatticeModel() = default;
    explicit LatticeModel(int modes)
        : num_modes(modes), omega(static_cast<std::size_t>(modes), 0.0), xi(static_cast<std::size_t>(modes), 0.0) {
        if (modes < 1) throw std::invalid_argument("LatticeModel: need at least one mode");
    }

    void add_edge(int i, int j, cplx hij) {
        if (i == j) throw std::invalid_argument("LatticeModel: self-loops not allowed");
        if (i > j) {
            std::swap(i, j);
            hij = std::conj(hij);
        }
        if (i < 0 || j >= num_modes) throw std::out_of_range("LatticeModel: vertex out of range");
        for (const auto& e : edges)
            if (e.first == i && e.second == j) throw std::invalid_argument("LatticeModel: duplicate edge");
        edges.emplace_back(i, j);
        h.push_back(hij);
        sort_edges();
    }

    int edge_index(int i, int j) const {
        if (i > j) std::swap(i, j);
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (edges[e].first == i && edges[e].second == j) return static_cast<int>(e);
        return -1;
    }

    int degree() const {
        std::vector<int> deg(static_cast<std::size_t>(num_modes), 0);
        for (const auto& e : edges) {
            ++deg[static_cast<std::size_t>(e.first)];
            ++deg[static_cast<std::size_t>(e.second)];
        }
        int d = 0;
        for (int v : deg) d = std::max(d, v);
        return d;
    }

    std::vector<int> mode_degrees() const {
        std::vector<int> deg(static_cast<std::size_t>(num_modes), 0);
        for (const auto& e : edges) {
            ++deg[static_cast<std::size_t>(e.first)];
            ++deg[static_cast<std::size_t>(e.second)];
        }
        return deg;
    }

    void validate() const {
        for (const auto& v : h)
            if (std::abs(v) > 1.0 + 1e-12) throw std::invalid_argument("LatticeModel: |h_ij| > 1");
        for (double v : omega)
            if (std::abs(v) > 1.0 + 1e-12) throw std::invalid_argument("LatticeModel: |omega_i| > 1");
        for (double v : xi)
            if (std::abs(v) > 1.0 + 1e-12) throw std::invalid_argument("LatticeModel: |xi_i| > 1");
    }

    static LatticeModel chain(int n) {
        LatticeModel m(n);
        for (int i = 0; i + 1 < n; ++i) m.add_edge(i, i + 1, cplx(0.0, 0.0));
        return m;
    }

    static LatticeModel grid(int rows, int cols) {
        LatticeModel m(rows * cols);
        auto id = [cols](int r, int c) { return r * cols + c; };
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                if (c + 1 < cols) m.add_edge(id(r, c), id(r, c + 1), cplx(0.0, 0.0));
                if (r + 1 < rows) m.add_edge(id(r, c), id(r + 1, c), cplx(0.0, 0.0));
            }
        return m;
    }

private:
    void sort_edges() {
        std::vector<std::size_t> order(edges.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });
        std::vector<std::pair<int, int>> se(edges.size());
        std::vector<cplx> sh(h.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            se[k] = edges[order[k]];
            sh[k] = h[order[k]];
        }
        edges = std::move(se);
        h = std::move(sh);
    }
};

// Analytic effective model under independent U(1) phase averaging on the given
// modes: every hopping term touching a randomized mode averages to zero
// (unbalanced b/b† count picks up e^{ic*theta}, c != 0), all diagonal terms
// survive. Acts on the model; the quantitative check against a numeric Haar
// average lives in the dynamics tests.
inline LatticeModel effective_hamiltonian(const LatticeModel& model, const std::vector<int>& randomized_modes) {
    std::vector<char> rand_mask(static_cast<std::size_t>(model.num_modes), 0);
    for (int m : randomized_modes) {
        if (m < 0 || m >= model.num_modes) throw std::out_of_range("effective_hamiltonian: mode out of range");
        rand_mask[static_cast<std::size_t>(m)] = 1;
    }
    LatticeModel out(model.num_modes);
    out.omega = model.omega;
    out.xi = model.xi;
    for (std::size_t e = 0; e < model.edges.size(); ++e) {
        const auto [i, j] = model.edges[e];
        if (!rand_mask[static_cast<std::size_t>(i)] && !rand_mask[static_cast<std::size_t>(j)])
            out.add_edge(i, j, model.h[e]);
    }
    return out;
}

}  // namespace boselearn
