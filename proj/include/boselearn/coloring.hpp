#pragma once

#include <array>
#include <set>
#include <stdexcept>
#include <vector>

#include "boselearn/lattice.hpp"

namespace boselearn {

// Distance-2 coloring of the link graph: edges sharing a vertex, or joined
// through one intermediate edge, receive different colors. Colors are 0-based.
struct ColoringScheme {
    std::vector<int> color;  // per edge of the model (model edge order)
    int chi = 0;
};

namespace detail {

// Adjacency of the link graph: edges are vertices, adjacent iff they share an
// endpoint in the original graph.
inline std::vector<std::vector<int>> link_graph_adjacency(const LatticeModel& m) {
    const std::size_t ne = m.edges.size();
    std::vector<std::vector<int>> adj(ne);
    for (std::size_t a = 0; a < ne; ++a)
        for (std::size_t b = a + 1; b < ne; ++b) {
            const auto& ea = m.edges[a];
            const auto& eb = m.edges[b];
            if (ea.first == eb.first || ea.first == eb.second || ea.second == eb.first || ea.second == eb.second) {
                adj[a].push_back(static_cast<int>(b));
                adj[b].push_back(static_cast<int>(a));
            }
        }
    return adj;
}

}  // namespace detail

// Greedy first-available coloring in lexicographic edge order. Deterministic
// for a given model. chi <= 4(D-1)^2 + 1 where D is the model degree.
inline ColoringScheme color_link_graph(const LatticeModel& m) {
    const auto adj = detail::link_graph_adjacency(m);
    const std::size_t ne = m.edges.size();
    ColoringScheme scheme;
    scheme.color.assign(ne, -1);
    for (std::size_t e = 0; e < ne; ++e) {
        std::set<int> used;
        for (int n1 : adj[e]) {
            if (scheme.color[static_cast<std::size_t>(n1)] >= 0) used.insert(scheme.color[static_cast<std::size_t>(n1)]);
            for (int n2 : adj[static_cast<std::size_t>(n1)])
                if (scheme.color[static_cast<std::size_t>(n2)] >= 0) used.insert(scheme.color[static_cast<std::size_t>(n2)]);
        }
        int c = 0;
        while (used.count(c)) ++c;
        scheme.color[e] = c;
        scheme.chi = std::max(scheme.chi, c + 1);
    }
    return scheme;
}

// Brute-force validity check: any two edges at link-graph distance <= 2 carry
// distinct colors. Used as the oracle in tests and on small inputs.
inline bool coloring_is_valid(const LatticeModel& m, const ColoringScheme& s) {
    const auto adj = detail::link_graph_adjacency(m);
    const std::size_t ne = m.edges.size();
    for (std::size_t a = 0; a < ne; ++a) {
        std::set<int> within2;
        for (int n1 : adj[a]) {
            within2.insert(n1);
            for (int n2 : adj[static_cast<std::size_t>(n1)]) within2.insert(n2);
        }
        within2.erase(static_cast<int>(a));
        for (int b : within2)
            if (s.color[a] == s.color[static_cast<std::size_t>(b)]) return false;
    }
    return true;
}

// Decomposition induced by one color: two-mode clusters are the edges of that
// color, isolated vertices are singleton clusters, everything else is a
// spectator (phase-randomized, vacuum input).
struct Clusters {
    std::vector<std::array<int, 2>> pairs;  // edges of the color class
    std::vector<int> pair_edge_index;       // model edge index per pair
    std::vector<int> singletons;            // isolated vertices of the graph
    std::vector<int> spectators;            // remaining modes
};

inline Clusters clusters_for_color(const LatticeModel& m, const ColoringScheme& s, int c) {
    if (s.color.size() != m.edges.size()) throw std::invalid_argument("clusters_for_color: scheme/model mismatch");
    if (c < 0 || c >= s.chi) throw std::invalid_argument("clusters_for_color: color out of range");
    Clusters out;
    std::vector<int> times_clustered(static_cast<std::size_t>(m.num_modes), 0);
    for (std::size_t e = 0; e < m.edges.size(); ++e)
        if (s.color[e] == c) {
            out.pairs.push_back({m.edges[e].first, m.edges[e].second});
            out.pair_edge_index.push_back(static_cast<int>(e));
            ++times_clustered[static_cast<std::size_t>(m.edges[e].first)];
            ++times_clustered[static_cast<std::size_t>(m.edges[e].second)];
        }
    const auto deg = m.mode_degrees();
    for (int v = 0; v < m.num_modes; ++v) {
        if (times_clustered[static_cast<std::size_t>(v)] > 1)
            throw std::runtime_error("clusters_for_color: mode interacts with more than one partner (invalid coloring)");
        if (deg[static_cast<std::size_t>(v)] == 0) {
            out.singletons.push_back(v);
        } else if (times_clustered[static_cast<std::size_t>(v)] == 0) {
            out.spectators.push_back(v);
        }
    }
    return out;
}

// Model with every coupling removed except the edges of color c; omega and xi
// are untouched. This is the analytic effective model under phase
// randomization of all modes outside the color class. Idempotent.
inline LatticeModel effective_model_for_color(const LatticeModel& m, const ColoringScheme& s, int c) {
    if (s.color.size() != m.edges.size()) throw std::invalid_argument("effective_model_for_color: scheme/model mismatch");
    LatticeModel out(m.num_modes);
    out.omega = m.omega;
    out.xi = m.xi;
    for (std::size_t e = 0; e < m.edges.size(); ++e)
        if (s.color[e] == c) out.add_edge(m.edges[e].first, m.edges[e].second, m.h[e]);
    return out;
}

}  // namespace boselearn
