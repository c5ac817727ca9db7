#pragma once

#include "gia/graph.hpp"

#include <random>

namespace gia::testing {

/// Erdos-Renyi graph with Gaussian features, every node labelled, no splits.
inline GraphBundle random_graph(std::mt19937_64& rng, Index n, Index d, Real p, Index classes = 2) {
    std::bernoulli_distribution coin(p);
    std::normal_distribution<Real> normal;
    std::uniform_int_distribution<Index> label(0, classes - 1);
    std::vector<Edge> edges;
    for (Index u = 0; u < n; ++u)
        for (Index v = u + 1; v < n; ++v)
            if (coin(rng)) edges.push_back({u, v});
    Matrix x(n, d);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    IndexList labels(static_cast<std::size_t>(n));
    for (auto& y : labels) y = label(rng);
    return build_graph(std::move(edges), std::move(x), std::move(labels), {}, classes);
}

/// Dense D^{-1/2}(A+I)D^{-1/2} straight from the definition.
inline Matrix dense_normalized(const Matrix& adjacency, bool self_loops = true) {
    const Index n = adjacency.rows();
    Matrix a = adjacency;
    if (self_loops) a += Matrix::Identity(n, n);
    Vector d = a.rowwise().sum();
    Matrix out(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            out(i, j) = (d[i] > 0 && d[j] > 0) ? a(i, j) / std::sqrt(d[i] * d[j]) : 0.0;
    return out;
}

inline Matrix dense_adjacency(const GraphBundle& g) {
    Matrix a = Matrix::Zero(g.num_nodes(), g.num_nodes());
    for (const auto& e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = 1.0;
    return a;
}

inline Real relative_error(Real analytic, Real numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), Real(1e-5)});
}

}  // namespace gia::testing
