#pragma once

#include "gia/graph.hpp"

#include <Eigen/SparseCore>

#include <algorithm>

namespace gia {

using SparseMatrix = Eigen::SparseMatrix<Real, Eigen::RowMajor>;

/// Topology seen by a model: the base graph's edges (minus any removed by a
/// sanitizer) plus weighted extra edges over num_nodes >= base.num_nodes().
/// Holds a pointer to the base graph, which must outlive the view.
struct GraphView {
    const GraphBundle* base = nullptr;
    Index num_nodes = 0;
    std::vector<WeightedEdge> extra;
    std::vector<bool> base_removed;  // empty, or one flag per base edge

    static GraphView of(const GraphBundle& g) { return GraphView{&g, g.num_nodes(), {}, {}}; }

    bool base_edge_kept(std::size_t i) const { return base_removed.empty() || !base_removed[i]; }

    /// Calls fn(u, v, weight) once per undirected edge. Extra weights are clamped to [0, 1].
    template <typename Fn>
    void for_each_edge(Fn&& fn) const {
        const auto& edges = base->edges();
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (base_edge_kept(i)) fn(edges[i].u, edges[i].v, Real(1));
        for (const auto& e : extra) fn(e.u, e.v, std::clamp(e.weight, Real(0), Real(1)));
    }
};

/// Symmetric weighted adjacency without self-loops.
SparseMatrix weighted_adjacency(const GraphView& view);

/// Normalized propagation matrix D^{-1/2}(A + I)D^{-1/2} over a GraphView.
class NormAdjView {
public:
    explicit NormAdjView(GraphView topology, bool self_loops = true);

    const GraphView& topology() const { return topology_; }
    const GraphBundle& base() const { return *topology_.base; }
    Index num_nodes() const { return topology_.num_nodes; }
    bool self_loops() const { return self_loops_; }

    const SparseMatrix& normalized() const { return normalized_; }
    /// Raw weighted adjacency, no self-loops.
    const SparseMatrix& adjacency() const { return adjacency_; }
    /// Weighted degree, counting the self-loop when enabled.
    const Vector& degrees() const { return degrees_; }
    /// d^{-1/2}, 0 for zero-degree nodes.
    const Vector& inv_sqrt_degrees() const { return inv_sqrt_; }

    Real entry(Index u, Index v) const { return normalized_.coeff(u, v); }
    Matrix dense() const { return Matrix(normalized_); }

    template <typename Derived>
    Matrix propagate(const Eigen::MatrixBase<Derived>& x) const {
        require(x.rows() == num_nodes(), "propagate: row count does not match the view");
        return normalized_ * x;
    }

private:
    GraphView topology_;
    bool self_loops_;
    SparseMatrix adjacency_;
    SparseMatrix normalized_;
    Vector degrees_;
    Vector inv_sqrt_;
};

}  // namespace gia
