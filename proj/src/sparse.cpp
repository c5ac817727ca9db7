#include "gia/sparse.hpp"

#include <cmath>

namespace gia {

SparseMatrix weighted_adjacency(const GraphView& view) {
    require(view.base != nullptr, "GraphView without a base graph");
    require(view.num_nodes >= view.base->num_nodes(), "GraphView smaller than its base graph");
    require(view.base_removed.empty() || view.base_removed.size() == view.base->edges().size(),
            "GraphView removal mask has the wrong length");
    std::vector<Eigen::Triplet<Real>> triplets;
    triplets.reserve(2 * (view.base->edges().size() + view.extra.size()));
    view.for_each_edge([&](Index u, Index v, Real w) {
        require(u >= 0 && v >= 0 && u < view.num_nodes && v < view.num_nodes && u != v,
                "invalid extra edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
        triplets.emplace_back(static_cast<int>(u), static_cast<int>(v), w);
        triplets.emplace_back(static_cast<int>(v), static_cast<int>(u), w);
    });
    SparseMatrix a(view.num_nodes, view.num_nodes);
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

NormAdjView::NormAdjView(GraphView topology, bool self_loops)
    : topology_(std::move(topology)), self_loops_(self_loops), adjacency_(weighted_adjacency(topology_)) {
    const Index n = topology_.num_nodes;
    degrees_ = Vector::Constant(n, self_loops_ ? Real(1) : Real(0));
    for (Index u = 0; u < n; ++u)
        for (SparseMatrix::InnerIterator it(adjacency_, u); it; ++it) degrees_[u] += it.value();
    inv_sqrt_ = degrees_.unaryExpr([](Real d) { return d > 0 ? 1.0 / std::sqrt(d) : 0.0; });

    std::vector<Eigen::Triplet<Real>> triplets;
    triplets.reserve(static_cast<std::size_t>(adjacency_.nonZeros() + n));
    for (Index u = 0; u < n; ++u) {
        if (self_loops_) triplets.emplace_back(static_cast<int>(u), static_cast<int>(u), inv_sqrt_[u] * inv_sqrt_[u]);
        for (SparseMatrix::InnerIterator it(adjacency_, u); it; ++it)
            triplets.emplace_back(static_cast<int>(u), static_cast<int>(it.col()),
                                  it.value() * inv_sqrt_[u] * inv_sqrt_[it.col()]);
    }
    normalized_.resize(n, n);
    normalized_.setFromTriplets(triplets.begin(), triplets.end());
}

}  // namespace gia
