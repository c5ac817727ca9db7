#include "gia/gma.hpp"

#include "gia/train.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace gia {

EdgeFlipPerturbation gma_attack(const AttackTarget& target, Index max_flips, Real hinge_tau, bool additions_only) {
    require(max_flips >= 0, "GMA: negative flip budget");
    const GraphBundle& g = *target.graph;
    const Index n = g.num_nodes();
    std::vector<bool> in_training(static_cast<std::size_t>(n), false);
    for (Index u : g.splits().train) in_training[static_cast<std::size_t>(u)] = true;
    for (Index u : g.splits().val) in_training[static_cast<std::size_t>(u)] = true;

    std::vector<Edge> pool;
    for (Index v : target.victims)
        for (Index j = 0; j < n; ++j)
            if (j != v && !(in_training[static_cast<std::size_t>(v)] && in_training[static_cast<std::size_t>(j)]))
                pool.push_back({std::min(v, j), std::max(v, j)});
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    EdgeFlipPerturbation out;
    std::set<Edge> flipped;
    const LossFn loss = [&](const Matrix& logits) {
        return atk_loss(logits, target.pseudo_labels, target.victims, hinge_tau);
    };
    for (Index step = 0; step < max_flips; ++step) {
        GradRequest req;
        for (const auto& e : pool)
            if (!flipped.count(e)) req.edge_pairs.push_back(e);
        const NormAdjView view(apply_flips(g, out));
        const Gradients grad = gradients(*target.surrogate, view, g.features(), loss, req);

        Real best_score = -1.0;
        std::size_t best = req.edge_pairs.size();
        bool best_add = true;
        for (std::size_t i = 0; i < req.edge_pairs.size(); ++i) {
            const auto& e = req.edge_pairs[i];
            const bool present = g.has_edge(e.u, e.v);
            const Real d = grad.edges[i];
            Real score = -1.0;
            if (!present && d <= 0) score = -d;
            if (present && d >= 0 && !additions_only) score = d;
            if (score > best_score) {
                best_score = score;
                best = i;
                best_add = !present;
            }
        }
        if (best == req.edge_pairs.size()) {
            out.exhausted = true;
            break;
        }
        const Edge e = req.edge_pairs[best];
        flipped.insert(e);
        out.flips.push_back({e.u, e.v, best_add});
    }
    return out;
}

InjectionPerturbation map_m2(const AttackTarget& target, const EdgeFlipPerturbation& flips) {
    const GraphBundle& g = *target.graph;
    const Index n = g.num_nodes();
    const Index m = static_cast<Index>(flips.flips.size());
    InjectionPerturbation pert = InjectionPerturbation::empty(g.feature_dim());
    pert.strategy = "m2";
    if (m == 0) return pert;

    std::vector<bool> is_victim(static_cast<std::size_t>(n), false);
    for (Index v : target.victims) is_victim[static_cast<std::size_t>(v)] = true;
    IndexList targets;
    for (const auto& f : flips.flips) {
        require(f.add, "M2: edge removals cannot be mapped to injections");
        require(f.u != f.v && f.u >= 0 && f.v >= 0 && f.u < n && f.v < n, "M2: invalid flip");
        pert.neighbors.push_back({std::min(f.u, f.v), std::max(f.u, f.v)});
        Index t = std::min(f.u, f.v);
        if (!is_victim[static_cast<std::size_t>(t)] && is_victim[static_cast<std::size_t>(std::max(f.u, f.v))])
            t = std::max(f.u, f.v);
        if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    pert.features = Matrix::Zero(m, g.feature_dim());

    const Index k = target.surrogate->dims.layers;
    const NormAdjView gma(apply_flips(g, flips));
    const NormAdjView gia(apply_injection(g, pert).view);
    const Index rows = static_cast<Index>(targets.size());
    Matrix lhs(rows, m);
    Matrix rhs(rows, g.feature_dim());
    for (Index i = 0; i < rows; ++i) {
        const Vector a = influence_scores(gma, targets[static_cast<std::size_t>(i)], k);
        const Vector b = influence_scores(gia, targets[static_cast<std::size_t>(i)], k);
        rhs.row(i) = (a - b.head(n)).transpose() * g.features();
        lhs.row(i) = b.tail(m).transpose();
    }
    pert.features = lhs.completeOrthogonalDecomposition().solve(rhs);
    return pert;
}

RowVector m2_one_layer_features(const GraphBundle& g, Index v) {
    const Real d = static_cast<Real>(g.degree(v)) + 1.0;
    return std::sqrt(3.0) / std::sqrt(d + 1.0) * g.features().row(v);
}

}  // namespace gia
