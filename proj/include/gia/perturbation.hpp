#pragma once

#include "gia/sparse.hpp"

#include <filesystem>

namespace gia {

struct AttackBudget {
    enum class Mode { GIA, GMA };
    Mode mode = Mode::GIA;
    Index max_nodes = 0;
    Index max_degree = 0;
    FeatureBox box;
    Index max_flips = 0;

    static AttackBudget injection(const GraphBundle& g, Index nodes, Index degree) {
        return {Mode::GIA, nodes, degree, g.feature_box(), 0};
    }
    static AttackBudget modification(Index flips) { return {Mode::GMA, 0, 0, {}, flips}; }
};

/// Injected nodes are numbered n, n+1, ... after the original nodes.
struct InjectionPerturbation {
    Matrix features;                     // one row per injected node
    std::vector<IndexList> neighbors;    // original-node neighbors of each injected node
    std::vector<Edge> internal;          // injected-injected edges, local indices
    std::string strategy;
    std::uint64_t seed = 0;
    Real lambda = 0.0;
    bool hao = false;

    Index size() const { return static_cast<Index>(neighbors.size()); }
    Index degree(Index local) const;
    static InjectionPerturbation empty(Index feature_dim) {
        InjectionPerturbation p;
        p.features.resize(0, feature_dim);
        return p;
    }
};

struct EdgeFlip {
    Index u = 0;
    Index v = 0;
    bool add = true;
};

struct EdgeFlipPerturbation {
    std::vector<EdgeFlip> flips;
    bool exhausted = false;  // candidate pool ran out before the budget
};

/// Graph after an injection: topology plus stacked features [X; X_atk].
struct PerturbedGraph {
    GraphView view;
    Matrix features;
};

PerturbedGraph apply_injection(const GraphBundle& g, const InjectionPerturbation& pert);
GraphView apply_flips(const GraphBundle& g, const EdgeFlipPerturbation& pert);

/// Concatenates two injections over the same graph (b's nodes follow a's).
InjectionPerturbation append_injection(InjectionPerturbation a, const InjectionPerturbation& b);

struct BudgetReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Node count, per-node degree in [1, b], neighbor validity and the feature box
/// (exact comparison, no tolerance).
BudgetReport budget_check(const InjectionPerturbation& pert, const AttackBudget& budget, const GraphBundle& g);
/// Flip count, duplicates, and flips inside the training subgraph (train and val nodes).
BudgetReport budget_check(const EdgeFlipPerturbation& pert, const AttackBudget& budget, const GraphBundle& g);

template <typename Derived>
Matrix project_features(const Eigen::MatrixBase<Derived>& x, const FeatureBox& box) {
    return x.cwiseMax(box.lo).cwiseMin(box.hi);
}

/// JSON document plus a companion xatk.bin (f32le) in the same directory.
void write_perturbation(const std::filesystem::path& json_path, const InjectionPerturbation& pert,
                        const AttackBudget& budget);
void write_flips(const std::filesystem::path& json_path, const EdgeFlipPerturbation& pert, const AttackBudget& budget,
                 std::uint64_t seed, const std::string& strategy);

struct PerturbationFile {
    std::string mode;
    InjectionPerturbation injection;
    EdgeFlipPerturbation flips;
    AttackBudget budget;
};
PerturbationFile read_perturbation(const std::filesystem::path& json_path, Index feature_dim);

}  // namespace gia
