#pragma once

#include "gia/types.hpp"

#include <optional>
#include <utility>

namespace gia {

inline constexpr Index kUnknownLabel = -1;

struct Edge {
    Index u = 0;
    Index v = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Edge with a continuous weight in [0, 1]; used for injected and candidate edges.
struct WeightedEdge {
    Index u = 0;
    Index v = 0;
    Real weight = 1.0;
};

struct Splits {
    IndexList train;
    IndexList val;
    IndexList test;
};

struct FeatureBox {
    Real lo = 0.0;
    Real hi = 0.0;
};

/// Immutable attributed graph. Edges are undirected, stored once with u < v, sorted.
class GraphBundle {
public:
    GraphBundle() = default;

    Index num_nodes() const { return n_; }
    Index feature_dim() const { return static_cast<Index>(features_.cols()); }
    Index num_classes() const { return num_classes_; }
    Index num_edges() const { return static_cast<Index>(edges_.size()); }

    const std::vector<Edge>& edges() const { return edges_; }
    const Matrix& features() const { return features_; }
    const IndexList& labels() const { return labels_; }
    const Splits& splits() const { return splits_; }
    FeatureBox feature_box() const { return box_; }

    /// Sorted neighbor list of u (raw adjacency, no self-loop).
    const IndexList& neighbors(Index u) const { return adjacency_[static_cast<std::size_t>(u)]; }
    Index degree(Index u) const { return static_cast<Index>(neighbors(u).size()); }
    bool has_edge(Index u, Index v) const;

private:
    friend GraphBundle build_graph(std::vector<Edge>, Matrix, IndexList, Splits, std::optional<Index>);

    Index n_ = 0;
    Index num_classes_ = 0;
    std::vector<Edge> edges_;
    std::vector<IndexList> adjacency_;
    Matrix features_;
    IndexList labels_;
    Splits splits_;
    FeatureBox box_;
};

/// Validates and canonicalizes a graph. Edges may be given in either orientation;
/// self-loops, duplicates (in any orientation), out-of-range endpoints and
/// overlapping splits are rejected with the offending item in the message.
/// The class count defaults to max(label) + 1.
GraphBundle build_graph(std::vector<Edge> edges, Matrix features, IndexList labels, Splits splits,
                        std::optional<Index> num_classes = std::nullopt);

/// x -> arctan(x) * 2 / pi, entrywise.
GraphBundle feature_standardize(const GraphBundle& g);

template <typename Derived>
FeatureBox compute_feature_box(const Eigen::MatrixBase<Derived>& x) {
    if (x.size() == 0) return {};
    return {x.minCoeff(), x.maxCoeff()};
}

/// Subgraph on `keep` (sorted ascending), relabelled 0..|keep|-1. Splits are
/// intersected with `keep`. Returns the bundle and the old index of each new node.
std::pair<GraphBundle, IndexList> induced_subgraph(const GraphBundle& g, const IndexList& keep);

/// Copy of g with every label outside the training split replaced by kUnknownLabel.
/// This is the view handed to attackers.
GraphBundle strip_non_train_labels(const GraphBundle& g);

}  // namespace gia
