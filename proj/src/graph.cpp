#include "gia/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace gia {

namespace {

std::string edge_str(const Edge& e) {
    std::ostringstream os;
    os << "(" << e.u << "," << e.v << ")";
    return os.str();
}

void check_split(const IndexList& ids, Index n, const char* name, std::vector<int>& owner, int tag) {
    for (Index id : ids) {
        if (id < 0 || id >= n)
            throw Error(std::string("split '") + name + "' index out of range: " + std::to_string(id));
        auto& slot = owner[static_cast<std::size_t>(id)];
        if (slot != 0)
            throw Error(std::string("split overlap at node ") + std::to_string(id) + " (in '" + name + "')");
        slot = tag;
    }
}

}  // namespace

bool GraphBundle::has_edge(Index u, Index v) const {
    if (u < 0 || v < 0 || u >= n_ || v >= n_) return false;
    const auto& nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

GraphBundle build_graph(std::vector<Edge> edges, Matrix features, IndexList labels, Splits splits,
                        std::optional<Index> num_classes) {
    const Index n = static_cast<Index>(features.rows());
    require(static_cast<Index>(labels.size()) == n,
            "label count " + std::to_string(labels.size()) + " does not match node count " + std::to_string(n));

    for (auto& e : edges) {
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) throw Error("edge endpoint out of range: " + edge_str(e));
        if (e.u == e.v) throw Error("self-loop: " + edge_str(e));
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (edges[i] == edges[i - 1]) throw Error("duplicate edge: " + edge_str(edges[i]));

    Index max_label = -1;
    for (Index y : labels) {
        require(y >= kUnknownLabel, "invalid label " + std::to_string(y));
        max_label = std::max(max_label, y);
    }
    const Index classes = num_classes.value_or(max_label + 1);
    require(classes > max_label, "label " + std::to_string(max_label) + " exceeds class count");

    std::vector<int> owner(static_cast<std::size_t>(n), 0);
    check_split(splits.train, n, "train", owner, 1);
    check_split(splits.val, n, "val", owner, 2);
    check_split(splits.test, n, "test", owner, 3);

    require(features.allFinite(), "features contain NaN or Inf");

    GraphBundle g;
    g.n_ = n;
    g.num_classes_ = classes;
    g.adjacency_.assign(static_cast<std::size_t>(n), {});
    for (const auto& e : edges) {
        g.adjacency_[static_cast<std::size_t>(e.u)].push_back(e.v);
        g.adjacency_[static_cast<std::size_t>(e.v)].push_back(e.u);
    }
    for (auto& nb : g.adjacency_) std::sort(nb.begin(), nb.end());
    g.edges_ = std::move(edges);
    g.box_ = compute_feature_box(features);
    g.features_ = std::move(features);
    g.labels_ = std::move(labels);
    g.splits_ = std::move(splits);
    return g;
}

GraphBundle feature_standardize(const GraphBundle& g) {
    Matrix x = g.features().unaryExpr([](Real v) { return std::atan(v) * (2.0 / std::numbers::pi); });
    return build_graph(g.edges(), std::move(x), g.labels(), g.splits(), g.num_classes());
}

std::pair<GraphBundle, IndexList> induced_subgraph(const GraphBundle& g, const IndexList& keep) {
    require(std::is_sorted(keep.begin(), keep.end()), "induced_subgraph: keep list must be sorted");
    std::vector<Index> remap(static_cast<std::size_t>(g.num_nodes()), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        require(keep[i] >= 0 && keep[i] < g.num_nodes(), "induced_subgraph: node out of range");
        remap[static_cast<std::size_t>(keep[i])] = static_cast<Index>(i);
    }
    std::vector<Edge> edges;
    for (const auto& e : g.edges()) {
        const Index a = remap[static_cast<std::size_t>(e.u)];
        const Index b = remap[static_cast<std::size_t>(e.v)];
        if (a >= 0 && b >= 0) edges.push_back({a, b});
    }
    Matrix x(static_cast<Index>(keep.size()), g.feature_dim());
    IndexList labels(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        x.row(static_cast<Index>(i)) = g.features().row(keep[i]);
        labels[i] = g.labels()[static_cast<std::size_t>(keep[i])];
    }
    auto map_split = [&](const IndexList& ids) {
        IndexList out;
        for (Index id : ids)
            if (Index r = remap[static_cast<std::size_t>(id)]; r >= 0) out.push_back(r);
        return out;
    };
    Splits s{map_split(g.splits().train), map_split(g.splits().val), map_split(g.splits().test)};
    return {build_graph(std::move(edges), std::move(x), std::move(labels), std::move(s), g.num_classes()), keep};
}

GraphBundle strip_non_train_labels(const GraphBundle& g) {
    IndexList labels(static_cast<std::size_t>(g.num_nodes()), kUnknownLabel);
    for (Index id : g.splits().train) labels[static_cast<std::size_t>(id)] = g.labels()[static_cast<std::size_t>(id)];
    return build_graph(g.edges(), g.features(), std::move(labels), g.splits(), g.num_classes());
}

}  // namespace gia
