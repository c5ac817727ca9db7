#include "gia/homophily.hpp"

#include <algorithm>
#include <cmath>

namespace gia {

namespace {

Vector raw_inv_sqrt_degrees(const SparseMatrix& adjacency) {
    Vector s(adjacency.rows());
    for (Index u = 0; u < adjacency.rows(); ++u) {
        Real d = 0;
        for (SparseMatrix::InnerIterator it(adjacency, u); it; ++it) d += it.value();
        s[u] = d > 0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    return s;
}

// r_u for every node.
Matrix aggregate(const SparseMatrix& adjacency, const Vector& s, const Matrix& x) {
    Matrix scaled = s.asDiagonal() * x;
    Matrix r = adjacency * scaled;
    return s.asDiagonal() * r;
}

}  // namespace

Vector node_homophily_all(const SparseMatrix& adjacency, const Matrix& features) {
    require(adjacency.rows() == features.rows(), "homophily: adjacency and feature rows differ");
    const Vector s = raw_inv_sqrt_degrees(adjacency);
    const Matrix r = aggregate(adjacency, s, features);
    Vector h(features.rows());
    for (Index u = 0; u < features.rows(); ++u) h[u] = cosine(r.row(u), features.row(u));
    return h;
}

Real node_homophily(const GraphBundle& g, Index u, const Matrix* override_features,
                    const std::vector<WeightedEdge>* extra_edges) {
    const Matrix& x = override_features ? *override_features : g.features();
    GraphView view = GraphView::of(g);
    view.num_nodes = x.rows();
    if (extra_edges) view.extra = *extra_edges;
    require(u >= 0 && u < view.num_nodes, "node_homophily: node out of range");
    const SparseMatrix a = weighted_adjacency(view);
    const Vector s = raw_inv_sqrt_degrees(a);
    if (s[u] == 0) return 0.0;
    RowVector r = RowVector::Zero(x.cols());
    for (SparseMatrix::InnerIterator it(a, u); it; ++it) r += it.value() * s[it.col()] * x.row(it.col());
    r *= s[u];
    return cosine(r, x.row(u));
}

Real edge_homophily(const GraphBundle& g, Index u, Index v) {
    require(u != v, "edge_homophily: u == v");
    return cosine(g.features().row(u), g.features().row(v));
}

Real min_edge_similarity(const GraphBundle& g) {
    require(g.num_edges() > 0, "min_edge_similarity: graph has no edges");
    Real best = 2.0;
    for (const auto& e : g.edges()) best = std::min(best, edge_homophily(g, e.u, e.v));
    return best;
}

int HomophilyProfile::bin_of(Real h) {
    const int bin = static_cast<int>(std::floor((h + 1.0) * kHistogramBins / 2.0));
    return std::clamp(bin, 0, kHistogramBins - 1);
}

HomophilyProfile make_profile(IndexList node_set, Vector samples) {
    require(static_cast<Index>(node_set.size()) == samples.size(), "profile: node and sample counts differ");
    HomophilyProfile p;
    for (Index i = 0; i < samples.size(); ++i) {
        samples[i] = std::clamp(samples[i], Real(-1), Real(1));
        ++p.histogram[static_cast<std::size_t>(HomophilyProfile::bin_of(samples[i]))];
    }
    p.node_set = std::move(node_set);
    p.samples = std::move(samples);
    return p;
}

HomophilyProfile homophily_profile(const SparseMatrix& adjacency, const Matrix& features, const IndexList& node_set) {
    const Vector all = node_homophily_all(adjacency, features);
    Vector samples(static_cast<Index>(node_set.size()));
    for (std::size_t i = 0; i < node_set.size(); ++i) {
        require(node_set[i] >= 0 && node_set[i] < features.rows(), "profile: node out of range");
        samples[static_cast<Index>(i)] = all[node_set[i]];
    }
    return make_profile(node_set, std::move(samples));
}

HomophilyProfile homophily_profile(const GraphBundle& g, const IndexList& node_set) {
    return homophily_profile(weighted_adjacency(GraphView::of(g)), g.features(), node_set);
}

namespace {

Real wasserstein1(std::vector<Real> a, std::vector<Real> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const Real na = static_cast<Real>(a.size());
    const Real nb = static_cast<Real>(b.size());
    // Integrate |F_a - F_b| over the merged breakpoints.
    std::size_t i = 0, j = 0;
    Real total = 0;
    Real prev = std::min(a.front(), b.front());
    while (i < a.size() || j < b.size()) {
        const Real next = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
        total += std::abs(static_cast<Real>(i) / na - static_cast<Real>(j) / nb) * (next - prev);
        while (i < a.size() && a[i] == next) ++i;
        while (j < b.size() && b[j] == next) ++j;
        prev = next;
    }
    return total;
}

}  // namespace

Real profile_distance(const HomophilyProfile& p, const HomophilyProfile& q, ProfileMetric metric) {
    require(p.samples.size() > 0 && q.samples.size() > 0, "profile_distance: empty profile");
    if (metric == ProfileMetric::Wasserstein1) {
        return wasserstein1({p.samples.begin(), p.samples.end()}, {q.samples.begin(), q.samples.end()});
    }
    const Real np = static_cast<Real>(p.samples.size());
    const Real nq = static_cast<Real>(q.samples.size());
    Real tv = 0;
    for (int b = 0; b < kHistogramBins; ++b)
        tv += std::abs(static_cast<Real>(p.histogram[b]) / np - static_cast<Real>(q.histogram[b]) / nq);
    return 0.5 * tv;
}

NoticeabilityResult unnoticeability_check(const GraphBundle& g, const SparseMatrix& perturbed_adjacency,
                                          const Matrix& perturbed_features, const IndexList& nodes,
                                          Real max_shift, ProfileMetric metric) {
    IndexList original;
    for (Index u : nodes)
        if (u >= 0 && u < g.num_nodes()) original.push_back(u);
    if (original.empty()) return {true, 0.0};
    const auto before = homophily_profile(g, original);
    const auto after = homophily_profile(perturbed_adjacency, perturbed_features, original);
    const Real distance = profile_distance(before, after, metric);
    return {distance <= max_shift, distance};
}

HomophilyGradient mean_homophily_gradient(const SparseMatrix& adjacency, const Matrix& features,
                                          const IndexList& nodes, const std::vector<Edge>& pairs) {
    const Index n = features.rows();
    require(adjacency.rows() == n, "homophily gradient: adjacency and feature rows differ");
    HomophilyGradient out;
    out.features = Matrix::Zero(n, features.cols());
    out.edges.assign(pairs.size(), 0.0);
    if (nodes.empty()) return out;

    const Vector s = raw_inv_sqrt_degrees(adjacency);
    const Matrix ay = adjacency * (s.asDiagonal() * features);
    const Matrix r = s.asDiagonal() * ay;
    const Real weight = 1.0 / static_cast<Real>(nodes.size());

    Matrix grad_r = Matrix::Zero(n, features.cols());
    for (Index u : nodes) {
        const Real nr = r.row(u).norm();
        const Real nx = features.row(u).norm();
        if (nr == 0 || nx == 0) continue;
        const Real h = r.row(u).dot(features.row(u)) / (nr * nx);
        out.value += weight * h;
        grad_r.row(u) += weight * (features.row(u) / (nr * nx) - h * r.row(u) / (nr * nr));
        out.features.row(u) += weight * (r.row(u) / (nr * nx) - h * features.row(u) / (nx * nx));
    }

    const Matrix back = adjacency * (s.asDiagonal() * grad_r);
    out.features += s.asDiagonal() * back;

    if (!pairs.empty()) {
        Vector q(n);
        for (Index u = 0; u < n; ++u) {
            const Real ds = grad_r.row(u).dot(ay.row(u)) + features.row(u).dot(back.row(u));
            q[u] = -0.5 * s[u] * s[u] * s[u] * ds;
        }
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto [a, b] = pairs[i];
            out.edges[i] = s[a] * s[b] * (grad_r.row(a).dot(features.row(b)) + grad_r.row(b).dot(features.row(a))) +
                           q[a] + q[b];
        }
    }
    return out;
}

}  // namespace gia
