#pragma once

#include "gia/sparse.hpp"

#include <array>

namespace gia {

inline constexpr int kHistogramBins = 40;

/// Per-node homophily h_u = cos(r_u, X_u) with r_u = sum_j w_uj X_j / sqrt(d_j d_u),
/// raw weighted degrees, no self-loop. Zero when r_u or X_u vanishes.
Vector node_homophily_all(const SparseMatrix& adjacency, const Matrix& features);

/// Single-node form. Optional feature override must cover every node, including
/// endpoints of extra edges beyond the base graph.
Real node_homophily(const GraphBundle& g, Index u, const Matrix* override_features = nullptr,
                    const std::vector<WeightedEdge>* extra_edges = nullptr);

Real edge_homophily(const GraphBundle& g, Index u, Index v);

/// Minimum cosine over the graph's edges.
Real min_edge_similarity(const GraphBundle& g);

struct HomophilyProfile {
    IndexList node_set;
    Vector samples;
    std::array<Index, kHistogramBins> histogram{};

    static int bin_of(Real h);
    static Real bin_lower_edge(int bin) { return -1.0 + 2.0 * bin / kHistogramBins; }
};

HomophilyProfile make_profile(IndexList node_set, Vector samples);
HomophilyProfile homophily_profile(const GraphBundle& g, const IndexList& node_set);
HomophilyProfile homophily_profile(const SparseMatrix& adjacency, const Matrix& features, const IndexList& node_set);

enum class ProfileMetric { Wasserstein1, TotalVariation };

/// Wasserstein1 is the exact distance between the two empirical sample distributions
/// (any sizes); TotalVariation compares the normalized 40-bin histograms.
Real profile_distance(const HomophilyProfile& p, const HomophilyProfile& q,
                      ProfileMetric metric = ProfileMetric::Wasserstein1);

struct NoticeabilityResult {
    bool pass = true;
    Real distance = 0.0;
};

/// Profiles `nodes` restricted to the original graph on both sides and compares them.
NoticeabilityResult unnoticeability_check(const GraphBundle& g, const SparseMatrix& perturbed_adjacency,
                                          const Matrix& perturbed_features, const IndexList& nodes,
                                          Real max_shift, ProfileMetric metric = ProfileMetric::Wasserstein1);

struct HomophilyGradient {
    Real value = 0.0;
    Matrix features;           // d(mean h)/dX, every row
    std::vector<Real> edges;   // d(mean h)/dw for each requested pair
};

/// Mean homophily over `nodes` and its gradient. Pairs need not be present in
/// the adjacency; absent pairs get the derivative at weight 0.
HomophilyGradient mean_homophily_gradient(const SparseMatrix& adjacency, const Matrix& features,
                                          const IndexList& nodes, const std::vector<Edge>& pairs = {});

}  // namespace gia
