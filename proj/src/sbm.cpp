#include "gia/sbm.hpp"

#include <algorithm>
#include <random>

namespace gia {

GraphBundle generate_sbm(const SbmSpec& spec) {
    require(spec.n >= 1, "SBM: need at least one node");
    require(spec.classes >= 2, "SBM: need at least two classes");
    require(spec.p_out >= 0 && spec.p_out < spec.p_in && spec.p_in <= 1, "SBM: need 0 <= p_out < p_in <= 1");
    require(spec.sigma >= 0, "SBM: negative noise");
    const Index c = spec.classes;
    const Index d = spec.feature_dim == 0 ? c : spec.feature_dim;
    require(d >= c, "SBM: feature_dim smaller than the class count");

    std::mt19937_64 rng(spec.seed);
    IndexList labels(static_cast<std::size_t>(spec.n));
    for (Index u = 0; u < spec.n; ++u) labels[static_cast<std::size_t>(u)] = u % c;

    std::vector<Edge> edges;
    std::uniform_real_distribution<Real> unit(0.0, 1.0);
    for (Index u = 0; u < spec.n; ++u)
        for (Index v = u + 1; v < spec.n; ++v)
            if (unit(rng) < (u % c == v % c ? spec.p_in : spec.p_out)) edges.push_back({u, v});

    if (spec.connect_isolated) {
        std::vector<Index> degree(static_cast<std::size_t>(spec.n), 0);
        for (const auto& e : edges) ++degree[static_cast<std::size_t>(e.u)], ++degree[static_cast<std::size_t>(e.v)];
        for (Index u = 0; u < spec.n; ++u) {
            if (degree[static_cast<std::size_t>(u)] > 0) continue;
            const Index peers = (spec.n - u % c + c - 1) / c;
            if (peers < 2) continue;
            std::uniform_int_distribution<Index> pick(0, peers - 2);
            Index k = pick(rng);
            if (k >= u / c) ++k;
            const Index v = u % c + k * c;
            edges.push_back({std::min(u, v), std::max(u, v)});
            ++degree[static_cast<std::size_t>(u)], ++degree[static_cast<std::size_t>(v)];
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }

    Matrix x = Matrix::Constant(spec.n, d, -1.0 / static_cast<Real>(c - 1));
    for (Index u = 0; u < spec.n; ++u) x(u, u % c) += static_cast<Real>(c) / static_cast<Real>(c - 1);
    if (spec.sigma > 0) {
        std::normal_distribution<Real> noise(0.0, spec.sigma);
        for (Index i = 0; i < x.size(); ++i) x.data()[i] += noise(rng);
    }

    Splits splits;
    for (Index k = 0; k < c; ++k) {
        IndexList members;
        for (Index u = k; u < spec.n; u += c) members.push_back(u);
        std::shuffle(members.begin(), members.end(), rng);
        const std::size_t m = members.size();
        const std::size_t train = m / 2, val = (m * 2) / 10;
        splits.train.insert(splits.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(train));
        splits.val.insert(splits.val.end(), members.begin() + static_cast<std::ptrdiff_t>(train),
                          members.begin() + static_cast<std::ptrdiff_t>(train + val));
        splits.test.insert(splits.test.end(), members.begin() + static_cast<std::ptrdiff_t>(train + val), members.end());
    }
    std::sort(splits.train.begin(), splits.train.end());
    std::sort(splits.val.begin(), splits.val.end());
    std::sort(splits.test.begin(), splits.test.end());
    return build_graph(std::move(edges), std::move(x), std::move(labels), std::move(splits), c);
}

}  // namespace gia
