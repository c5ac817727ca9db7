#include "gia/defense.hpp"

#include "gia/bundle_io.hpp"
#include "gia/homophily.hpp"
#include "gia/train.hpp"

#include <cmath>
#include <sstream>

namespace gia {

namespace {

constexpr Real kPruneSlack = 1e-12;

/// Clips a convex polygon to {x : a . x <= b}.
std::vector<RowVector> clip_halfplane(const std::vector<RowVector>& poly, const RowVector& a, Real b) {
    std::vector<RowVector> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const RowVector& p = poly[i];
        const RowVector& q = poly[(i + 1) % poly.size()];
        const Real fp = a.dot(p) - b, fq = a.dot(q) - b;
        if (fp <= 0) out.push_back(p);
        if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) out.push_back(p + (fp / (fp - fq)) * (q - p));
    }
    return out;
}

}  // namespace

PruneResult prune_graph(const GraphView& view, const Matrix& features, Real tau) {
    require(features.rows() >= view.num_nodes, "prune: feature rows do not cover the view");
    PruneResult r;
    r.view = view;
    const auto& edges = view.base->edges();
    if (r.view.base_removed.empty()) r.view.base_removed.assign(edges.size(), false);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!view.base_edge_kept(i)) continue;
        const Edge e = edges[i];
        const Real s = cosine(features.row(e.u), features.row(e.v));
        if (s <= tau + kPruneSlack) {
            r.view.base_removed[i] = true;
            r.removed.push_back({e.u, e.v, s, false});
        }
    }
    r.view.extra.clear();
    for (const auto& e : view.extra) {
        const Real s = cosine(features.row(e.u), features.row(e.v));
        if (s <= tau + kPruneSlack) {
            r.removed.push_back({e.u, e.v, s, true});
        } else {
            r.view.extra.push_back(e);
        }
    }
    return r;
}

void write_prune_audit(const std::filesystem::path& path, const PruneResult& result) {
    std::ostringstream out;
    out.precision(17);
    out << "u,v,similarity,origin\n";
    for (const auto& e : result.removed)
        out << e.u << ',' << e.v << ',' << e.similarity << ',' << (e.injected ? "injected" : "original") << '\n';
    write_file(path, out.str());
}

Defense with_threshold(Defense d, Real tau) {
    require(tau >= -1.0 && tau <= 1.0, "defense threshold must lie in [-1, 1]");
    d.tau = tau;
    if (d.model.arch == Arch::EGuardGCN || d.model.arch == Arch::RGAT) d.model.options.guard_threshold = tau;
    return d;
}

Matrix defended_logits(const Defense& defense, const GraphView& view, const Matrix& features) {
    if (!defense.prune) return forward(defense.model, NormAdjView(view), features);
    return forward(defense.model, NormAdjView(prune_graph(view, features, defense.tau).view), features);
}

Real defended_evaluate(const Defense& defense, const GraphView& view, const Matrix& features, const IndexList& nodes,
                       const IndexList& labels) {
    return predict_accuracy(defended_logits(defense, view, features), nodes, labels);
}

std::vector<Real> default_threshold_grid() { return {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3}; }

Calibration calibrate_threshold(const Defense& defense, const GraphBundle& clean,
                                const std::vector<PerturbedGraph>& samples, const IndexList& nodes,
                                const IndexList& labels, std::vector<Real> grid) {
    require(!grid.empty(), "calibrate: empty threshold grid");
    std::sort(grid.begin(), grid.end());
    Calibration cal;
    Real best = -1.0;
    for (Real tau : grid) {
        const Defense d = with_threshold(defense, tau);
        CalibrationRow row{tau, defended_evaluate(d, GraphView::of(clean), clean.features(), nodes, labels), 1.0};
        for (const auto& s : samples)
            row.perturbed = std::min(row.perturbed, defended_evaluate(d, s.view, s.features, nodes, labels));
        const Real score = std::min(row.clean, row.perturbed);
        if (score >= best) {
            best = score;
            cal.tau = tau;
        }
        cal.table.push_back(row);
    }
    return cal;
}

Certificate certify_node(const GraphBundle& g, const GnnModel& linearized, Index u, Real tau) {
    require(g.num_classes() == 2 && g.feature_dim() == 2, "certify: needs the binary two-feature setting");
    for (Index i = 0; i < g.num_nodes(); ++i) {
        const Real a = g.features()(i, 0), b = g.features()(i, 1);
        require((a == 1 && b == -1) || (a == -1 && b == 1), "certify: features are not class indicators");
    }
    require(linearized.arch == Arch::LinearizedGNN && linearized.dims.input == 2 && linearized.dims.output == 2,
            "certify: needs a two-class linearized surrogate");
    require(u >= 0 && u < g.num_nodes(), "certify: node out of range");

    const Index n = g.num_nodes();
    const Index k = linearized.dims.layers;
    const Matrix& x = g.features();
    const PruneResult clean = prune_graph(GraphView::of(g), x, tau);
    const NormAdjView clean_view(clean.view);
    const RowVector logits = forward(linearized, clean_view, x).row(u);

    Certificate c;
    c.predicted = logits[1] > logits[0] ? 1 : 0;
    const Index other = 1 - c.predicted;
    const Matrix& theta = linearized.weights[0];
    const Vector delta = theta.col(c.predicted) - theta.col(other);
    c.margin = logits[c.predicted] - logits[other];
    c.gamma = x.row(u).dot(delta);
    c.homophily = node_homophily_all(clean_view.adjacency(), x)[u];
    const Real d = clean_view.degrees()[u] - 1.0;
    c.degree_factor = std::sqrt(d / (d + 1.0));
    c.influence_self = influence_scores(clean_view, u, k)[u];

    GraphView attacked = clean.view;
    attacked.num_nodes = n + 1;
    attacked.extra.push_back({n, u, 1.0});
    const Vector inf = influence_scores(NormAdjView(attacked), u, k);
    c.influence_injected = inf[n];
    const Real m0 = inf.head(n).dot(x * delta);

    if (c.homophily != 0) c.zeta = (c.margin - c.influence_self * c.gamma) / c.homophily;
    if (c.zeta != 0) c.beta = c.influence_self / c.zeta;
    c.alpha = c.zeta / (2.0 * c.influence_injected);
    c.closed_form_bound = -c.degree_factor * (c.zeta * c.homophily + c.influence_self * c.gamma) / (2.0 * c.influence_injected);

    // Effective injections: m0 + I_uw (X_w . delta) <= 0, intersected with the box.
    const FeatureBox box = g.feature_box();
    std::vector<RowVector> poly;
    for (auto [p, q] : {std::pair{box.lo, box.lo}, {box.hi, box.lo}, {box.hi, box.hi}, {box.lo, box.hi}}) {
        RowVector v(2);
        v << p, q;
        poly.push_back(v);
    }
    const RowVector a = c.influence_injected * delta.transpose();
    poly = clip_halfplane(poly, a, -m0);
    if (poly.empty()) {
        c.certified = true;
        return c;
    }
    const RowVector xu = x.row(u);
    for (const auto& v : poly) c.bound = std::max(c.bound, cosine(xu, v));
    // The ray through X_u inside the box reaches t * X_u for t <= T.
    const Real t_max = std::min(box.hi, -box.lo) / xu.cwiseAbs().maxCoeff();
    const Real s = a.dot(xu);
    if (t_max > 0 && (s * t_max <= -m0 || -m0 > 0 || (m0 == 0 && s <= 0))) c.bound = 1.0;
    if (box.lo <= 0 && box.hi >= 0 && -m0 >= 0) c.bound = std::max(c.bound, 0.0);
    c.certified = c.bound <= tau + kPruneSlack;
    return c;
}

}  // namespace gia
