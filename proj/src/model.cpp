#include "gia/model.hpp"

#include <algorithm>
#include <cmath>

namespace gia {

namespace {

constexpr Real kLayerNormEps = 1e-5;

struct LnCache {
    Matrix hat;
    Vector inv;
};

Matrix ln_forward(const Matrix& x, const Matrix& gain, const Matrix& shift, LnCache& cache) {
    const Index n = x.rows();
    const Real width = static_cast<Real>(x.cols());
    cache.hat.resize(n, x.cols());
    cache.inv.resize(n);
    for (Index i = 0; i < n; ++i) {
        const Real mean = x.row(i).sum() / width;
        const Real var = (x.row(i).array() - mean).square().sum() / width;
        cache.inv[i] = 1.0 / std::sqrt(var + kLayerNormEps);
        cache.hat.row(i) = (x.row(i).array() - mean) * cache.inv[i];
    }
    Matrix y = cache.hat.array().rowwise() * gain.row(0).array();
    y.rowwise() += shift.row(0);
    return y;
}

RowVector ln_backward_row(const RowVector& g, const Matrix& gain, const LnCache& cache, Index i) {
    const Real width = static_cast<Real>(g.cols());
    const RowVector gh = g.cwiseProduct(gain.row(0));
    const RowVector hat = cache.hat.row(i);
    return cache.inv[i] / width * (width * gh.array() - gh.sum() - hat.array() * gh.dot(hat)).matrix();
}

Matrix ln_backward(const Matrix& g, const Matrix& gain, const LnCache& cache, Matrix* g_gain, Matrix* g_shift) {
    if (g_gain) *g_gain = (g.cwiseProduct(cache.hat)).colwise().sum();
    if (g_shift) *g_shift = g.colwise().sum();
    Matrix out(g.rows(), g.cols());
    for (Index i = 0; i < g.rows(); ++i) out.row(i) = ln_backward_row(g.row(i), gain, cache, i);
    return out;
}

enum class Prop { None, Normalized, Guard };

struct LayerTape {
    Matrix input;
    Matrix transformed;
    Matrix propagated;
    Prop prop = Prop::None;
    SparseMatrix coeff;  // guard aggregation alpha * w
    SparseMatrix alpha;  // guard alpha
    Matrix pre_activation;
    LnCache ln;
    Matrix dropout_mask;
};

struct Tape {
    LnCache ln_pre;
    std::vector<LayerTape> layers;
    std::vector<Matrix> linear_props;  // inputs of each propagation (LinearizedGNN)
    Matrix logits;
};

Prop prop_kind(Arch arch) {
    switch (arch) {
        case Arch::MLP: return Prop::None;
        case Arch::EGuardGCN:
        case Arch::RGAT: return Prop::Guard;
        default: return Prop::Normalized;
    }
}

void guard_alpha(const NormAdjView& view, const Matrix& reps, Real threshold, bool eguard, SparseMatrix& alpha,
                 SparseMatrix& coeff) {
    const Index n = view.num_nodes();
    const SparseMatrix& adj = view.adjacency();
    std::vector<Eigen::Triplet<Real>> ta, tc;
    std::vector<Index> kept;
    std::vector<Real> sims, weights;
    for (Index u = 0; u < n; ++u) {
        kept.clear();
        sims.clear();
        weights.clear();
        for (SparseMatrix::InnerIterator it(adj, u); it; ++it) {
            if (it.value() <= 0) continue;
            const Real s = cosine(reps.row(u), reps.row(it.col()));
            if (eguard ? s > threshold : s >= threshold) {
                kept.push_back(it.col());
                sims.push_back(s);
                weights.push_back(it.value());
            }
        }
        const std::size_t k = kept.size();
        std::vector<Real> a(k + 1);
        if (!eguard) {
            std::fill(a.begin(), a.end(), 1.0 / static_cast<Real>(k + 1));
        } else {
            Real sim_sum = 0;
            for (Real s : sims) sim_sum += s;
            std::vector<Real> z(k + 1);
            for (std::size_t i = 0; i < k; ++i)
                z[i] = sim_sum != 0 ? sims[i] / sim_sum : 1.0 / static_cast<Real>(k);
            z[k] = 1.0 / static_cast<Real>(k + 1);
            Real z_sum = 0;
            for (Real v : z) z_sum += v;
            Real top = -1e300;
            for (auto& v : z) top = std::max(top, v /= z_sum);
            Real total = 0;
            for (std::size_t i = 0; i <= k; ++i) total += a[i] = std::exp(z[i] - top);
            for (auto& v : a) v /= total;
        }
        for (std::size_t i = 0; i < k; ++i) {
            ta.emplace_back(static_cast<int>(u), static_cast<int>(kept[i]), a[i]);
            tc.emplace_back(static_cast<int>(u), static_cast<int>(kept[i]), a[i] * weights[i]);
        }
        ta.emplace_back(static_cast<int>(u), static_cast<int>(u), a[k]);
        tc.emplace_back(static_cast<int>(u), static_cast<int>(u), a[k]);
    }
    alpha.resize(n, n);
    alpha.setFromTriplets(ta.begin(), ta.end());
    coeff.resize(n, n);
    coeff.setFromTriplets(tc.begin(), tc.end());
}

Tape run_forward(const GnnModel& m, const NormAdjView& view, const Matrix& x, std::mt19937_64* rng) {
    require(x.rows() == view.num_nodes(), "forward: feature rows (" + std::to_string(x.rows()) +
                                              ") do not match the graph (" + std::to_string(view.num_nodes()) + ")");
    require(x.cols() == m.dims.input, "forward: feature width does not match the model");
    require(x.allFinite(), "forward: features contain NaN or Inf");
    Tape tape;

    if (m.arch == Arch::LinearizedGNN) {
        Matrix h = x * m.weights[0];
        for (Index i = 0; i < m.dims.layers; ++i) {
            tape.linear_props.push_back(h);
            h = view.normalized() * h;
        }
        tape.logits = std::move(h);
        return tape;
    }

    Matrix h = m.options.layer_norm_pre ? ln_forward(x, m.ln_pre_gain, m.ln_pre_shift, tape.ln_pre) : x;
    SparseMatrix rgat_alpha, rgat_coeff;
    if (m.arch == Arch::RGAT) guard_alpha(view, x, m.options.guard_threshold, false, rgat_alpha, rgat_coeff);

    const std::size_t depth = m.weights.size();
    tape.layers.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
        LayerTape& lt = tape.layers[l];
        lt.prop = prop_kind(m.arch);
        lt.input = std::move(h);
        lt.transformed = lt.input * m.weights[l];
        switch (lt.prop) {
            case Prop::None: lt.propagated = lt.transformed; break;
            case Prop::Normalized: lt.propagated = view.normalized() * lt.transformed; break;
            case Prop::Guard:
                if (m.arch == Arch::RGAT) {
                    lt.alpha = rgat_alpha;
                    lt.coeff = rgat_coeff;
                } else {
                    guard_alpha(view, lt.input, m.options.guard_threshold, true, lt.alpha, lt.coeff);
                }
                lt.propagated = lt.coeff * lt.transformed;
                break;
        }
        lt.pre_activation = lt.propagated;
        if (!m.biases.empty()) lt.pre_activation.rowwise() += m.biases[l].row(0);
        if (l + 1 == depth) {
            tape.logits = lt.pre_activation;
            break;
        }
        h = lt.pre_activation.cwiseMax(0.0);
        if (m.options.layer_norm_inter) h = ln_forward(h, m.ln_gain[l], m.ln_shift[l], lt.ln);
        if (rng && m.options.dropout > 0) {
            std::bernoulli_distribution keep(1.0 - m.options.dropout);
            lt.dropout_mask.resize(h.rows(), h.cols());
            const Real scale = 1.0 / (1.0 - m.options.dropout);
            for (Index i = 0; i < h.size(); ++i) lt.dropout_mask.data()[i] = keep(*rng) ? scale : 0.0;
            h = h.cwiseProduct(lt.dropout_mask);
        }
    }
    return tape;
}

// Contribution of one normalized propagation Z = Â T to d/dw for each pair.
void normalized_edge_terms(const NormAdjView& view, const Matrix& t, const Matrix& z, const Matrix& g_z,
                           const Matrix& g_t, const std::vector<Edge>& pairs, std::vector<Real>& out) {
    const Vector& s = view.inv_sqrt_degrees();
    const Vector& d = view.degrees();
    auto q = [&](Index u) { return d[u] > 0 ? -0.5 / d[u] * (g_z.row(u).dot(z.row(u)) + t.row(u).dot(g_t.row(u))) : 0.0; };
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [a, b] = pairs[i];
        out[i] += s[a] * s[b] * (g_z.row(a).dot(t.row(b)) + g_z.row(b).dot(t.row(a))) + q(a) + q(b);
    }
}

void guard_edge_terms(const LayerTape& lt, const Matrix& g_z, const std::vector<Edge>& pairs, std::vector<Real>& out) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [a, b] = pairs[i];
        const Real ab = lt.alpha.coeff(a, b);
        const Real ba = lt.alpha.coeff(b, a);
        if (ab != 0) out[i] += ab * g_z.row(a).dot(lt.transformed.row(b));
        if (ba != 0) out[i] += ba * g_z.row(b).dot(lt.transformed.row(a));
    }
}

Matrix rows_of(const Matrix& m, const IndexList& rows) {
    if (rows.empty()) return m;
    Matrix out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
    return out;
}

}  // namespace

std::string arch_name(Arch arch) {
    switch (arch) {
        case Arch::LinearizedGNN: return "linearized";
        case Arch::GCN: return "gcn";
        case Arch::EGuardGCN: return "eguard";
        case Arch::RGAT: return "rgat";
        case Arch::MLP: return "mlp";
    }
    return "unknown";
}

Arch parse_arch(const std::string& name) {
    for (Arch a : {Arch::LinearizedGNN, Arch::GCN, Arch::EGuardGCN, Arch::RGAT, Arch::MLP})
        if (arch_name(a) == name) return a;
    throw Error("unknown architecture '" + name + "'");
}

std::vector<Matrix*> GnnModel::parameters() {
    std::vector<Matrix*> out;
    for (auto& w : weights) out.push_back(&w);
    for (auto& b : biases) out.push_back(&b);
    if (options.layer_norm_pre) {
        out.push_back(&ln_pre_gain);
        out.push_back(&ln_pre_shift);
    }
    for (std::size_t i = 0; i < ln_gain.size(); ++i) {
        out.push_back(&ln_gain[i]);
        out.push_back(&ln_shift[i]);
    }
    return out;
}

std::vector<const Matrix*> GnnModel::parameters() const {
    auto mut = const_cast<GnnModel*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

GnnModel init_model(Arch arch, ModelDims dims, ModelOptions options, std::uint64_t seed) {
    require(dims.input > 0 && dims.output > 0, "init_model: input and output widths must be positive");
    require(dims.layers >= 1 || (arch == Arch::LinearizedGNN && dims.layers >= 0), "init_model: need at least one layer");
    require(options.guard_threshold >= -1 && options.guard_threshold <= 1, "init_model: guard threshold outside [-1, 1]");
    require(options.dropout >= 0 && options.dropout < 1, "init_model: dropout must lie in [0, 1)");
    GnnModel m;
    m.arch = arch;
    m.dims = dims;
    m.options = options;
    m.seed = seed;
    if (arch == Arch::RGAT) m.options.layer_norm_inter = true;
    std::mt19937_64 rng(seed);

    auto glorot = [&](Index fan_in, Index fan_out) {
        const Real a = std::sqrt(6.0 / static_cast<Real>(fan_in + fan_out));
        std::uniform_real_distribution<Real> unif(-a, a);
        Matrix w(fan_in, fan_out);
        for (Index i = 0; i < w.size(); ++i) w.data()[i] = unif(rng);
        return w;
    };

    if (arch == Arch::LinearizedGNN) {
        m.options.bias = false;
        m.options.layer_norm_pre = m.options.layer_norm_inter = false;
        m.weights.push_back(glorot(dims.input, dims.output));
        return m;
    }
    require(dims.hidden > 0 || dims.layers == 1, "init_model: hidden width must be positive");
    std::vector<Index> widths{dims.input};
    for (Index l = 0; l + 1 < dims.layers; ++l) widths.push_back(dims.hidden);
    widths.push_back(dims.output);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        m.weights.push_back(glorot(widths[l], widths[l + 1]));
        if (m.options.bias) m.biases.push_back(Matrix::Zero(1, widths[l + 1]));
    }
    if (m.options.layer_norm_pre) {
        m.ln_pre_gain = Matrix::Ones(1, dims.input);
        m.ln_pre_shift = Matrix::Zero(1, dims.input);
    }
    if (m.options.layer_norm_inter)
        for (Index l = 0; l + 1 < dims.layers; ++l) {
            m.ln_gain.push_back(Matrix::Ones(1, dims.hidden));
            m.ln_shift.push_back(Matrix::Zero(1, dims.hidden));
        }
    return m;
}

Matrix forward(const GnnModel& model, const NormAdjView& view, const Matrix& features) {
    return run_forward(model, view, features, nullptr).logits;
}

Gradients gradients(const GnnModel& m, const NormAdjView& view, const Matrix& x, const LossFn& loss,
                    const GradRequest& req, std::mt19937_64* training_rng) {
    for (Index r : req.feature_rows) require(r >= 0 && r < x.rows(), "gradients: feature row out of range");
    for (const auto& e : req.edge_pairs)
        require(e.u >= 0 && e.v >= 0 && e.u < x.rows() && e.v < x.rows() && e.u != e.v,
                "gradients: invalid edge pair");

    Tape tape = run_forward(m, view, x, training_rng);
    LossValue lv = loss(tape.logits);
    Gradients out;
    out.loss = lv.value;
    out.edges.assign(req.edge_pairs.size(), 0.0);

    std::vector<Matrix> param_grads;
    const bool want_edges = !req.edge_pairs.empty();

    if (m.arch == Arch::LinearizedGNN) {
        Matrix g = std::move(lv.grad);
        for (Index i = m.dims.layers - 1; i >= 0; --i) {
            Matrix g_in = view.normalized() * g;
            if (want_edges) {
                const Matrix& t = tape.linear_props[static_cast<std::size_t>(i)];
                const Matrix z = (i + 1 < m.dims.layers) ? tape.linear_props[static_cast<std::size_t>(i + 1)]
                                                         : tape.logits;
                normalized_edge_terms(view, t, z, g, g_in, req.edge_pairs, out.edges);
            }
            g = std::move(g_in);
        }
        if (req.params) param_grads.push_back(x.transpose() * g);
        if (req.features) out.features = rows_of(g, req.feature_rows) * m.weights[0].transpose();
    } else {
        const std::size_t depth = tape.layers.size();
        std::vector<Matrix> g_w(depth), g_b(depth), g_lng(m.ln_gain.size()), g_lns(m.ln_shift.size());
        Matrix g_pre_gain, g_pre_shift;
        Matrix g_a = std::move(lv.grad);
        Matrix g_input;
        for (std::size_t li = depth; li-- > 0;) {
            LayerTape& lt = tape.layers[li];
            if (li + 1 < depth) {
                Matrix g_h = std::move(g_input);
                if (lt.dropout_mask.size() > 0) g_h = g_h.cwiseProduct(lt.dropout_mask);
                if (m.options.layer_norm_inter)
                    g_h = ln_backward(g_h, m.ln_gain[li], lt.ln, req.params ? &g_lng[li] : nullptr,
                                      req.params ? &g_lns[li] : nullptr);
                g_a = g_h.cwiseProduct((lt.pre_activation.array() > 0).cast<Real>().matrix());
            }
            if (req.params && !m.biases.empty()) g_b[li] = g_a.colwise().sum();
            Matrix g_t;
            switch (lt.prop) {
                case Prop::None: g_t = g_a; break;
                case Prop::Normalized:
                    g_t = view.normalized() * g_a;
                    if (want_edges) normalized_edge_terms(view, lt.transformed, lt.propagated, g_a, g_t, req.edge_pairs, out.edges);
                    break;
                case Prop::Guard:
                    g_t = lt.coeff.transpose() * g_a;
                    if (want_edges) guard_edge_terms(lt, g_a, req.edge_pairs, out.edges);
                    break;
            }
            if (req.params) g_w[li] = lt.input.transpose() * g_t;
            if (li > 0) {
                g_input = g_t * m.weights[li].transpose();
            } else if (req.features) {
                Matrix g_h0 = rows_of(g_t, req.feature_rows) * m.weights[0].transpose();
                if (m.options.layer_norm_pre) {
                    if (req.feature_rows.empty()) {
                        g_h0 = ln_backward(g_h0, m.ln_pre_gain, tape.ln_pre, nullptr, nullptr);
                    } else {
                        for (std::size_t r = 0; r < req.feature_rows.size(); ++r)
                            g_h0.row(static_cast<Index>(r)) =
                                ln_backward_row(g_h0.row(static_cast<Index>(r)), m.ln_pre_gain, tape.ln_pre, req.feature_rows[r]);
                    }
                }
                out.features = std::move(g_h0);
            }
            if (li == 0 && req.params && m.options.layer_norm_pre) {
                const Matrix g_h0 = g_t * m.weights[0].transpose();
                g_pre_gain = g_h0.cwiseProduct(tape.ln_pre.hat).colwise().sum();
                g_pre_shift = g_h0.colwise().sum();
            }
        }
        if (req.params) {
            for (auto& w : g_w) param_grads.push_back(std::move(w));
            if (!m.biases.empty())
                for (auto& b : g_b) param_grads.push_back(std::move(b));
            if (m.options.layer_norm_pre) {
                param_grads.push_back(std::move(g_pre_gain));
                param_grads.push_back(std::move(g_pre_shift));
            }
            for (std::size_t i = 0; i < m.ln_gain.size(); ++i) {
                param_grads.push_back(std::move(g_lng[i]));
                param_grads.push_back(std::move(g_lns[i]));
            }
        }
    }
    out.params = std::move(param_grads);
    out.logits = std::move(tape.logits);
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (Index i = 0; i < logits.rows(); ++i) {
        const Real top = logits.row(i).maxCoeff();
        p.row(i) = (logits.row(i).array() - top).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

IndexList argmax_rows(const Matrix& logits) {
    IndexList out(static_cast<std::size_t>(logits.rows()));
    for (Index i = 0; i < logits.rows(); ++i) {
        Index best = 0;
        for (Index c = 1; c < logits.cols(); ++c)
            if (logits(i, c) > logits(i, best)) best = c;
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

LossValue cross_entropy(const Matrix& logits, const IndexList& nodes, const IndexList& labels) {
    require(!nodes.empty(), "cross_entropy: empty node set");
    LossValue lv;
    lv.grad = Matrix::Zero(logits.rows(), logits.cols());
    const Real w = 1.0 / static_cast<Real>(nodes.size());
    for (Index u : nodes) {
        const Index y = labels[static_cast<std::size_t>(u)];
        require(y >= 0 && y < logits.cols(), "cross_entropy: node " + std::to_string(u) + " has no valid label");
        const Real top = logits.row(u).maxCoeff();
        const RowVector e = (logits.row(u).array() - top).exp().matrix();
        const Real z = e.sum();
        lv.value += w * (std::log(z) + top - logits(u, y));
        lv.grad.row(u) += w * e / z;
        lv.grad(u, y) -= w;
    }
    return lv;
}

SparseMatrix eguard_coefficients(const NormAdjView& view, const Matrix& hidden, Real threshold) {
    SparseMatrix alpha, coeff;
    guard_alpha(view, hidden, threshold, true, alpha, coeff);
    return coeff;
}

SparseMatrix rgat_coefficients(const NormAdjView& view, const Matrix& raw_features, Real threshold) {
    SparseMatrix alpha, coeff;
    guard_alpha(view, raw_features, threshold, false, alpha, coeff);
    return coeff;
}

}  // namespace gia
