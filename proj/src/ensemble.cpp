#include "talon/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "talon/targets.hpp"

namespace talon {

void ModelWeights::validate() const {
    if (w.empty()) throw ContractError("model weights: need at least one weight");
    for (double x : w) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw ContractError("model weights must be positive and finite");
        }
    }
}

std::vector<double> ModelWeights::normalized() const {
    validate();
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<double> out(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) out[k] = w[k] / total;
    return out;
}

void LogitsBatch::validate() const {
    if (n_models < 1 || n_samples < 1 || n_classes < 1) {
        throw ContractError("logits batch: all dimensions must be >= 1");
    }
    if (values.size() != static_cast<std::size_t>(n_models) * n_samples * n_classes) {
        throw FormatError("logits batch: payload does not match N x B x K");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ContractError("logits batch: non-finite entry");
    }
}

namespace {

std::vector<double> to_double(const std::vector<float>& v) { return {v.begin(), v.end()}; }

std::vector<float> to_unit_float(const std::vector<double>& v) {
    std::vector<float> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        out[k] = static_cast<float>(std::clamp(v[k], 0.0, 1.0));
    }
    return out;
}

Grid2D<float> resize_map(const Grid2D<float>& m, int d_target, AlignMode mode) {
    Matrix md(m.rows(), m.cols());
    std::copy(m.data().begin(), m.data().end(), md.data().begin());
    const Matrix r = resize_bilinear_map(md, d_target, mode);
    Grid2D<float> out(d_target, d_target);
    for (int i = 0; i < d_target; ++i) {
        for (int d = 0; d < d_target; ++d) {
            out(i, d) = bm_cell_valid(i, d, d_target)
                            ? static_cast<float>(std::clamp(r(i, d), 0.0, 1.0))
                            : 0.0f;
        }
    }
    return out;
}

}  // namespace

ScoreBundle resize_bundle(const ScoreBundle& b, int d_target, AlignMode mode) {
    b.validate();
    if (d_target < 1) throw ContractError("resize_bundle: d_target must be >= 1");
    if (b.d == d_target) return b;
    ScoreBundle out(d_target, b.kind);
    out.start_prob = to_unit_float(resize_linear(to_double(b.start_prob), d_target, mode));
    out.end_prob = to_unit_float(resize_linear(to_double(b.end_prob), d_target, mode));
    out.map_a = resize_map(b.map_a, d_target, mode);
    out.map_b = resize_map(b.map_b, d_target, mode);
    return out;
}

ScoreBundle ensemble_bundles(std::span<const ScoreBundle> bundles, const ModelWeights& w,
                             int d_target, AlignMode mode) {
    if (bundles.empty()) throw ContractError("ensemble_bundles: no bundles given");
    if (w.w.size() != bundles.size()) {
        throw ContractError("ensemble_bundles: " + std::to_string(w.w.size()) + " weights for " +
                            std::to_string(bundles.size()) + " bundles");
    }
    const auto nw = w.normalized();

    std::vector<ScoreBundle> resized;
    resized.reserve(bundles.size());
    for (const auto& b : bundles) resized.push_back(resize_bundle(b, d_target, mode));

    auto combine = [&](auto field) {
        const std::size_t n = field(resized[0]).size();
        std::vector<float> out(n);
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t m = 0; m < resized.size(); ++m) {
                acc += nw[m] * static_cast<double>(field(resized[m])[k]);
            }
            out[k] = static_cast<float>(std::clamp(acc, 0.0, 1.0));
        }
        return out;
    };

    ScoreBundle out(d_target, bundles[0].kind);
    out.start_prob = combine([](const ScoreBundle& b) -> const std::vector<float>& { return b.start_prob; });
    out.end_prob = combine([](const ScoreBundle& b) -> const std::vector<float>& { return b.end_prob; });
    out.map_a.data() = combine([](const ScoreBundle& b) -> const std::vector<float>& { return b.map_a.data(); });
    out.map_b.data() = combine([](const ScoreBundle& b) -> const std::vector<float>& { return b.map_b.data(); });
    return out;
}

ProposalSet fuse_proposal_sets(std::span<const ProposalSet> sets, const ModelWeights& w,
                               const FuseOpts& opts) {
    if (w.w.size() != sets.size()) {
        throw ContractError("fuse_proposal_sets: " + std::to_string(w.w.size()) +
                            " weights for " + std::to_string(sets.size()) + " sets");
    }
    if (sets.empty()) return {};
    const auto nw = w.normalized();

    struct Cluster {
        Segment anchor;
        std::optional<int> class_id;
        std::vector<bool> has_member;
        double score = 0.0;
        double start_acc = 0.0;
        double end_acc = 0.0;
        double plain_start = 0.0;
        double plain_end = 0.0;
        int members = 0;
        int stage = 0;
    };
    std::vector<Cluster> clusters;

    for (std::size_t n = 0; n < sets.size(); ++n) {
        ProposalSet ordered = sets[n];
        sort_by_score(ordered);
        for (const auto& p : ordered) {
            const double s = nw[n] * p.score;
            int target = -1;
            double target_iou = -1.0;
            for (std::size_t c = 0; c < clusters.size(); ++c) {
                const auto& cl = clusters[c];
                if (cl.has_member[n] || cl.class_id != p.class_id) continue;
                const double iou = tiou(cl.anchor, p.segment);
                if (iou >= opts.merge_iou && iou > target_iou) {
                    target = static_cast<int>(c);
                    target_iou = iou;
                }
            }
            if (target < 0) {
                Cluster cl;
                cl.anchor = p.segment;
                cl.class_id = p.class_id;
                cl.has_member.assign(sets.size(), false);
                clusters.push_back(std::move(cl));
                target = static_cast<int>(clusters.size()) - 1;
            }
            auto& cl = clusters[target];
            cl.has_member[n] = true;
            cl.score += s;
            cl.start_acc += s * (p.segment.start - cl.anchor.start);
            cl.end_acc += s * (p.segment.end - cl.anchor.end);
            cl.plain_start += p.segment.start - cl.anchor.start;
            cl.plain_end += p.segment.end - cl.anchor.end;
            cl.members += 1;
            cl.stage = std::max(cl.stage, p.stage);
        }
    }

    ProposalSet merged;
    merged.reserve(clusters.size());
    for (const auto& cl : clusters) {
        Proposal p;
        if (cl.members == 1) {
            p.segment = cl.anchor;
        } else if (cl.score > 0.0) {
            p.segment = {cl.anchor.start + cl.start_acc / cl.score, cl.anchor.end + cl.end_acc / cl.score};
        } else {
            p.segment = {cl.anchor.start + cl.plain_start / cl.members,
                         cl.anchor.end + cl.plain_end / cl.members};
        }
        p.score = std::clamp(cl.score, 0.0, 1.0);
        p.class_id = cl.class_id;
        p.stage = cl.stage;
        merged.push_back(p);
    }
    return soft_nms(merged, opts.nms);
}

namespace {

void check_labels(const LogitsBatch& lb, std::span<const int> labels) {
    if (labels.size() != static_cast<std::size_t>(lb.n_samples)) {
        throw ContractError("labels: expected " + std::to_string(lb.n_samples) + " entries");
    }
    for (int y : labels) {
        if (y < 0 || y >= lb.n_classes) {
            throw ValidationError("label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(lb.n_classes) + ")");
        }
    }
}

std::vector<double> combined_logits(const LogitsBatch& lb, int b, std::span<const double> w) {
    std::vector<double> z(lb.n_classes, 0.0);
    for (int n = 0; n < lb.n_models; ++n) {
        for (int k = 0; k < lb.n_classes; ++k) z[k] += w[n] * lb.at(n, b, k);
    }
    return z;
}

// Softmax of z in place; returns log-sum-exp.
double softmax_inplace(std::vector<double>& z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return mx + std::log(sum);
}

}  // namespace

double ensemble_cross_entropy(const LogitsBatch& lb, std::span<const int> labels,
                              std::span<const double> w) {
    lb.validate();
    check_labels(lb, labels);
    double total = 0.0;
    for (int b = 0; b < lb.n_samples; ++b) {
        auto z = combined_logits(lb, b, w);
        const double zy = z[labels[b]];
        total += softmax_inplace(z) - zy;
    }
    return total / lb.n_samples;
}

ModelWeights fit_adaptive_weights(const LogitsBatch& lb, std::span<const int> labels, double lr,
                                  int iters, AdaptiveFitTrace* trace) {
    lb.validate();
    check_labels(lb, labels);
    if (iters < 0) throw ContractError("fit_adaptive_weights: iters must be >= 0");
    if (!(lr > 0.0)) throw ContractError("fit_adaptive_weights: lr must be > 0");

    std::vector<double> w(lb.n_models, 1.0);
    std::vector<double> grad(lb.n_models);
    for (int it = 0; it <= iters; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (int b = 0; b < lb.n_samples; ++b) {
            auto z = combined_logits(lb, b, w);
            const double zy = z[labels[b]];
            loss += softmax_inplace(z) - zy;
            z[labels[b]] -= 1.0;
            for (int n = 0; n < lb.n_models; ++n) {
                double g = 0.0;
                for (int k = 0; k < lb.n_classes; ++k) g += z[k] * lb.at(n, b, k);
                grad[n] += g;
            }
        }
        loss /= lb.n_samples;
        if (!std::isfinite(loss)) {
            throw NumericalError("fit_adaptive_weights diverged at iteration " +
                                 std::to_string(it) + "; use a smaller learning rate");
        }
        if (trace) {
            trace->loss.push_back(loss);
            trace->weights.push_back(w);
        }
        if (it == iters) break;
        for (int n = 0; n < lb.n_models; ++n) {
            w[n] = std::max(1e-3, w[n] - lr * grad[n] / lb.n_samples);
        }
    }
    return ModelWeights{w};
}

std::vector<std::vector<int>> classify_ensemble(const LogitsBatch& lb, const ModelWeights& w,
                                                int k) {
    lb.validate();
    w.validate();
    if (w.w.size() != static_cast<std::size_t>(lb.n_models)) {
        throw ContractError("classify_ensemble: weight count does not match model count");
    }
    if (k < 1) throw ContractError("classify_ensemble: k must be >= 1");
    const int keep = std::min(k, lb.n_classes);
    std::vector<std::vector<int>> out(lb.n_samples);
    std::vector<int> order(lb.n_classes);
    for (int b = 0; b < lb.n_samples; ++b) {
        // softmax is strictly increasing, so ranking the combined logits is enough
        const auto z = combined_logits(lb, b, w.w);
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + keep, order.end(), [&](int a, int c) {
            if (z[a] != z[c]) return z[a] > z[c];
            return a < c;
        });
        out[b].assign(order.begin(), order.begin() + keep);
    }
    return out;
}

ModelWeights grid_search_weights(int n_models,
                                 const std::function<double(const ModelWeights&)>& score,
                                 int steps) {
    if (n_models < 1) throw ContractError("grid_search_weights: need at least one model");
    if (steps < 1) throw ContractError("grid_search_weights: steps must be >= 1");
    std::vector<int> idx(n_models, 1);
    ModelWeights best;
    double best_score = -std::numeric_limits<double>::infinity();
    while (true) {
        ModelWeights cand;
        for (int v : idx) cand.w.push_back(static_cast<double>(v) / steps);
        const double s = score(cand);
        if (s > best_score) {
            best_score = s;
            best = cand;
        }
        int pos = n_models - 1;
        while (pos >= 0 && idx[pos] == steps) idx[pos--] = 1;
        if (pos < 0) break;
        ++idx[pos];
    }
    return best;
}

}  // namespace talon
