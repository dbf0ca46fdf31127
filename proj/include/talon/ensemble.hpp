#pragma once

#include <functional>
#include <span>
#include <vector>

#include "talon/core.hpp"
#include "talon/decode.hpp"
#include "talon/numerics.hpp"
#include "talon/postprocess.hpp"

namespace talon {

/// Positive per-model weights.
struct ModelWeights {
    std::vector<double> w;

    void validate() const;
    std::vector<double> normalized() const;
};

/// Pre-softmax scores of N models on B samples over K classes, model-major.
struct LogitsBatch {
    int n_models = 0;
    int n_samples = 0;
    int n_classes = 0;
    std::vector<double> values;

    LogitsBatch() = default;
    LogitsBatch(int n, int b, int k)
        : n_models(n), n_samples(b), n_classes(k),
          values(static_cast<std::size_t>(n) * b * k, 0.0) {}

    double& at(int n, int b, int k) {
        return values[(static_cast<std::size_t>(n) * n_samples + b) * n_classes + k];
    }
    double at(int n, int b, int k) const {
        return values[(static_cast<std::size_t>(n) * n_samples + b) * n_classes + k];
    }

    void validate() const;
};

/// Resizes every bundle to d_target and takes the weight-normalised convex combination.
ScoreBundle ensemble_bundles(std::span<const ScoreBundle> bundles, const ModelWeights& w,
                             int d_target, AlignMode mode = AlignMode::centers);

/// Resizes one bundle; invalid-triangle cells of the result are zeroed.
ScoreBundle resize_bundle(const ScoreBundle& b, int d_target, AlignMode mode = AlignMode::centers);

struct FuseOpts {
    SoftNmsOpts nms;
    double merge_iou = 0.95;
};

/// Weighted union of proposal sets: near-duplicates across sets are merged into one
/// proposal, then soft-NMS is applied.
ProposalSet fuse_proposal_sets(std::span<const ProposalSet> sets, const ModelWeights& w,
                               const FuseOpts& opts = {});

/// Mean cross-entropy of softmax(sum_n w_n * logits_n).
double ensemble_cross_entropy(const LogitsBatch& lb, std::span<const int> labels,
                              std::span<const double> w);

struct AdaptiveFitTrace {
    std::vector<double> loss;                  // loss before each step, then the final loss
    std::vector<std::vector<double>> weights;  // weights before each step, then the final ones
};

/// Gradient descent on the ensemble cross-entropy from all-ones weights; weights are
/// projected to >= 1e-3 after each step.
ModelWeights fit_adaptive_weights(const LogitsBatch& lb, std::span<const int> labels, double lr,
                                  int iters, AdaptiveFitTrace* trace = nullptr);

/// Top-k classes per sample of the weighted logit sum; ties go to the lower class id.
std::vector<std::vector<int>> classify_ensemble(const LogitsBatch& lb, const ModelWeights& w,
                                                int k);

/// Exhaustive search over per-model weights in {0.1, 0.2, ..., 1.0} maximising `score`.
/// The first best combination in lexicographic order wins.
ModelWeights grid_search_weights(int n_models,
                                 const std::function<double(const ModelWeights&)>& score,
                                 int steps = 10);

}  // namespace talon
