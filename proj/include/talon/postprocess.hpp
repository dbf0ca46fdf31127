#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "talon/core.hpp"
#include "talon/numerics.hpp"

namespace talon {

struct SoftNmsOpts {
    double sigma = 0.4;
    double min_score = 1e-4;
    int top_k = 100;
};

/// Gaussian soft-NMS: repeatedly keeps the best remaining proposal and decays the
/// others by exp(-tiou^2 / sigma).
ProposalSet soft_nms(const ProposalSet& ps, const SoftNmsOpts& opts = {});

/// Moves `s` by (center shift dc * length, length scale exp(dl)), clamped to [0, clamp_to].
/// Spans shorter than clamp_to / 1000 are widened to that length.
Segment apply_offsets(const Segment& s, double dc, double dl, double clamp_to);

/// Same transform without clamping or widening.
Segment apply_offsets_unclamped(const Segment& s, double dc, double dl);

/// Affine head from a pooled RoI feature to (dc, dl, iou logit).
struct RefinerParams {
    int input_dim = 0;
    Matrix weights;  // 3 x input_dim
    std::array<double, 3> bias{};

    RefinerParams() = default;
    explicit RefinerParams(int dim) : input_dim(dim), weights(3, dim, 0.0) {}

    void validate() const;
};

struct RefinerOutput {
    double dc = 0.0;
    double dl = 0.0;
    double iou = 0.0;  // already squashed into [0, 1]
};

/// Any per-stage refinement model: one output per input proposal.
using Refiner = std::function<std::vector<RefinerOutput>(
    const ProposalSet&, const FeatureSequence&, const VideoRecord&)>;

struct PoolingOpts {
    int roi_bins = 16;
    double context_ratio = 0.5;
    int samples_per_bin = 4;

    int feature_dim(int channels) const { return channels * roi_bins + 2; }
};

enum class ScoreFusion { iou_only, multiply };

struct CascadeStage {
    Refiner refiner;
    double iou_threshold = 0.5;
};

struct CascadeConfig {
    std::vector<CascadeStage> stages;
    PoolingOpts pooling;
    ScoreFusion fusion = ScoreFusion::iou_only;
    // Proposals scoring below this after the last stage are dropped; negative keeps all.
    double min_score = -1.0;

    void validate() const;
};

inline constexpr std::array<double, 3> kDefaultStageThresholds{0.5, 0.6, 0.7};

double sigmoid(double x);
double logit(double p);

/// RoI features for one proposal: context-expanded RoI Align bins of every channel,
/// followed by the span's center and length as fractions of the video duration.
std::vector<double> pool_proposal(const Segment& s, const FeatureSequence& feats,
                                  const VideoRecord& video, const PoolingOpts& opts);

Refiner linear_refiner(RefinerParams params, PoolingOpts pooling);

ProposalSet refine_stage(const ProposalSet& ps, const Refiner& refiner,
                         const FeatureSequence& feats, const CascadeConfig& cfg,
                         const VideoRecord& video);

ProposalSet refine_stage(const ProposalSet& ps, const RefinerParams& params,
                         const FeatureSequence& feats, const CascadeConfig& cfg,
                         const VideoRecord& video);

/// Runs every stage in order and returns the last stage's proposals, sorted by score.
ProposalSet cascade_refine(const ProposalSet& ps, const CascadeConfig& cfg,
                           const FeatureSequence& feats, const VideoRecord& video);

struct RefinerSample {
    std::vector<double> features;
    double dc = 0.0;
    double dl = 0.0;
    double iou = 0.0;
    bool has_offset = true;  // offset rows are fitted on these samples only
};

/// Ridge least squares for the affine head. The bias is not penalised and the IoU
/// row is fitted against logit(clip(iou, 1e-4, 1 - 1e-4)).
RefinerParams fit_linear_refiner(std::span<const RefinerSample> samples, double ridge);

/// Training samples for one video and stage: positives carry offset targets toward
/// their matched ground truth, every proposal carries its best tIoU.
std::vector<RefinerSample> make_refiner_samples(const ProposalSet& ps,
                                                const FeatureSequence& feats,
                                                const VideoRecord& video,
                                                const PoolingOpts& pooling,
                                                double iou_threshold);

}  // namespace talon
