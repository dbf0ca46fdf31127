#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "talon/core.hpp"
#include "talon/decode.hpp"
#include "talon/io.hpp"
#include "talon/numerics.hpp"
#include "talon/postprocess.hpp"

namespace talon {

// Whole-database versions of the per-video stages. Videos run in parallel; results
// are keyed by id, so the output does not depend on `jobs`.

VideoProposals decode_all(const AnnotationDb& db, const std::map<std::string, ScoreBundle>& bundles,
                          const DecodeOpts& opts, int jobs = 1);

VideoProposals soft_nms_all(const VideoProposals& sets, const SoftNmsOpts& opts, int jobs = 1);

VideoProposals cascade_all(const VideoProposals& sets, const AnnotationDb& db,
                           const std::map<std::string, FeatureSequence>& features,
                           const CascadeConfig& cfg, int jobs = 1);

/// Labels every proposal of a video with the class of its first ground truth.
/// Videos without ground truth keep unlabelled proposals.
VideoProposals assign_annotation_classes(const VideoProposals& sets, const AnnotationDb& db);

/// Labels every proposal of a video with a given class.
VideoProposals assign_video_classes(const VideoProposals& sets, const std::map<std::string, int>& cls);

/// Fits one ridge head per stage on the videos of `db`, feeding each stage the
/// previous stage's refined proposals, as the cascade sees them at inference.
LinearCascade fit_linear_cascade(const VideoProposals& sets, const AnnotationDb& db,
                                 const std::map<std::string, FeatureSequence>& features,
                                 const PoolingOpts& pooling, std::span<const double> thresholds,
                                 double ridge, ScoreFusion fusion = ScoreFusion::iou_only);

CascadeConfig cascade_config(const LinearCascade& c, ScoreFusion fusion = ScoreFusion::iou_only);

/// One oracle refiner stage per threshold.
CascadeConfig oracle_cascade(double alpha, std::span<const double> thresholds,
                             ScoreFusion fusion = ScoreFusion::iou_only);

}  // namespace talon
