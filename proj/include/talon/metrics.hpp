#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "talon/core.hpp"

namespace talon {

/// 0.50, 0.55, ..., 0.95
std::vector<double> default_tiou_grid();

/// Ground truths recalled by greedy one-to-one matching, in descending score order:
/// each proposal takes the unmatched ground truth of highest tIoU >= threshold
/// (ties to the earlier index). Entry k is the number of matches among the first
/// k + 1 proposals.
std::vector<int> greedy_recall_prefix(const ProposalSet& ranked, std::span<const Segment> gts,
                                      double threshold);

double average_recall_at(const VideoProposals& proposals, const AnnotationDb& db, int an,
                         std::span<const double> tious);

enum class AucMode {
    trapezoid,  // trapezoid over AN = 1..max_an divided by (max_an - 1)
    mean,       // plain mean of AR over AN = 1..max_an
};

struct ArCurve {
    std::vector<double> ar;  // ar[n] = AR@(n + 1)
    double auc = 0.0;        // percent
};

ArCurve ar_an_auc(const VideoProposals& proposals, const AnnotationDb& db, int max_an,
                  std::span<const double> tious, AucMode mode = AucMode::trapezoid);

/// Interpolated AP: precision envelope made non-increasing, integrated over recall.
double interpolated_ap(std::span<const double> precision, std::span<const double> recall);

struct DetectionMap {
    std::vector<double> tious;
    std::vector<int> classes;             // classes with at least one ground truth
    std::vector<std::vector<double>> ap;  // ap[tiou index][class index]
    std::vector<double> map_at;           // mean over classes per tIoU
    double mean_map = 0.0;
};

DetectionMap detection_map(const VideoProposals& detections, const AnnotationDb& db,
                           std::span<const double> tious);

double topk_accuracy(const std::vector<std::vector<int>>& predictions, std::span<const int> labels,
                     int k);

/// Every number reported for a run. Rate fields are fractions; auc is in percent.
struct EvalReport {
    std::map<int, double> ar_at;
    std::vector<double> ar_curve;
    double auc = 0.0;
    bool has_map = false;
    std::map<int, double> ap_per_class;  // averaged over tIoU thresholds
    std::vector<double> map_at_tiou;
    std::vector<double> tious;
    double mean_map = 0.0;
    bool has_topk = false;
    double top1 = 0.0;
    double top5 = 0.0;
};

struct EvalOpts {
    std::vector<double> tious = default_tiou_grid();
    int max_an = 100;
    AucMode auc_mode = AucMode::trapezoid;
    std::vector<int> report_an = {1, 5, 10, 100};
};

/// AR@AN, AUC and, when every proposal carries a class, detection mAP.
EvalReport evaluate(const VideoProposals& proposals, const AnnotationDb& db,
                    const EvalOpts& opts = {});

}  // namespace talon
