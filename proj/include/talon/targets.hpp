#pragma once

#include <optional>
#include <span>
#include <vector>

#include "talon/core.hpp"

namespace talon {

/// D x D map indexed (start cell, duration - 1). Cells with start + duration > D hold 0.
using BmLabelMap = Matrix;

/// True when cell (start i, duration index d) describes a span inside the grid.
inline bool bm_cell_valid(int i, int d, int grid) { return i + d + 1 <= grid; }

struct BoundaryLabels {
    std::vector<double> start;
    std::vector<double> end;
};

struct OffsetTarget {
    double dc = 0.0;  // center shift in units of proposal length
    double dl = 0.0;  // log length ratio
};

struct StageAssignment {
    int proposal_index = 0;
    bool is_positive = false;
    std::optional<int> matched_gt;
    double target_iou = 0.0;
    std::optional<OffsetTarget> offset_target;
};

/// Best-matching ground truth by tIoU, ties to the earlier index; nullopt if `gts` is empty.
std::optional<std::pair<int, double>> best_match(const Segment& p, std::span<const Segment> gts);

BmLabelMap bm_label_map(std::span<const Segment> gts, const GridSpec& spec);

BoundaryLabels boundary_labels(std::span<const Segment> gts, const GridSpec& spec,
                               double expand_ratio = 0.1);

std::vector<double> action_score_labels(std::span<const Segment> gts, const GridSpec& spec);

OffsetTarget offset_targets(const Segment& p, const Segment& gt);

std::vector<StageAssignment> cascade_assign(const ProposalSet& proposals,
                                            std::span<const Segment> gts,
                                            double iou_threshold);

}  // namespace talon
