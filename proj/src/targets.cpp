#include "talon/targets.hpp"

#include <algorithm>
#include <cmath>

namespace talon {

std::optional<std::pair<int, double>> best_match(const Segment& p, std::span<const Segment> gts) {
    if (gts.empty()) return std::nullopt;
    int best = 0;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const double iou = tiou(p, gts[g]);
        if (iou > best_iou) {
            best_iou = iou;
            best = static_cast<int>(g);
        }
    }
    return std::make_pair(best, best_iou);
}

BmLabelMap bm_label_map(std::span<const Segment> gts, const GridSpec& spec) {
    spec.validate();
    BmLabelMap out(spec.d, spec.d, 0.0);
    if (gts.empty()) return out;
    for (int i = 0; i < spec.d; ++i) {
        for (int d = 0; bm_cell_valid(i, d, spec.d); ++d) {
            const Segment cell = grid_to_segment(i, i + d + 1, spec);
            double best = 0.0;
            for (const auto& g : gts) best = std::max(best, tiou(cell, g));
            out(i, d) = best;
        }
    }
    return out;
}

namespace {

// Marks cells overlapping [center - r, center + r] by more than half a cell.
// Everything is in grid units.
void mark_boundary(std::vector<double>& labels, double center, double r) {
    const int grid = static_cast<int>(labels.size());
    const double lo = center - r;
    const double hi = center + r;
    const int first = std::max(0, static_cast<int>(std::floor(lo)));
    const int last = std::min(grid - 1, static_cast<int>(std::ceil(hi)));
    for (int k = first; k <= last; ++k) {
        const double overlap = std::min(hi, k + 1.0) - std::max(lo, static_cast<double>(k));
        if (overlap > 0.5) labels[k] = 1.0;
    }
}

}  // namespace

BoundaryLabels boundary_labels(std::span<const Segment> gts, const GridSpec& spec,
                               double expand_ratio) {
    spec.validate();
    if (!(expand_ratio > 0.0)) throw ContractError("boundary_labels: expand_ratio must be > 0");
    BoundaryLabels out{std::vector<double>(spec.d, 0.0), std::vector<double>(spec.d, 0.0)};
    for (const auto& g : gts) {
        const auto [gs, ge] = segment_to_grid(g, spec);
        const double r = std::max(expand_ratio * (ge - gs), 1.0);
        mark_boundary(out.start, gs, r);
        mark_boundary(out.end, ge, r);
    }
    return out;
}

std::vector<double> action_score_labels(std::span<const Segment> gts, const GridSpec& spec) {
    spec.validate();
    std::vector<double> out(spec.d, 0.0);
    for (int k = 0; k < spec.d; ++k) {
        const double c = (k + 0.5) / spec.d * spec.duration;
        for (const auto& g : gts) {
            if (g.start <= c && c < g.end) {
                out[k] = 1.0;
                break;
            }
        }
    }
    return out;
}

OffsetTarget offset_targets(const Segment& p, const Segment& gt) {
    require_valid(p, "proposal");
    require_valid(gt, "ground truth");
    const double pl = p.length();
    return {(gt.center() - p.center()) / pl, std::log(gt.length() / pl)};
}

std::vector<StageAssignment> cascade_assign(const ProposalSet& proposals,
                                            std::span<const Segment> gts,
                                            double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw ContractError("cascade_assign: threshold must lie in (0, 1)");
    }
    std::vector<StageAssignment> out;
    out.reserve(proposals.size());
    for (std::size_t k = 0; k < proposals.size(); ++k) {
        StageAssignment a;
        a.proposal_index = static_cast<int>(k);
        if (auto m = best_match(proposals[k].segment, gts)) {
            a.matched_gt = m->first;
            a.target_iou = m->second;
            a.is_positive = m->second >= iou_threshold;
            if (a.is_positive) {
                a.offset_target = offset_targets(proposals[k].segment, gts[m->first]);
            }
        }
        out.push_back(a);
    }
    return out;
}

}  // namespace talon
