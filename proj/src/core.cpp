#include "talon/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace talon {

bool Segment::valid() const {
    return std::isfinite(start) && std::isfinite(end) && end > start;
}

void require_valid(const Segment& s, const char* what) {
    if (!s.valid()) {
        std::ostringstream msg;
        msg << "invalid " << what << " [" << s.start << ", " << s.end << "]";
        throw ContractError(msg.str());
    }
}

bool ranks_before(const Proposal& a, const Proposal& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.segment.start != b.segment.start) return a.segment.start < b.segment.start;
    return a.segment.end < b.segment.end;
}

void sort_by_score(ProposalSet& ps) {
    std::stable_sort(ps.begin(), ps.end(), ranks_before);
}

const char* to_string(Subset s) {
    switch (s) {
        case Subset::training: return "training";
        case Subset::validation: return "validation";
        case Subset::testing: return "testing";
    }
    return "training";
}

Subset parse_subset(const std::string& s) {
    if (s == "training") return Subset::training;
    if (s == "validation") return Subset::validation;
    if (s == "testing") return Subset::testing;
    throw ValidationError("unknown subset '" + s + "'");
}

std::vector<Segment> VideoRecord::segments() const {
    std::vector<Segment> out;
    out.reserve(ground_truth.size());
    for (const auto& g : ground_truth) out.push_back(g.segment);
    return out;
}

std::size_t AnnotationDb::n_instances() const {
    std::size_t n = 0;
    for (const auto& [id, v] : videos) n += v.ground_truth.size();
    return n;
}

AnnotationDb AnnotationDb::filtered(Subset s) const {
    AnnotationDb out;
    out.labels = labels;
    for (const auto& [id, v] : videos) {
        if (v.subset == s) out.videos.emplace(id, v);
    }
    return out;
}

void GridSpec::validate() const {
    if (d < 2) throw ContractError("grid length d must be >= 2, got " + std::to_string(d));
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw ContractError("grid duration must be positive and finite");
    }
}

double tiou(const Segment& a, const Segment& b) {
    require_valid(a);
    require_valid(b);
    const double inter = std::min(a.end, b.end) - std::max(a.start, b.start);
    if (inter <= 0.0) return 0.0;
    const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
    return std::min(1.0, inter / uni);
}

Segment grid_to_segment(int i, int j, const GridSpec& spec) {
    spec.validate();
    if (i < 0 || j > spec.d || i >= j) {
        std::ostringstream msg;
        msg << "grid cell (" << i << ", " << j << ") outside 0 <= i < j <= " << spec.d;
        throw ContractError(msg.str());
    }
    const double d = spec.d;
    return Segment{i / d * spec.duration, j / d * spec.duration};
}

std::pair<double, double> segment_to_grid(const Segment& s, const GridSpec& spec) {
    spec.validate();
    require_valid(s);
    const double lo = std::clamp(s.start, 0.0, spec.duration);
    const double hi = std::clamp(s.end, 0.0, spec.duration);
    return {lo / spec.duration * spec.d, hi / spec.duration * spec.d};
}

int feature_length_for(double duration) {
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw ContractError("duration must be positive and finite");
    }
    const long t = std::lround(2.0 * duration);
    return static_cast<int>(std::max(2L, t));
}

std::optional<Segment> clamp_segment(const Segment& s, double duration) {
    if (!std::isfinite(s.start) || !std::isfinite(s.end)) return std::nullopt;
    Segment out{std::clamp(s.start, 0.0, duration), std::clamp(s.end, 0.0, duration)};
    if (!(out.end > out.start)) return std::nullopt;
    return out;
}

}  // namespace talon
