#pragma once

#include <vector>

#include "talon/core.hpp"

namespace talon {

enum class BundleKind : unsigned char { prediction = 0, label = 1 };

/// Per-video boundary-matching outputs: start/end probabilities over D cells and
/// two D x D confidence maps indexed (start, duration - 1). Stored as float32, the
/// on-disk precision, so containers round-trip exactly.
struct ScoreBundle {
    int d = 0;
    BundleKind kind = BundleKind::prediction;
    std::vector<float> start_prob;
    std::vector<float> end_prob;
    Grid2D<float> map_a;
    Grid2D<float> map_b;

    ScoreBundle() = default;
    explicit ScoreBundle(int grid, BundleKind k = BundleKind::prediction);

    /// Throws FormatError on shape mismatch or values outside [0, 1].
    void validate() const;

    friend bool operator==(const ScoreBundle&, const ScoreBundle&) = default;
};

struct DecodeOpts {
    int max_candidates = 1000;
    double min_score = 0.0;
    bool peaks_only = false;
    double gamma = 0.5;
};

/// ps * pe * (ma * mb)^gamma
double fuse_confidence(double ps, double pe, double ma, double mb, double gamma = 0.5);

/// Peak positions: strictly above both neighbours, or above half the vector maximum.
std::vector<bool> boundary_peaks(const std::vector<float>& v);

ProposalSet decode_proposals(const ScoreBundle& bundle, const VideoRecord& video,
                             const DecodeOpts& opts = {});

}  // namespace talon
