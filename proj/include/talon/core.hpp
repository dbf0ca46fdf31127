#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "talon/errors.hpp"

namespace talon {

/// Temporal interval in seconds, treated as half-open [start, end).
struct Segment {
    double start = 0.0;
    double end = 0.0;

    double length() const { return end - start; }
    double center() const { return 0.5 * (start + end); }
    bool valid() const;

    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Throws ContractError unless the segment is finite with end > start.
void require_valid(const Segment& s, const char* what = "segment");

struct Proposal {
    Segment segment;
    double score = 0.0;
    std::optional<int> class_id;
    int stage = 0;  // 0 = raw decode, k = after k-th refine stage

    friend bool operator==(const Proposal&, const Proposal&) = default;
};

using ProposalSet = std::vector<Proposal>;

/// Proposal sets keyed by video id; std::map gives the sorted-id merge order.
using VideoProposals = std::map<std::string, ProposalSet>;

/// Score descending, then (start, end) ascending.
bool ranks_before(const Proposal& a, const Proposal& b);
void sort_by_score(ProposalSet& ps);

enum class Subset { training, validation, testing };

const char* to_string(Subset s);
Subset parse_subset(const std::string& s);

struct GroundTruth {
    int class_id = 0;
    Segment segment;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct VideoRecord {
    std::string video_id;
    double duration = 0.0;
    Subset subset = Subset::training;
    std::vector<GroundTruth> ground_truth;

    std::vector<Segment> segments() const;

    friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

struct AnnotationDb {
    std::map<std::string, VideoRecord> videos;
    std::vector<std::string> labels;  // class_id -> label string

    std::size_t n_classes() const { return labels.size(); }
    std::size_t n_instances() const;

    AnnotationDb filtered(Subset s) const;

    friend bool operator==(const AnnotationDb&, const AnnotationDb&) = default;
};

/// Temporal grid of `d` cells laid over a video of `duration` seconds.
struct GridSpec {
    int d = 0;
    double duration = 0.0;

    double unit() const { return duration / d; }
    void validate() const;
};

/// Dense row-major 2-D array.
template <class T>
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Matrix = Grid2D<double>;

double tiou(const Segment& a, const Segment& b);

/// Cell range [i, j) of the grid in seconds.
Segment grid_to_segment(int i, int j, const GridSpec& spec);

/// Fractional grid coordinates of `s` after clamping it to [0, duration].
std::pair<double, double> segment_to_grid(const Segment& s, const GridSpec& spec);

/// Feature sequence length for a video: round(2t) with half-away-from-zero, at least 2.
int feature_length_for(double duration);

/// Clamps to [0, duration]; returns nullopt when nothing of positive length remains.
std::optional<Segment> clamp_segment(const Segment& s, double duration);

}  // namespace talon
