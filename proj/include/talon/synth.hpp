#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "talon/core.hpp"
#include "talon/decode.hpp"
#include "talon/numerics.hpp"
#include "talon/postprocess.hpp"

namespace talon {

/// xoshiro256** seeded from (seed, stream, tag) through splitmix64. Distributions are
/// written out here so draws do not depend on the standard library implementation.
class SynthRng {
public:
    SynthRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag);

    std::uint64_t next_u64();
    double uniform();                          // [0, 1)
    double uniform(double lo, double hi);      // [lo, hi)
    int uniform_int(int lo, int hi);           // inclusive
    double normal();                           // Box-Muller, one draw per call
    double truncated_normal(double limit);     // N(0, 1) conditioned on |x| <= limit

private:
    std::uint64_t state_[4];
};

std::uint64_t splitmix64(std::uint64_t& x);
std::uint64_t fnv1a64(const std::string& s);

struct SynthConfig {
    std::uint64_t seed = 42;
    int n_videos = 100;
    int n_classes = 20;
    double min_duration = 30.0;
    double max_duration = 180.0;
    int min_actions = 1;
    int max_actions = 3;
    double boundary_noise = 0.0;  // endpoint jitter std, grid units
    double map_noise = 0.0;       // additive bundle noise std
    int feature_channels = 8;
    int align_grid = 200;         // snap endpoints to this grid; 0 keeps them continuous
    double training_fraction = 0.5;

    void validate() const;
};

std::string synth_video_id(int index);
std::string synth_label(int class_id);

/// Each video gets one class and 1..n non-overlapping actions, one per equal slot.
AnnotationDb gen_annotations(const SynthConfig& cfg);

/// Bundle whose noise-free decode recovers the ground truth: smoothed boundary labels
/// and tIoU label maps built from jittered segments, plus clamped truncated-Gaussian noise.
ScoreBundle gen_bundle(const VideoRecord& video, const GridSpec& spec, double map_noise,
                       double boundary_noise, std::uint64_t seed);

/// Ground-truth segments after the endpoint jitter gen_bundle applies.
std::vector<Segment> jitter_segments(const VideoRecord& video, const GridSpec& spec,
                                     double boundary_noise, SynthRng& rng);

/// C x round(2t) features: class prototype plus noise inside actions, N(0, 1) elsewhere.
FeatureSequence gen_features(const VideoRecord& video, const SynthConfig& cfg);

/// Moves each overlapping proposal a fraction alpha of the way, in offset space,
/// toward its best-tIoU ground truth and reports the resulting tIoU.
Refiner oracle_refiner(double alpha);

struct SynthData {
    AnnotationDb db;
    std::map<std::string, ScoreBundle> bundles;
    std::map<std::string, FeatureSequence> features;
};

SynthData gen_dataset(const SynthConfig& cfg, int grid, bool with_features = true);

}  // namespace talon
