#include "talon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "talon/targets.hpp"

namespace talon {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

SynthRng::SynthRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag) {
    std::uint64_t x = seed;
    x ^= splitmix64(x) + stream * 0xd1b54a32d192ed03ULL;
    x ^= splitmix64(x) + tag * 0xabc98388fb8fac03ULL;
    for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t SynthRng::next_u64() {
    auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double SynthRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double SynthRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int SynthRng::uniform_int(int lo, int hi) {
    const double span = static_cast<double>(hi) - lo + 1.0;
    return lo + static_cast<int>(std::floor(uniform() * span));
}

double SynthRng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SynthRng::truncated_normal(double limit) {
    while (true) {
        const double x = normal();
        if (std::abs(x) <= limit) return x;
    }
}

void SynthConfig::validate() const {
    if (n_videos < 0) throw ContractError("synth: n_videos must be >= 0");
    if (n_classes < 1) throw ContractError("synth: n_classes must be >= 1");
    if (!(min_duration > 0.0) || !(max_duration >= min_duration)) {
        throw ContractError("synth: need 0 < min_duration <= max_duration");
    }
    if (min_actions < 1 || max_actions < min_actions) {
        throw ContractError("synth: need 1 <= min_actions <= max_actions");
    }
    if (!(boundary_noise >= 0.0) || !std::isfinite(boundary_noise) || !(map_noise >= 0.0) ||
        !std::isfinite(map_noise)) {
        throw ContractError("synth: noise levels must be finite and >= 0");
    }
    if (feature_channels < 1) throw ContractError("synth: feature_channels must be >= 1");
    if (align_grid != 0 && align_grid < 2 * max_actions) {
        throw ContractError("synth: align_grid must be 0 or at least twice max_actions");
    }
    if (!(training_fraction >= 0.0 && training_fraction <= 1.0)) {
        throw ContractError("synth: training_fraction must lie in [0, 1]");
    }
}

std::string synth_video_id(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "synth_%05d", index);
    return buf;
}

std::string synth_label(int class_id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "class_%03d", class_id);
    return buf;
}

AnnotationDb gen_annotations(const SynthConfig& cfg) {
    cfg.validate();
    AnnotationDb db;
    for (int c = 0; c < cfg.n_classes; ++c) db.labels.push_back(synth_label(c));

    for (int v = 0; v < cfg.n_videos; ++v) {
        SynthRng rng(cfg.seed, static_cast<std::uint64_t>(v), 0);
        VideoRecord rec;
        rec.video_id = synth_video_id(v);
        rec.duration = rng.uniform(cfg.min_duration, cfg.max_duration);
        const int n_actions = rng.uniform_int(cfg.min_actions, cfg.max_actions);
        const int cls = rng.uniform_int(0, cfg.n_classes - 1);
        rec.subset = rng.uniform() < cfg.training_fraction ? Subset::training : Subset::validation;

        const double slot = rec.duration / n_actions;
        for (int a = 0; a < n_actions; ++a) {
            const double len = rng.uniform(0.3, 0.9) * slot;
            double start = a * slot + rng.uniform() * (slot - len);
            double end = start + len;
            if (cfg.align_grid > 0) {
                const double unit = rec.duration / cfg.align_grid;
                const long si = std::lround(start / unit);
                const long ei = std::max(si + 1, std::lround(end / unit));
                start = static_cast<double>(si) / cfg.align_grid * rec.duration;
                end = static_cast<double>(ei) / cfg.align_grid * rec.duration;
            }
            rec.ground_truth.push_back({cls, Segment{start, std::min(end, rec.duration)}});
        }
        db.videos.emplace(rec.video_id, std::move(rec));
    }
    return db;
}

std::vector<Segment> jitter_segments(const VideoRecord& video, const GridSpec& spec,
                                     double boundary_noise, SynthRng& rng) {
    std::vector<Segment> out;
    const double unit = spec.unit();
    for (const auto& g : video.ground_truth) {
        Segment s = g.segment;
        if (boundary_noise > 0.0) {
            s.start += boundary_noise * unit * rng.normal();
            s.end += boundary_noise * unit * rng.normal();
            s.start = std::clamp(s.start, 0.0, video.duration - unit);
            s.end = std::clamp(s.end, s.start + unit, video.duration);
        }
        out.push_back(s);
    }
    return out;
}

namespace {

std::vector<float> smooth_labels(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<float> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = v[k];
        if (k > 0) acc += 0.5 * v[k - 1];
        if (k + 1 < n) acc += 0.5 * v[k + 1];
        out[k] = static_cast<float>(std::min(acc, 1.0));
    }
    return out;
}

float perturb(float x, double noise, SynthRng& rng) {
    if (noise <= 0.0) return x;
    const double y = x + noise * rng.truncated_normal(2.0);
    return static_cast<float>(std::clamp(y, 0.0, 1.0));
}

}  // namespace

ScoreBundle gen_bundle(const VideoRecord& video, const GridSpec& spec, double map_noise,
                       double boundary_noise, std::uint64_t seed) {
    spec.validate();
    SynthRng rng(seed, fnv1a64(video.video_id), 1);
    const auto gts = jitter_segments(video, spec, boundary_noise, rng);

    ScoreBundle b(spec.d);
    const auto bl = boundary_labels(gts, spec);
    b.start_prob = smooth_labels(bl.start);
    b.end_prob = smooth_labels(bl.end);
    const auto labels = bm_label_map(gts, spec);
    for (std::size_t k = 0; k < labels.data().size(); ++k) {
        b.map_a.data()[k] = static_cast<float>(labels.data()[k]);
    }
    b.map_b = b.map_a;

    if (map_noise > 0.0) {
        for (auto& x : b.start_prob) x = perturb(x, map_noise, rng);
        for (auto& x : b.end_prob) x = perturb(x, map_noise, rng);
        for (int i = 0; i < spec.d; ++i) {
            for (int d = 0; bm_cell_valid(i, d, spec.d); ++d) {
                b.map_a(i, d) = perturb(b.map_a(i, d), map_noise, rng);
                b.map_b(i, d) = perturb(b.map_b(i, d), map_noise, rng);
            }
        }
    }
    return b;
}

FeatureSequence gen_features(const VideoRecord& video, const SynthConfig& cfg) {
    const int t_len = feature_length_for(video.duration);
    FeatureSequence f(cfg.feature_channels, t_len);
    SynthRng rng(cfg.seed, fnv1a64(video.video_id), 2);

    std::map<int, std::vector<double>> prototypes;
    auto prototype = [&](int cls) -> const std::vector<double>& {
        auto it = prototypes.find(cls);
        if (it != prototypes.end()) return it->second;
        SynthRng prng(cfg.seed, static_cast<std::uint64_t>(cls), 3);
        std::vector<double> p(cfg.feature_channels);
        for (auto& x : p) x = prng.uniform(1.0, 2.0);
        return prototypes.emplace(cls, std::move(p)).first->second;
    };

    for (int t = 0; t < t_len; ++t) {
        const double center = (t + 0.5) / t_len * video.duration;
        const GroundTruth* inside = nullptr;
        for (const auto& g : video.ground_truth) {
            if (g.segment.start <= center && center < g.segment.end) {
                inside = &g;
                break;
            }
        }
        for (int c = 0; c < cfg.feature_channels; ++c) {
            const double v = inside ? prototype(inside->class_id)[c] + 0.5 * rng.normal()
                                    : rng.normal();
            f.at(c, t) = static_cast<float>(v);
        }
    }
    return f;
}

Refiner oracle_refiner(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("oracle_refiner: alpha must lie in [0, 1]");
    return [alpha](const ProposalSet& ps, const FeatureSequence&, const VideoRecord& video) {
        const auto gts = video.segments();
        std::vector<RefinerOutput> out;
        out.reserve(ps.size());
        for (const auto& p : ps) {
            const auto m = best_match(p.segment, gts);
            if (!m || m->second <= 0.0) {
                out.push_back({0.0, 0.0, m ? m->second : 0.0});
                continue;
            }
            const auto off = offset_targets(p.segment, gts[m->first]);
            RefinerOutput o{alpha * off.dc, alpha * off.dl, 0.0};
            const Segment moved = apply_offsets(p.segment, o.dc, o.dl, video.duration);
            o.iou = best_match(moved, gts)->second;
            out.push_back(o);
        }
        return out;
    };
}

SynthData gen_dataset(const SynthConfig& cfg, int grid, bool with_features) {
    SynthData out;
    out.db = gen_annotations(cfg);
    for (const auto& [id, v] : out.db.videos) {
        out.bundles.emplace(id, gen_bundle(v, GridSpec{grid, v.duration}, cfg.map_noise,
                                           cfg.boundary_noise, cfg.seed));
        if (with_features) out.features.emplace(id, gen_features(v, cfg));
    }
    return out;
}

}  // namespace talon
