#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "talon/decode.hpp"
#include "talon/errors.hpp"
#include "talon/synth.hpp"
#include "talon/targets.hpp"

using namespace talon;

namespace {
VideoRecord video_of(double duration) { return VideoRecord{"v", duration, Subset::validation, {}}; }
}  // namespace

TEST(FuseConfidence, Examples) {
    EXPECT_EQ(fuse_confidence(1, 1, 1, 1), 1.0);
    EXPECT_EQ(fuse_confidence(0.3, 0.7, 0.0, 0.9), 0.0);
    EXPECT_EQ(fuse_confidence(0.3, 0.7, 0.4, 0.0), 0.0);
    EXPECT_NEAR(fuse_confidence(0.8, 0.9, 0.5, 0.5, 0.5), 0.36, 1e-15);
}

TEST(Decode, AllZeroBundle) {
    const ScoreBundle b(8);
    DecodeOpts keep_all;
    const auto all = decode_proposals(b, video_of(10), keep_all);
    EXPECT_EQ(all.size(), 36u);
    for (const auto& p : all) EXPECT_EQ(p.score, 0.0);
    DecodeOpts strict;
    strict.min_score = 1e-6;
    EXPECT_TRUE(decode_proposals(b, video_of(10), strict).empty());
}

TEST(Decode, DeltaBundleGivesOneProposal) {
    const int D = 12;
    for (auto [i, j] : {std::pair{2, 7}, std::pair{0, 1}, std::pair{5, 12}, std::pair{0, 12}}) {
        ScoreBundle b(D);
        b.start_prob[i] = 1.0f;
        b.end_prob[std::min(j, D - 1)] = 1.0f;
        b.map_a(i, j - i - 1) = 1.0f;
        b.map_b(i, j - i - 1) = 1.0f;
        DecodeOpts opts;
        opts.min_score = 0.5;
        const auto ps = decode_proposals(b, video_of(36), opts);
        ASSERT_EQ(ps.size(), 1u) << i << "," << j;
        EXPECT_EQ(ps[0].segment, grid_to_segment(i, j, GridSpec{D, 36}));
        EXPECT_EQ(ps[0].score, 1.0);
        EXPECT_EQ(ps[0].stage, 0);
        EXPECT_FALSE(ps[0].class_id.has_value());
    }
}

TEST(Decode, MatchesExhaustiveReference) {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 50; ++k) {
        const ScoreBundle b = oracle::random_bundle(8, rng);
        DecodeOpts opts;
        opts.min_score = k % 2 ? 0.01 : 0.0;
        const auto got = decode_proposals(b, video_of(17.5), opts);
        const auto want = oracle::decode(b, 17.5, opts.min_score, opts.gamma, 1000);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t j = 0; j < got.size(); ++j) {
            EXPECT_NEAR(got[j].score, want[j].score, 1e-12);
            EXPECT_NEAR(got[j].segment.start, want[j].segment.start, 1e-12);
            EXPECT_NEAR(got[j].segment.end, want[j].segment.end, 1e-12);
        }
    }
}

TEST(Decode, TruncatesAndStaysInsideVideo) {
    std::mt19937_64 rng(7);
    const ScoreBundle b = oracle::random_bundle(16, rng);
    DecodeOpts opts;
    opts.max_candidates = 10;
    const auto ps = decode_proposals(b, video_of(40), opts);
    ASSERT_EQ(ps.size(), 10u);
    for (std::size_t k = 0; k < ps.size(); ++k) {
        EXPECT_GE(ps[k].segment.start, 0.0);
        EXPECT_LT(ps[k].segment.start, ps[k].segment.end);
        EXPECT_LE(ps[k].segment.end, 40.0);
        if (k) EXPECT_GE(ps[k - 1].score, ps[k].score);
    }
}

TEST(Decode, RaisingAMapCellNeverLowersItsScore) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 20; ++k) {
        ScoreBundle b = oracle::random_bundle(6, rng);
        const int i = k % 5, d = 0;
        auto score_of = [&](const ScoreBundle& x) {
            for (const auto& p : decode_proposals(x, video_of(6))) {
                if (p.segment == grid_to_segment(i, i + d + 1, GridSpec{6, 6})) return p.score;
            }
            return -1.0;
        };
        const double before = score_of(b);
        b.map_a(i, d) = std::min(1.0f, b.map_a(i, d) + 0.3f);
        EXPECT_GE(score_of(b), before);
    }
}

TEST(Decode, PeaksOnlyRestrictsBoundaries) {
    const std::vector<float> v{0.1f, 0.3f, 0.2f, 0.05f, 0.9f, 0.0f};
    const auto peaks = boundary_peaks(v);
    const std::vector<bool> want{false, true, false, false, true, false};
    EXPECT_EQ(peaks, want);

    std::mt19937_64 rng(9);
    const ScoreBundle b = oracle::random_bundle(10, rng);
    DecodeOpts opts;
    opts.peaks_only = true;
    const auto ps = decode_proposals(b, video_of(10), opts);
    const auto sp = boundary_peaks(b.start_prob);
    const auto ep = boundary_peaks(b.end_prob);
    for (const auto& p : ps) {
        const int i = static_cast<int>(std::lround(p.segment.start));
        const int j = static_cast<int>(std::lround(p.segment.end));
        EXPECT_TRUE(sp[i]);
        EXPECT_TRUE(ep[std::min(j, 9)]);
    }
    EXPECT_LT(ps.size(), decode_proposals(b, video_of(10)).size());
}

TEST(Decode, NoiseFreeSyntheticBundleRecoversGroundTruth) {
    SynthConfig cfg;
    cfg.n_videos = 30;
    cfg.align_grid = 100;
    const auto data = gen_dataset(cfg, 100, false);
    for (const auto& [id, v] : data.db.videos) {
        const auto ps = decode_proposals(data.bundles.at(id), v);
        const auto gts = v.segments();
        for (std::size_t k = 0; k < gts.size(); ++k) {
            EXPECT_GE(best_match(ps[k].segment, gts)->second, 1.0 - 2.0 / 100) << id;
        }
    }
}

TEST(Decode, RejectsMalformedBundles) {
    ScoreBundle b(4);
    b.start_prob[1] = 1.5f;
    EXPECT_THROW(decode_proposals(b, video_of(4)), FormatError);
    ScoreBundle c(4);
    c.end_prob.pop_back();
    EXPECT_THROW(decode_proposals(c, video_of(4)), FormatError);
    ScoreBundle d(1);
    EXPECT_THROW(decode_proposals(d, video_of(4)), ContractError);
}
