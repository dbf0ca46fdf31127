#include "talon/decode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "talon/targets.hpp"

namespace talon {

ScoreBundle::ScoreBundle(int grid, BundleKind k)
    : d(grid),
      kind(k),
      start_prob(grid, 0.0f),
      end_prob(grid, 0.0f),
      map_a(grid, grid, 0.0f),
      map_b(grid, grid, 0.0f) {}

void ScoreBundle::validate() const {
    if (d < 1) throw FormatError("score bundle: D must be >= 1");
    const auto ud = static_cast<std::size_t>(d);
    if (start_prob.size() != ud || end_prob.size() != ud || map_a.rows() != ud ||
        map_a.cols() != ud || map_b.rows() != ud || map_b.cols() != ud) {
        std::ostringstream msg;
        msg << "score bundle: fields disagree on D (start " << start_prob.size() << ", end "
            << end_prob.size() << ", map_a " << map_a.rows() << "x" << map_a.cols() << ", map_b "
            << map_b.rows() << "x" << map_b.cols() << ", D " << d << ")";
        throw FormatError(msg.str());
    }
    auto check = [](const std::vector<float>& v, const char* name) {
        for (float x : v) {
            if (!(x >= 0.0f && x <= 1.0f)) {
                throw FormatError(std::string("score bundle: ") + name + " value outside [0, 1]");
            }
        }
    };
    check(start_prob, "start");
    check(end_prob, "end");
    check(map_a.data(), "map_a");
    check(map_b.data(), "map_b");
}

double fuse_confidence(double ps, double pe, double ma, double mb, double gamma) {
    return ps * pe * std::pow(ma * mb, gamma);
}

std::vector<bool> boundary_peaks(const std::vector<float>& v) {
    const std::size_t n = v.size();
    std::vector<bool> peaks(n, false);
    if (n == 0) return peaks;
    const float half_max = 0.5f * *std::max_element(v.begin(), v.end());
    for (std::size_t k = 0; k < n; ++k) {
        const bool above_left = k == 0 || v[k] > v[k - 1];
        const bool above_right = k + 1 == n || v[k] > v[k + 1];
        peaks[k] = (above_left && above_right) || v[k] > half_max;
    }
    return peaks;
}

ProposalSet decode_proposals(const ScoreBundle& bundle, const VideoRecord& video,
                             const DecodeOpts& opts) {
    bundle.validate();
    if (opts.max_candidates < 1) throw ContractError("decode: max_candidates must be >= 1");
    const int grid = bundle.d;
    const GridSpec spec{grid, video.duration};
    spec.validate();

    std::vector<bool> start_ok(grid, true);
    std::vector<bool> end_ok(grid, true);
    if (opts.peaks_only) {
        start_ok = boundary_peaks(bundle.start_prob);
        end_ok = boundary_peaks(bundle.end_prob);
    }

    ProposalSet out;
    for (int i = 0; i < grid; ++i) {
        if (!start_ok[i]) continue;
        for (int d = 0; bm_cell_valid(i, d, grid); ++d) {
            const int end_idx = std::min(i + d + 1, grid - 1);
            if (!end_ok[end_idx]) continue;
            const double score =
                fuse_confidence(bundle.start_prob[i], bundle.end_prob[end_idx], bundle.map_a(i, d),
                                bundle.map_b(i, d), opts.gamma);
            if (score < opts.min_score) continue;
            out.push_back(Proposal{grid_to_segment(i, i + d + 1, spec), score, std::nullopt, 0});
        }
    }
    sort_by_score(out);
    if (out.size() > static_cast<std::size_t>(opts.max_candidates)) {
        out.resize(opts.max_candidates);
    }
    return out;
}

}  // namespace talon
