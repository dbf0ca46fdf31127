#include "talon/postprocess.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "talon/targets.hpp"

namespace talon {

ProposalSet soft_nms(const ProposalSet& ps, const SoftNmsOpts& opts) {
    if (!(opts.sigma > 0.0)) throw ContractError("soft_nms: sigma must be > 0");
    if (opts.top_k < 1) throw ContractError("soft_nms: top_k must be >= 1");

    ProposalSet pool = ps;
    ProposalSet kept;
    std::vector<bool> taken(pool.size(), false);
    while (kept.size() < static_cast<std::size_t>(opts.top_k)) {
        int best = -1;
        for (std::size_t k = 0; k < pool.size(); ++k) {
            if (taken[k]) continue;
            if (best < 0 || ranks_before(pool[k], pool[best])) best = static_cast<int>(k);
        }
        if (best < 0 || pool[best].score < opts.min_score) break;
        taken[best] = true;
        kept.push_back(pool[best]);
        const Segment& sel = pool[best].segment;
        for (std::size_t k = 0; k < pool.size(); ++k) {
            if (taken[k]) continue;
            const double iou = tiou(sel, pool[k].segment);
            if (iou > 0.0) pool[k].score *= std::exp(-iou * iou / opts.sigma);
        }
    }
    sort_by_score(kept);
    return kept;
}

Segment apply_offsets_unclamped(const Segment& s, double dc, double dl) {
    require_valid(s);
    const double pl = s.length();
    const double center = s.center() + dc * pl;
    const double half = 0.5 * pl * std::exp(dl);
    return {center - half, center + half};
}

Segment apply_offsets(const Segment& s, double dc, double dl, double clamp_to) {
    if (!(clamp_to > 0.0)) throw ContractError("apply_offsets: clamp_to must be > 0");
    const Segment raw = apply_offsets_unclamped(s, dc, dl);
    double lo = std::clamp(raw.start, 0.0, clamp_to);
    double hi = std::clamp(raw.end, 0.0, clamp_to);
    const double eps = clamp_to / 1000.0;
    if (!(hi - lo >= eps)) {
        const double c = std::clamp(0.5 * (lo + hi), 0.5 * eps, clamp_to - 0.5 * eps);
        lo = c - 0.5 * eps;
        hi = c + 0.5 * eps;
    }
    return {lo, hi};
}

void RefinerParams::validate() const {
    if (input_dim < 1 || weights.rows() != 3 ||
        weights.cols() != static_cast<std::size_t>(input_dim)) {
        throw FormatError("refiner params: weights must be 3 x input_dim");
    }
    for (double w : weights.data()) {
        if (!std::isfinite(w)) throw FormatError("refiner params: non-finite weight");
    }
    for (double b : bias) {
        if (!std::isfinite(b)) throw FormatError("refiner params: non-finite bias");
    }
}

void CascadeConfig::validate() const {
    if (pooling.roi_bins < 1) throw ContractError("cascade: roi_bins must be >= 1");
    if (pooling.samples_per_bin < 1) throw ContractError("cascade: samples_per_bin must be >= 1");
    if (!(pooling.context_ratio >= 0.0)) throw ContractError("cascade: context_ratio must be >= 0");
    for (std::size_t k = 0; k < stages.size(); ++k) {
        if (!stages[k].refiner) throw ContractError("cascade: stage without a refiner");
        if (k > 0 && !(stages[k].iou_threshold > stages[k - 1].iou_threshold)) {
            throw ContractError("cascade: stage thresholds must be strictly increasing");
        }
    }
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

std::vector<double> pool_proposal(const Segment& s, const FeatureSequence& feats,
                                  const VideoRecord& video, const PoolingOpts& opts) {
    require_valid(s, "proposal");
    const double len = s.length();
    const double scale = feats.length / video.duration;
    const RoiRegion region{(s.start - opts.context_ratio * len) * scale,
                           (s.end + opts.context_ratio * len) * scale};
    std::vector<double> out = roi_align_1d(feats, region, opts.roi_bins, opts.samples_per_bin);
    out.push_back(s.center() / video.duration);
    out.push_back(len / video.duration);
    return out;
}

Refiner linear_refiner(RefinerParams params, PoolingOpts pooling) {
    params.validate();
    return [params = std::move(params), pooling](const ProposalSet& ps,
                                                  const FeatureSequence& feats,
                                                  const VideoRecord& video) {
        if (pooling.feature_dim(feats.channels) != params.input_dim) {
            std::ostringstream msg;
            msg << "refiner expects " << params.input_dim << " inputs but " << feats.channels
                << " channels x " << pooling.roi_bins << " bins + 2 = "
                << pooling.feature_dim(feats.channels);
            throw FormatError(msg.str());
        }
        std::vector<RefinerOutput> out;
        out.reserve(ps.size());
        for (const auto& p : ps) {
            const auto x = pool_proposal(p.segment, feats, video, pooling);
            std::array<double, 3> y = params.bias;
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < params.input_dim; ++c) y[r] += params.weights(r, c) * x[c];
            }
            out.push_back({y[0], y[1], sigmoid(y[2])});
        }
        return out;
    };
}

ProposalSet refine_stage(const ProposalSet& ps, const Refiner& refiner,
                         const FeatureSequence& feats, const CascadeConfig& cfg,
                         const VideoRecord& video) {
    if (!refiner) throw ContractError("refine_stage: empty refiner");
    if (ps.empty()) return {};
    const auto outputs = refiner(ps, feats, video);
    if (outputs.size() != ps.size()) {
        throw FormatError("refiner returned " + std::to_string(outputs.size()) + " outputs for " +
                          std::to_string(ps.size()) + " proposals");
    }
    ProposalSet out;
    out.reserve(ps.size());
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const auto& o = outputs[k];
        Proposal p = ps[k];
        p.segment = apply_offsets(p.segment, o.dc, o.dl, video.duration);
        const double iou = std::clamp(o.iou, 0.0, 1.0);
        p.score = cfg.fusion == ScoreFusion::multiply ? iou * p.score : iou;
        p.stage += 1;
        out.push_back(p);
    }
    return out;
}

ProposalSet refine_stage(const ProposalSet& ps, const RefinerParams& params,
                         const FeatureSequence& feats, const CascadeConfig& cfg,
                         const VideoRecord& video) {
    return refine_stage(ps, linear_refiner(params, cfg.pooling), feats, cfg, video);
}

ProposalSet cascade_refine(const ProposalSet& ps, const CascadeConfig& cfg,
                           const FeatureSequence& feats, const VideoRecord& video) {
    cfg.validate();
    ProposalSet cur = ps;
    for (const auto& stage : cfg.stages) cur = refine_stage(cur, stage.refiner, feats, cfg, video);
    if (cfg.min_score >= 0.0) {
        std::erase_if(cur, [&](const Proposal& p) { return p.score < cfg.min_score; });
    }
    sort_by_score(cur);
    return cur;
}

RefinerParams fit_linear_refiner(std::span<const RefinerSample> samples, double ridge) {
    if (samples.empty()) throw ContractError("fit_linear_refiner: need at least one sample");
    if (!(ridge >= 0.0)) throw ContractError("fit_linear_refiner: ridge must be >= 0");
    const int dim = static_cast<int>(samples.front().features.size());
    if (dim < 1) throw ContractError("fit_linear_refiner: empty feature vectors");
    for (const auto& s : samples) {
        if (static_cast<int>(s.features.size()) != dim) {
            throw FormatError("fit_linear_refiner: inconsistent feature dimensions");
        }
    }

    // Solves one output row; the last unknown is the bias.
    auto solve = [&](bool offsets_only, auto&& target) -> Eigen::VectorXd {
        const int n = dim + 1;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd x(n);
        int used = 0;
        for (const auto& s : samples) {
            if (offsets_only && !s.has_offset) continue;
            for (int c = 0; c < dim; ++c) x[c] = s.features[c];
            x[dim] = 1.0;
            a.selfadjointView<Eigen::Lower>().rankUpdate(x);
            rhs += target(s) * x;
            ++used;
        }
        if (used == 0) return Eigen::VectorXd::Zero(n);
        a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
        for (int c = 0; c < dim; ++c) a(c, c) += ridge;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
        if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > 1e-12 * pivots.maxCoeff())) {
            throw NumericalError(
                "fit_linear_refiner: normal equations are singular; use a ridge > 0");
        }
        return ldlt.solve(rhs);
    };

    const auto dc = solve(true, [](const RefinerSample& s) { return s.dc; });
    const auto dl = solve(true, [](const RefinerSample& s) { return s.dl; });
    const auto iou = solve(false, [](const RefinerSample& s) {
        return logit(std::clamp(s.iou, 1e-4, 1.0 - 1e-4));
    });

    RefinerParams params(dim);
    const Eigen::VectorXd* rows[3] = {&dc, &dl, &iou};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < dim; ++c) params.weights(r, c) = (*rows[r])[c];
        params.bias[r] = (*rows[r])[dim];
    }
    params.validate();
    return params;
}

std::vector<RefinerSample> make_refiner_samples(const ProposalSet& ps,
                                                const FeatureSequence& feats,
                                                const VideoRecord& video,
                                                const PoolingOpts& pooling,
                                                double iou_threshold) {
    const auto gts = video.segments();
    const auto assignments = cascade_assign(ps, gts, iou_threshold);
    std::vector<RefinerSample> out;
    out.reserve(ps.size());
    for (const auto& a : assignments) {
        RefinerSample s;
        s.features = pool_proposal(ps[a.proposal_index].segment, feats, video, pooling);
        s.iou = a.target_iou;
        s.has_offset = a.offset_target.has_value();
        if (s.has_offset) {
            s.dc = a.offset_target->dc;
            s.dl = a.offset_target->dl;
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace talon
