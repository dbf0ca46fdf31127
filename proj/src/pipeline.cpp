#include "talon/pipeline.hpp"

#include "talon/parallel.hpp"
#include "talon/synth.hpp"

namespace talon {

namespace {

template <class Map>
std::vector<std::string> keys_of(const Map& m) {
    std::vector<std::string> out;
    out.reserve(m.size());
    for (const auto& kv : m) out.push_back(kv.first);
    return out;
}

const VideoRecord& video_or_throw(const AnnotationDb& db, const std::string& id) {
    auto it = db.videos.find(id);
    if (it == db.videos.end()) throw ValidationError("video '" + id + "' not in annotations");
    return it->second;
}

}  // namespace

VideoProposals decode_all(const AnnotationDb& db, const std::map<std::string, ScoreBundle>& bundles,
                          const DecodeOpts& opts, int jobs) {
    const auto ids = keys_of(db.videos);
    std::vector<ProposalSet> results(ids.size());
    std::vector<char> present(ids.size(), 0);
    parallel_for(ids.size(), jobs, [&](std::size_t k) {
        auto it = bundles.find(ids[k]);
        if (it == bundles.end()) return;
        results[k] = decode_proposals(it->second, db.videos.at(ids[k]), opts);
        present[k] = 1;
    });
    VideoProposals out;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (present[k]) out.emplace(ids[k], std::move(results[k]));
    }
    return out;
}

VideoProposals soft_nms_all(const VideoProposals& sets, const SoftNmsOpts& opts, int jobs) {
    const auto ids = keys_of(sets);
    std::vector<ProposalSet> results(ids.size());
    parallel_for(ids.size(), jobs, [&](std::size_t k) { results[k] = soft_nms(sets.at(ids[k]), opts); });
    VideoProposals out;
    for (std::size_t k = 0; k < ids.size(); ++k) out.emplace(ids[k], std::move(results[k]));
    return out;
}

VideoProposals cascade_all(const VideoProposals& sets, const AnnotationDb& db,
                           const std::map<std::string, FeatureSequence>& features,
                           const CascadeConfig& cfg, int jobs) {
    cfg.validate();
    const auto ids = keys_of(sets);
    std::vector<ProposalSet> results(ids.size());
    static const FeatureSequence kEmpty;
    parallel_for(ids.size(), jobs, [&](std::size_t k) {
        const auto& video = video_or_throw(db, ids[k]);
        auto f = features.find(ids[k]);
        results[k] = cascade_refine(sets.at(ids[k]), cfg, f == features.end() ? kEmpty : f->second,
                                    video);
    });
    VideoProposals out;
    for (std::size_t k = 0; k < ids.size(); ++k) out.emplace(ids[k], std::move(results[k]));
    return out;
}

VideoProposals assign_annotation_classes(const VideoProposals& sets, const AnnotationDb& db) {
    std::map<std::string, int> cls;
    for (const auto& [id, v] : db.videos) {
        if (!v.ground_truth.empty()) cls[id] = v.ground_truth.front().class_id;
    }
    return assign_video_classes(sets, cls);
}

VideoProposals assign_video_classes(const VideoProposals& sets,
                                    const std::map<std::string, int>& cls) {
    VideoProposals out = sets;
    for (auto& [id, ps] : out) {
        auto it = cls.find(id);
        if (it == cls.end()) continue;
        for (auto& p : ps) p.class_id = it->second;
    }
    return out;
}

LinearCascade fit_linear_cascade(const VideoProposals& sets, const AnnotationDb& db,
                                 const std::map<std::string, FeatureSequence>& features,
                                 const PoolingOpts& pooling, std::span<const double> thresholds,
                                 double ridge, ScoreFusion fusion) {
    LinearCascade out;
    out.pooling = pooling;
    VideoProposals current;
    for (const auto& [id, ps] : sets) {
        if (db.videos.contains(id) && features.contains(id)) current.emplace(id, ps);
    }
    for (double threshold : thresholds) {
        std::vector<RefinerSample> samples;
        for (const auto& [id, ps] : current) {
            auto s = make_refiner_samples(ps, features.at(id), db.videos.at(id), pooling, threshold);
            samples.insert(samples.end(), std::make_move_iterator(s.begin()),
                           std::make_move_iterator(s.end()));
        }
        if (samples.empty()) throw ValidationError("fit_linear_cascade: no training proposals");
        RefinerParams head = fit_linear_refiner(samples, ridge);

        CascadeConfig stage_cfg;
        stage_cfg.pooling = pooling;
        stage_cfg.fusion = fusion;
        const Refiner refiner = linear_refiner(head, pooling);
        for (auto& [id, ps] : current) {
            ps = refine_stage(ps, refiner, features.at(id), stage_cfg, db.videos.at(id));
        }
        out.thresholds.push_back(threshold);
        out.heads.push_back(std::move(head));
    }
    return out;
}

CascadeConfig cascade_config(const LinearCascade& c, ScoreFusion fusion) {
    CascadeConfig cfg;
    cfg.pooling = c.pooling;
    cfg.fusion = fusion;
    for (std::size_t k = 0; k < c.heads.size(); ++k) {
        cfg.stages.push_back({linear_refiner(c.heads[k], c.pooling), c.thresholds.at(k)});
    }
    return cfg;
}

CascadeConfig oracle_cascade(double alpha, std::span<const double> thresholds, ScoreFusion fusion) {
    CascadeConfig cfg;
    cfg.fusion = fusion;
    for (double t : thresholds) cfg.stages.push_back({oracle_refiner(alpha), t});
    return cfg;
}

}  // namespace talon
