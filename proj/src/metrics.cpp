#include "talon/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace talon {

std::vector<double> default_tiou_grid() {
    std::vector<double> out;
    for (int k = 0; k < 10; ++k) out.push_back(0.5 + 0.05 * k);
    return out;
}

std::vector<int> greedy_recall_prefix(const ProposalSet& ranked, std::span<const Segment> gts,
                                      double threshold) {
    std::vector<int> prefix(ranked.size(), 0);
    std::vector<bool> matched(gts.size(), false);
    int count = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        int best = -1;
        double best_iou = threshold;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (matched[g]) continue;
            const double iou = tiou(ranked[k].segment, gts[g]);
            if (iou >= best_iou && (best < 0 || iou > best_iou)) {
                best = static_cast<int>(g);
                best_iou = iou;
            }
        }
        if (best >= 0) {
            matched[best] = true;
            ++count;
        }
        prefix[k] = count;
    }
    return prefix;
}

namespace {

void require_tious(std::span<const double> tious) {
    if (tious.empty()) throw ContractError("need at least one tIoU threshold");
    for (double t : tious) {
        if (!(t > 0.0 && t <= 1.0)) throw ContractError("tIoU thresholds must lie in (0, 1]");
    }
}

// matched[t][n]: ground truths recalled over all videos at threshold t with the
// top n + 1 proposals per video.
std::vector<std::vector<long>> recall_counts(const VideoProposals& proposals,
                                             const AnnotationDb& db, int max_an,
                                             std::span<const double> tious) {
    if (db.n_instances() == 0) throw ContractError("recall needs at least one ground truth");
    if (max_an < 1) throw ContractError("AN must be >= 1");
    require_tious(tious);
    std::vector<std::vector<long>> counts(tious.size(), std::vector<long>(max_an, 0));
    for (const auto& [id, video] : db.videos) {
        if (video.ground_truth.empty()) continue;
        auto it = proposals.find(id);
        if (it == proposals.end() || it->second.empty()) continue;
        ProposalSet ranked = it->second;
        sort_by_score(ranked);
        if (ranked.size() > static_cast<std::size_t>(max_an)) ranked.resize(max_an);
        const auto gts = video.segments();
        for (std::size_t t = 0; t < tious.size(); ++t) {
            const auto prefix = greedy_recall_prefix(ranked, gts, tious[t]);
            for (int n = 0; n < max_an; ++n) {
                const std::size_t upto = std::min<std::size_t>(n + 1, prefix.size());
                counts[t][n] += prefix[upto - 1];
            }
        }
    }
    return counts;
}

double recall_at(const std::vector<std::vector<long>>& counts, int n, double total) {
    double acc = 0.0;
    for (const auto& row : counts) acc += row[n] / total;
    return acc / counts.size();
}

}  // namespace

double average_recall_at(const VideoProposals& proposals, const AnnotationDb& db, int an,
                         std::span<const double> tious) {
    const auto counts = recall_counts(proposals, db, an, tious);
    return recall_at(counts, an - 1, static_cast<double>(db.n_instances()));
}

ArCurve ar_an_auc(const VideoProposals& proposals, const AnnotationDb& db, int max_an,
                  std::span<const double> tious, AucMode mode) {
    const auto counts = recall_counts(proposals, db, max_an, tious);
    const double total = static_cast<double>(db.n_instances());
    ArCurve out;
    out.ar.resize(max_an);
    for (int n = 0; n < max_an; ++n) out.ar[n] = recall_at(counts, n, total);
    if (mode == AucMode::mean || max_an == 1) {
        out.auc = 100.0 * std::accumulate(out.ar.begin(), out.ar.end(), 0.0) / max_an;
    } else {
        double area = 0.0;
        for (int n = 0; n + 1 < max_an; ++n) area += 0.5 * (out.ar[n] + out.ar[n + 1]);
        out.auc = 100.0 * area / (max_an - 1);
    }
    return out;
}

double interpolated_ap(std::span<const double> precision, std::span<const double> recall) {
    if (precision.size() != recall.size()) {
        throw ContractError("interpolated_ap: precision and recall lengths differ");
    }
    std::vector<double> p{0.0};
    std::vector<double> r{0.0};
    p.insert(p.end(), precision.begin(), precision.end());
    r.insert(r.end(), recall.begin(), recall.end());
    p.push_back(0.0);
    r.push_back(1.0);
    for (std::size_t i = p.size() - 1; i-- > 0;) p[i] = std::max(p[i], p[i + 1]);
    double ap = 0.0;
    for (std::size_t i = 1; i < r.size(); ++i) {
        if (r[i] != r[i - 1]) ap += (r[i] - r[i - 1]) * p[i];
    }
    return ap;
}

namespace {

struct Detection {
    const std::string* video;
    const Proposal* p;
};

bool detection_before(const Detection& a, const Detection& b) {
    if (a.p->score != b.p->score) return a.p->score > b.p->score;
    if (*a.video != *b.video) return *a.video < *b.video;
    if (a.p->segment.start != b.p->segment.start) return a.p->segment.start < b.p->segment.start;
    return a.p->segment.end < b.p->segment.end;
}

double class_ap(const std::vector<Detection>& dets, const AnnotationDb& db, int cls,
                double threshold, int n_gt) {
    // per-video ground truths of this class, with matched flags
    std::map<std::string, std::vector<Segment>> gts;
    for (const auto& [id, v] : db.videos) {
        for (const auto& g : v.ground_truth) {
            if (g.class_id == cls) gts[id].push_back(g.segment);
        }
    }
    std::map<std::string, std::vector<bool>> used;
    for (const auto& [id, segs] : gts) used[id].assign(segs.size(), false);

    std::vector<double> precision;
    std::vector<double> recall;
    precision.reserve(dets.size());
    recall.reserve(dets.size());
    int tp = 0;
    for (std::size_t k = 0; k < dets.size(); ++k) {
        auto it = gts.find(*dets[k].video);
        if (it != gts.end()) {
            auto& flags = used[it->first];
            int best = -1;
            double best_iou = threshold;
            for (std::size_t g = 0; g < it->second.size(); ++g) {
                if (flags[g]) continue;
                const double iou = tiou(dets[k].p->segment, it->second[g]);
                if (iou >= best_iou && (best < 0 || iou > best_iou)) {
                    best = static_cast<int>(g);
                    best_iou = iou;
                }
            }
            if (best >= 0) {
                flags[best] = true;
                ++tp;
            }
        }
        precision.push_back(static_cast<double>(tp) / (k + 1));
        recall.push_back(static_cast<double>(tp) / n_gt);
    }
    return interpolated_ap(precision, recall);
}

}  // namespace

DetectionMap detection_map(const VideoProposals& detections, const AnnotationDb& db,
                           std::span<const double> tious) {
    require_tious(tious);
    const int n_classes = static_cast<int>(db.n_classes());

    std::vector<std::string> offenders;
    for (const auto& [id, ps] : detections) {
        for (const auto& p : ps) {
            if (!p.class_id || *p.class_id < 0 || *p.class_id >= n_classes) {
                std::ostringstream o;
                o << id << "@[" << p.segment.start << "," << p.segment.end << "]:"
                  << (p.class_id ? std::to_string(*p.class_id) : std::string("none"));
                offenders.push_back(o.str());
            }
        }
    }
    if (!offenders.empty()) {
        std::ostringstream msg;
        msg << offenders.size() << " detection(s) with unknown class id (known: 0.."
            << n_classes - 1 << "):";
        const std::size_t shown = std::min<std::size_t>(offenders.size(), 10);
        for (std::size_t k = 0; k < shown; ++k) msg << " " << offenders[k];
        if (shown < offenders.size()) msg << " ...";
        throw ValidationError(msg.str());
    }

    std::map<int, int> gt_count;
    for (const auto& [id, v] : db.videos) {
        for (const auto& g : v.ground_truth) ++gt_count[g.class_id];
    }

    std::map<int, std::vector<Detection>> by_class;
    for (const auto& [id, ps] : detections) {
        if (!db.videos.contains(id)) continue;
        for (const auto& p : ps) by_class[*p.class_id].push_back({&id, &p});
    }
    for (auto& [c, dets] : by_class) std::sort(dets.begin(), dets.end(), detection_before);

    DetectionMap out;
    out.tious.assign(tious.begin(), tious.end());
    for (const auto& [c, n] : gt_count) out.classes.push_back(c);
    if (out.classes.empty()) throw ContractError("detection_map: no ground truth instances");

    static const std::vector<Detection> kNone;
    for (double t : tious) {
        std::vector<double> row;
        for (int c : out.classes) {
            auto it = by_class.find(c);
            row.push_back(class_ap(it == by_class.end() ? kNone : it->second, db, c, t,
                                   gt_count[c]));
        }
        out.map_at.push_back(std::accumulate(row.begin(), row.end(), 0.0) / row.size());
        out.ap.push_back(std::move(row));
    }
    out.mean_map = std::accumulate(out.map_at.begin(), out.map_at.end(), 0.0) / out.map_at.size();
    return out;
}

double topk_accuracy(const std::vector<std::vector<int>>& predictions, std::span<const int> labels,
                     int k) {
    if (predictions.size() != labels.size()) {
        throw ContractError("topk_accuracy: prediction and label counts differ");
    }
    if (k < 1) throw ContractError("topk_accuracy: k must be >= 1");
    if (labels.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        const auto& ranked = predictions[b];
        if (ranked.size() < static_cast<std::size_t>(k)) {
            throw ContractError("topk_accuracy: sample " + std::to_string(b) + " has fewer than " +
                                std::to_string(k) + " predictions");
        }
        if (std::find(ranked.begin(), ranked.begin() + k, labels[b]) != ranked.begin() + k) ++hits;
    }
    return static_cast<double>(hits) / labels.size();
}

EvalReport evaluate(const VideoProposals& proposals, const AnnotationDb& db,
                    const EvalOpts& opts) {
    EvalReport rep;
    const auto curve = ar_an_auc(proposals, db, opts.max_an, opts.tious, opts.auc_mode);
    rep.ar_curve = curve.ar;
    rep.auc = curve.auc;
    for (int an : opts.report_an) {
        if (an >= 1 && an <= opts.max_an) rep.ar_at[an] = curve.ar[an - 1];
    }

    bool all_classified = db.n_classes() > 0;
    for (const auto& [id, ps] : proposals) {
        for (const auto& p : ps) all_classified = all_classified && p.class_id.has_value();
    }
    if (all_classified) {
        const auto dm = detection_map(proposals, db, opts.tious);
        rep.has_map = true;
        rep.tious = dm.tious;
        rep.map_at_tiou = dm.map_at;
        rep.mean_map = dm.mean_map;
        for (std::size_t c = 0; c < dm.classes.size(); ++c) {
            double acc = 0.0;
            for (const auto& row : dm.ap) acc += row[c];
            rep.ap_per_class[dm.classes[c]] = acc / dm.ap.size();
        }
    }
    return rep;
}

}  // namespace talon
