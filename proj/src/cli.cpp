#include "talon/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "talon/ensemble.hpp"
#include "talon/io.hpp"
#include "talon/metrics.hpp"
#include "talon/parallel.hpp"
#include "talon/pipeline.hpp"
#include "talon/synth.hpp"
#include "talon/targets.hpp"

namespace talon::cli {

using nlohmann::json;

std::vector<double> parse_tiou_grid(const std::string& spec) {
    auto to_num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) {
            throw ValidationError("--tious: cannot parse '" + s + "' in '" + spec + "'");
        }
        return v;
    };
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw ValidationError("--tious: expected lo:step:hi, got '" + spec + "'");
        const double lo = to_num(parts[0]);
        const double step = to_num(parts[1]);
        const double hi = to_num(parts[2]);
        if (!(step > 0.0) || hi < lo) throw ValidationError("--tious: need step > 0 and hi >= lo");
        const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (int k = 0; k < n; ++k) out.push_back(lo + step * k);
    } else {
        std::stringstream ss(spec);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(to_num(p));
    }
    if (out.empty()) throw ValidationError("--tious: empty threshold list");
    for (double t : out) {
        if (!(t > 0.0 && t <= 1.0)) throw ValidationError("--tious: thresholds must lie in (0, 1]");
    }
    return out;
}

namespace {

struct Common {
    int jobs = default_jobs();
    bool json_out = false;
};

struct SynthArgs {
    SynthConfig cfg;
    int d = 200;
    std::string annotations, labels, bundles, features;
};

struct GenLabelsArgs {
    std::string annotations, labels, out;
    int d = 200;
    double expand_ratio = 0.1;
};

struct DecodeArgs {
    std::string bundles, annotations, labels, out = "-", video_classes;
    std::string subset = "all";
    DecodeOpts opts;
    bool class_from_annotations = false;
};

struct NmsArgs {
    std::string proposals, out = "-";
    SoftNmsOpts opts;
};

struct RefineArgs {
    std::string proposals, features, annotations, labels, out = "-";
    int stages = 3;
    std::vector<double> thresholds{0.5, 0.6, 0.7};
    PoolingOpts pooling;
    SoftNmsOpts nms;
    bool no_nms = false;
    std::string fusion = "iou";
    std::optional<double> oracle_alpha;
    std::string params, fit;
    double ridge = 1e-3;
    std::string fit_subset = "training";
};

struct EnsembleArgs {
    std::vector<std::string> bundles, proposals;
    std::vector<double> weights;
    int target_d = 200;
    std::string align = "centers";
    double merge_iou = 0.95;
    SoftNmsOpts nms;
    std::string out = "-";
};

struct ClassifyArgs {
    std::string logits, out = "-", weights_out;
    std::vector<double> weights;
    bool fit = false;
    double lr = 0.01;
    int iters = 100;
    int k = 5;
};

struct EvalArgs {
    std::string proposals, annotations, labels, out = "-", curve_csv, predictions;
    std::string subset = "all";
    std::string tious = "0.5:0.05:0.95";
    int max_an = 100;
    std::string auc_mode = "trapezoid";
};

std::optional<fs::path> opt_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
}

AnnotationDb load_db(const std::string& path, const std::string& labels, const std::string& subset) {
    std::vector<std::string> warnings;
    AnnotationDb db = load_annotations(path, opt_path(labels), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << path << ": " << w << "\n";
    if (subset != "all") db = db.filtered(parse_subset(subset));
    return db;
}

ScoreFusion parse_fusion(const std::string& s) {
    if (s == "iou") return ScoreFusion::iou_only;
    if (s == "multiply") return ScoreFusion::multiply;
    throw ValidationError("--score-fusion: expected 'iou' or 'multiply', got '" + s + "'");
}

AlignMode parse_align(const std::string& s) {
    if (s == "centers") return AlignMode::centers;
    if (s == "corners") return AlignMode::corners;
    throw ValidationError("--align: expected 'centers' or 'corners', got '" + s + "'");
}

void run_synth(const SynthArgs& a) {
    if (a.d < 2) throw ValidationError("--d must be >= 2");
    const AnnotationDb db = gen_annotations(a.cfg);
    write_annotations(a.annotations, db);
    if (!a.labels.empty()) write_label_index(a.labels, db);
    if (!a.bundles.empty()) {
        std::map<std::string, ScoreBundle> bundles;
        for (const auto& [id, v] : db.videos) {
            bundles.emplace(id, gen_bundle(v, GridSpec{a.d, v.duration}, a.cfg.map_noise,
                                           a.cfg.boundary_noise, a.cfg.seed));
        }
        write_bundles(a.bundles, bundles);
    }
    if (!a.features.empty()) {
        std::map<std::string, FeatureSequence> feats;
        for (const auto& [id, v] : db.videos) feats.emplace(id, gen_features(v, a.cfg));
        write_features(a.features, feats);
    }
}

void run_gen_labels(const GenLabelsArgs& a) {
    if (a.d < 2) throw ValidationError("--d must be >= 2");
    if (!(a.expand_ratio > 0.0)) throw ValidationError("--expand-ratio must be > 0");
    const AnnotationDb db = load_db(a.annotations, a.labels, "all");
    std::map<std::string, ScoreBundle> out;
    for (const auto& [id, v] : db.videos) {
        const GridSpec spec{a.d, v.duration};
        const auto gts = v.segments();
        ScoreBundle b(a.d, BundleKind::label);
        const auto bl = boundary_labels(gts, spec, a.expand_ratio);
        std::copy(bl.start.begin(), bl.start.end(), b.start_prob.begin());
        std::copy(bl.end.begin(), bl.end.end(), b.end_prob.begin());
        const auto m = bm_label_map(gts, spec);
        for (std::size_t k = 0; k < m.data().size(); ++k) b.map_a.data()[k] = static_cast<float>(m.data()[k]);
        b.map_b = b.map_a;
        out.emplace(id, std::move(b));
    }
    write_bundles(a.out, out);
}

void run_decode(const DecodeArgs& a, const Common& c) {
    if (a.opts.max_candidates < 1) throw ValidationError("--max-candidates must be >= 1");
    if (!(a.opts.gamma >= 0.0)) throw ValidationError("--gamma must be >= 0");
    if (a.class_from_annotations && !a.video_classes.empty()) {
        throw ValidationError("--class-from-annotations and --video-classes are exclusive");
    }
    const AnnotationDb db = load_db(a.annotations, a.labels, a.subset);
    const auto bundles = read_bundles(a.bundles);
    VideoProposals out = decode_all(db, bundles, a.opts, c.jobs);
    if (a.class_from_annotations) out = assign_annotation_classes(out, db);
    if (!a.video_classes.empty()) {
        const json j = read_json_file(a.video_classes);
        std::map<std::string, int> cls;
        try {
            cls = j.get<std::map<std::string, int>>();
        } catch (const json::exception& e) {
            throw FormatError("--video-classes '" + a.video_classes + "': " + e.what());
        }
        out = assign_video_classes(out, cls);
    }
    write_proposals(a.out, out);
}

void run_nms(const NmsArgs& a, const Common& c) {
    if (!(a.opts.sigma > 0.0)) throw ValidationError("--sigma must be > 0");
    if (a.opts.top_k < 1) throw ValidationError("--top-k must be >= 1");
    write_proposals(a.out, soft_nms_all(read_proposals(a.proposals), a.opts, c.jobs));
}

void run_refine(const RefineArgs& a, const Common& c) {
    const int sources = (a.oracle_alpha ? 1 : 0) + (a.params.empty() ? 0 : 1) + (a.fit.empty() ? 0 : 1);
    if (sources != 1) throw ValidationError("refine needs exactly one of --oracle-alpha, --params, --fit");
    if (static_cast<int>(a.thresholds.size()) != a.stages) {
        throw ValidationError("--thresholds has " + std::to_string(a.thresholds.size()) +
                              " entries but --stages is " + std::to_string(a.stages));
    }
    for (std::size_t k = 0; k < a.thresholds.size(); ++k) {
        if (!(a.thresholds[k] > 0.0 && a.thresholds[k] < 1.0) ||
            (k > 0 && !(a.thresholds[k] > a.thresholds[k - 1]))) {
            throw ValidationError("--thresholds must be strictly increasing values in (0, 1)");
        }
    }
    if (a.pooling.roi_bins < 1) throw ValidationError("--bins must be >= 1");
    if (!(a.pooling.context_ratio >= 0.0)) throw ValidationError("--context must be >= 0");
    if (!a.no_nms && !(a.nms.sigma > 0.0)) throw ValidationError("--sigma must be > 0");
    if (a.oracle_alpha && !(*a.oracle_alpha >= 0.0 && *a.oracle_alpha <= 1.0)) {
        throw ValidationError("--oracle-alpha must lie in [0, 1]");
    }
    const ScoreFusion fusion = parse_fusion(a.fusion);

    const AnnotationDb db = load_db(a.annotations, a.labels, "all");
    VideoProposals ps = read_proposals(a.proposals);
    if (!a.no_nms) ps = soft_nms_all(ps, a.nms, c.jobs);

    std::map<std::string, FeatureSequence> feats;
    if (!a.features.empty()) feats = read_features(a.features);

    CascadeConfig cfg;
    if (a.oracle_alpha) {
        cfg = oracle_cascade(*a.oracle_alpha, a.thresholds, fusion);
        cfg.pooling = a.pooling;
    } else {
        if (a.features.empty()) throw ValidationError("--features is required with --params/--fit");
        LinearCascade lc;
        if (!a.params.empty()) {
            lc = cascade_from_json(read_json_file(a.params));
            if (lc.heads.size() != static_cast<std::size_t>(a.stages)) {
                throw ValidationError("--params '" + a.params + "' has " +
                                      std::to_string(lc.heads.size()) + " stages, --stages is " +
                                      std::to_string(a.stages));
            }
        } else {
            const AnnotationDb train = db.filtered(parse_subset(a.fit_subset));
            lc = fit_linear_cascade(ps, train, feats, a.pooling, a.thresholds, a.ridge, fusion);
            write_file_text(a.fit, cascade_to_json(lc).dump(1) + "\n");
        }
        cfg = cascade_config(lc, fusion);
    }
    write_proposals(a.out, cascade_all(ps, db, feats, cfg, c.jobs));
}

void run_ensemble(const EnsembleArgs& a) {
    const bool use_bundles = !a.bundles.empty();
    if (use_bundles == !a.proposals.empty()) {
        throw ValidationError("ensemble needs exactly one of --bundles or --proposals");
    }
    const std::size_t n = use_bundles ? a.bundles.size() : a.proposals.size();
    ModelWeights w{a.weights.empty() ? std::vector<double>(n, 1.0) : a.weights};
    if (w.w.size() != n) {
        throw ValidationError("--weights has " + std::to_string(w.w.size()) + " entries for " +
                              std::to_string(n) + " inputs");
    }
    for (double x : w.w) {
        if (!(x > 0.0)) throw ValidationError("--weights must be positive");
    }

    if (use_bundles) {
        if (a.target_d < 2) throw ValidationError("--target-d must be >= 2");
        const AlignMode mode = parse_align(a.align);
        std::vector<std::map<std::string, ScoreBundle>> inputs;
        for (const auto& p : a.bundles) inputs.push_back(read_bundles(p));
        std::map<std::string, ScoreBundle> out;
        for (const auto& [id, first] : inputs.front()) {
            std::vector<ScoreBundle> per;
            for (std::size_t m = 0; m < inputs.size(); ++m) {
                auto it = inputs[m].find(id);
                if (it == inputs[m].end()) {
                    throw ValidationError("video '" + id + "' missing from --bundles '" +
                                          a.bundles[m] + "'");
                }
                per.push_back(it->second);
            }
            out.emplace(id, ensemble_bundles(per, w, a.target_d, mode));
        }
        if (a.out == "-") throw ValidationError("--out must name a file for bundle output");
        write_bundles(a.out, out);
        return;
    }

    std::vector<VideoProposals> inputs;
    for (const auto& p : a.proposals) inputs.push_back(read_proposals(p));
    std::set<std::string> ids;
    for (const auto& in : inputs) {
        for (const auto& kv : in) ids.insert(kv.first);
    }
    FuseOpts fo;
    fo.nms = a.nms;
    fo.merge_iou = a.merge_iou;
    VideoProposals out;
    for (const auto& id : ids) {
        std::vector<ProposalSet> per;
        for (const auto& in : inputs) {
            auto it = in.find(id);
            per.push_back(it == in.end() ? ProposalSet{} : it->second);
        }
        out.emplace(id, fuse_proposal_sets(per, w, fo));
    }
    write_proposals(a.out, out);
}

json run_classify(const ClassifyArgs& a) {
    if (a.k < 1) throw ValidationError("--k must be >= 1");
    const LogitsFile lf = parse_logits(read_json_file(a.logits));
    ModelWeights w;
    if (a.fit) {
        if (lf.labels.empty()) throw ValidationError("--fit needs \"labels\" in '" + a.logits + "'");
        if (a.iters < 0) throw ValidationError("--iters must be >= 0");
        w = fit_adaptive_weights(lf.batch, lf.labels, a.lr, a.iters);
    } else {
        w.w = a.weights.empty() ? std::vector<double>(lf.batch.n_models, 1.0) : a.weights;
    }
    if (w.w.size() != static_cast<std::size_t>(lf.batch.n_models)) {
        throw ValidationError("--weights has " + std::to_string(w.w.size()) + " entries for " +
                              std::to_string(lf.batch.n_models) + " models");
    }
    w.validate();
    const auto topk = classify_ensemble(lf.batch, w, std::max(a.k, 5));
    json out;
    out["weights"] = weights_to_json(w);
    std::vector<std::vector<int>> trimmed;
    for (const auto& row : topk) {
        trimmed.emplace_back(row.begin(), row.begin() + std::min<std::size_t>(a.k, row.size()));
    }
    out["topk"] = trimmed;
    if (!lf.labels.empty()) {
        if (lf.labels.size() != static_cast<std::size_t>(lf.batch.n_samples)) {
            throw ValidationError("\"labels\" length does not match the sample count");
        }
        out["labels"] = lf.labels;
        out["top1"] = topk_accuracy(topk, lf.labels, 1);
        if (lf.batch.n_classes >= 5) out["top5"] = topk_accuracy(topk, lf.labels, 5);
    }
    if (!a.weights_out.empty()) write_file_text(a.weights_out, weights_to_json(w).dump() + "\n");
    return out;
}

void run_eval(const EvalArgs& a, const Common& c) {
    if (a.max_an < 1) throw ValidationError("--max-an must be >= 1");
    EvalOpts opts;
    opts.tious = parse_tiou_grid(a.tious);
    opts.max_an = a.max_an;
    if (a.auc_mode == "trapezoid") {
        opts.auc_mode = AucMode::trapezoid;
    } else if (a.auc_mode == "mean") {
        opts.auc_mode = AucMode::mean;
    } else {
        throw ValidationError("--auc-mode: expected 'trapezoid' or 'mean', got '" + a.auc_mode + "'");
    }
    const AnnotationDb db = load_db(a.annotations, a.labels, a.subset);
    if (db.n_instances() == 0) throw ValidationError("no ground-truth instances in '" + a.annotations + "'");
    EvalReport rep = evaluate(read_proposals(a.proposals), db, opts);
    if (!a.predictions.empty()) {
        const json p = read_json_file(a.predictions);
        try {
            const auto topk = p.at("topk").get<std::vector<std::vector<int>>>();
            const auto labels = p.at("labels").get<std::vector<int>>();
            rep.has_topk = true;
            rep.top1 = topk_accuracy(topk, labels, 1);
            rep.top5 = topk_accuracy(topk, labels, std::min<int>(5, topk.empty() ? 1 : topk[0].size()));
        } catch (const json::exception& e) {
            throw FormatError("--predictions '" + a.predictions + "': " + e.what());
        }
    }
    if (!a.curve_csv.empty()) write_file_text(a.curve_csv, ar_curve_csv(rep));
    if (c.json_out) {
        write_file_text(a.out, report_to_json(rep, db).dump(1) + "\n");
    } else {
        write_file_text(a.out, report_to_table(rep));
    }
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Temporal action localization post-processing and evaluation"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--jobs", common.jobs, "Worker threads (default: $TALON_JOBS or all cores)");
    };

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
    s->add_option("--seed", synth.cfg.seed, "Random seed");
    s->add_option("--videos", synth.cfg.n_videos, "Number of videos");
    s->add_option("--classes", synth.cfg.n_classes, "Number of classes");
    s->add_option("--min-duration", synth.cfg.min_duration, "Shortest video, seconds");
    s->add_option("--max-duration", synth.cfg.max_duration, "Longest video, seconds");
    s->add_option("--min-actions", synth.cfg.min_actions, "Fewest actions per video");
    s->add_option("--max-actions", synth.cfg.max_actions, "Most actions per video");
    s->add_option("--d", synth.d, "Temporal grid length of generated bundles");
    s->add_option("--boundary-noise", synth.cfg.boundary_noise, "Endpoint jitter std, grid units");
    s->add_option("--map-noise", synth.cfg.map_noise, "Additive bundle noise std");
    s->add_option("--channels", synth.cfg.feature_channels, "Feature channels");
    s->add_option("--align-grid", synth.cfg.align_grid, "Snap endpoints to this grid (0 = off)");
    s->add_option("--train-fraction", synth.cfg.training_fraction, "Share of training videos");
    s->add_option("--annotations", synth.annotations, "Output annotation JSON")->required();
    s->add_option("--labels", synth.labels, "Output label index JSON");
    s->add_option("--bundles", synth.bundles, "Output bundle container");
    s->add_option("--features", synth.features, "Output feature container");

    GenLabelsArgs gl;
    auto* g = app.add_subcommand("gen-labels", "Write training targets as label bundles");
    g->add_option("--annotations", gl.annotations, "Annotation JSON")->required();
    g->add_option("--labels", gl.labels, "Label index JSON");
    g->add_option("--d", gl.d, "Temporal grid length");
    g->add_option("--expand-ratio", gl.expand_ratio, "Boundary region half-width / gt length");
    g->add_option("--out", gl.out, "Output bundle container")->required();

    DecodeArgs dec;
    auto* d = app.add_subcommand("decode", "Decode score bundles into ranked proposals");
    d->add_option("--bundles", dec.bundles, "Bundle container")->required();
    d->add_option("--annotations", dec.annotations, "Annotation JSON (durations)")->required();
    d->add_option("--labels", dec.labels, "Label index JSON");
    d->add_option("--subset", dec.subset, "all | training | validation | testing");
    d->add_option("--out", dec.out, "Output proposals (JSON lines, - for stdout)");
    d->add_option("--max-candidates", dec.opts.max_candidates, "Proposals kept per video");
    d->add_option("--min-score", dec.opts.min_score, "Drop proposals scoring below this");
    d->add_flag("--peaks-only", dec.opts.peaks_only, "Only start/end cells at boundary peaks");
    d->add_option("--gamma", dec.opts.gamma, "Exponent on the map product");
    d->add_flag("--class-from-annotations", dec.class_from_annotations,
                "Label proposals with the video's ground-truth class");
    d->add_option("--video-classes", dec.video_classes, "JSON {video: class id} for labelling");
    add_common(d);

    NmsArgs nms;
    auto* n = app.add_subcommand("nms", "Gaussian soft-NMS");
    n->add_option("--proposals", nms.proposals, "Input proposals")->required();
    n->add_option("--out", nms.out, "Output proposals");
    n->add_option("--sigma", nms.opts.sigma, "Gaussian decay width");
    n->add_option("--min-score", nms.opts.min_score, "Stop below this score");
    n->add_option("--top-k", nms.opts.top_k, "Proposals kept per video");
    add_common(n);

    RefineArgs ref;
    auto* r = app.add_subcommand("refine", "Soft-NMS then cascade refinement");
    r->add_option("--proposals", ref.proposals, "Input proposals")->required();
    r->add_option("--annotations", ref.annotations, "Annotation JSON")->required();
    r->add_option("--labels", ref.labels, "Label index JSON");
    r->add_option("--features", ref.features, "Feature container");
    r->add_option("--out", ref.out, "Output proposals");
    r->add_option("--stages", ref.stages, "Number of refine stages");
    r->add_option("--thresholds", ref.thresholds, "Per-stage positive tIoU thresholds")->delimiter(',');
    r->add_option("--bins", ref.pooling.roi_bins, "RoI Align bins");
    r->add_option("--context", ref.pooling.context_ratio, "RoI context expansion per side");
    r->add_option("--samples-per-bin", ref.pooling.samples_per_bin, "RoI Align samples per bin");
    r->add_option("--sigma", ref.nms.sigma, "Soft-NMS decay width");
    r->add_option("--nms-min-score", ref.nms.min_score, "Soft-NMS stop score");
    r->add_option("--top-k", ref.nms.top_k, "Soft-NMS proposals kept per video");
    r->add_flag("--no-nms", ref.no_nms, "Skip soft-NMS before the cascade");
    r->add_option("--score-fusion", ref.fusion, "iou | multiply");
    r->add_option("--oracle-alpha", ref.oracle_alpha, "Use oracle refiners moving this fraction");
    r->add_option("--params", ref.params, "Fitted cascade JSON to apply");
    r->add_option("--fit", ref.fit, "Fit a linear cascade and write it here");
    r->add_option("--ridge", ref.ridge, "Ridge penalty for --fit");
    r->add_option("--fit-subset", ref.fit_subset, "Subset used by --fit");
    add_common(r);

    EnsembleArgs ens;
    auto* e = app.add_subcommand("ensemble", "Fuse bundles or proposal sets from several models");
    e->add_option("--bundles", ens.bundles, "Bundle containers")->delimiter(',');
    e->add_option("--proposals", ens.proposals, "Proposal files")->delimiter(',');
    e->add_option("--weights", ens.weights, "Per-model weights (default: uniform)")->delimiter(',');
    e->add_option("--target-d", ens.target_d, "Grid length of fused bundles");
    e->add_option("--align", ens.align, "centers | corners");
    e->add_option("--merge-iou", ens.merge_iou, "tIoU for merging proposals across models");
    e->add_option("--sigma", ens.nms.sigma, "Soft-NMS decay width");
    e->add_option("--min-score", ens.nms.min_score, "Soft-NMS stop score");
    e->add_option("--top-k", ens.nms.top_k, "Soft-NMS proposals kept per video");
    e->add_option("--out", ens.out, "Output file");
    add_common(e);

    ClassifyArgs cls;
    auto* c = app.add_subcommand("classify", "Weighted logit ensemble classification");
    c->add_option("--logits", cls.logits, "Logits JSON")->required();
    c->add_option("--weights", cls.weights, "Per-model weights")->delimiter(',');
    c->add_flag("--fit", cls.fit, "Fit adaptive weights on the file's labels");
    c->add_option("--lr", cls.lr, "Learning rate for --fit");
    c->add_option("--iters", cls.iters, "Iterations for --fit");
    c->add_option("--k", cls.k, "Classes listed per sample");
    c->add_option("--out", cls.out, "Output predictions JSON");
    c->add_option("--weights-out", cls.weights_out, "Write the weights used here");

    EvalArgs ev;
    auto* v = app.add_subcommand("eval", "AR@AN, AUC and mAP against annotations");
    v->add_option("--proposals", ev.proposals, "Proposals to score")->required();
    v->add_option("--annotations", ev.annotations, "Annotation JSON")->required();
    v->add_option("--labels", ev.labels, "Label index JSON");
    v->add_option("--subset", ev.subset, "all | training | validation | testing");
    v->add_option("--tious", ev.tious, "tIoU thresholds, lo:step:hi or a list");
    v->add_option("--max-an", ev.max_an, "Largest AN on the AR curve");
    v->add_option("--auc-mode", ev.auc_mode, "trapezoid | mean");
    v->add_option("--out", ev.out, "Report destination");
    v->add_option("--curve-csv", ev.curve_csv, "Write the AR-AN curve as CSV");
    v->add_option("--predictions", ev.predictions, "classify output with labels, for Top-k");

    for (auto* sub : {s, g, d, n, r, e, c, v}) {
        sub->add_flag("--json", common.json_out, "Machine-readable report output");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex, std::cerr, std::cerr);
        return kValidation;
    }

    try {
        if (s->parsed()) run_synth(synth);
        if (g->parsed()) run_gen_labels(gl);
        if (d->parsed()) run_decode(dec, common);
        if (n->parsed()) run_nms(nms, common);
        if (r->parsed()) run_refine(ref, common);
        if (e->parsed()) run_ensemble(ens);
        if (c->parsed()) write_file_text(cls.out, run_classify(cls).dump(1) + "\n");
        if (v->parsed()) run_eval(ev, common);
    } catch (const IoError& ex) {
        std::cerr << "talon: " << ex.what() << "\n";
        return kIo;
    } catch (const FormatError& ex) {
        std::cerr << "talon: " << ex.what() << "\n";
        return kIo;
    } catch (const std::exception& ex) {
        std::cerr << "talon: " << ex.what() << "\n";
        return kValidation;
    }
    return kOk;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("talon");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace talon::cli
