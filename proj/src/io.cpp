#include "talon/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>

namespace talon {

using nlohmann::json;
using nlohmann::ordered_json;

// ---- files -------------------------------------------------------------------

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_file_text(const fs::path& path) {
    if (path == "-") {
        return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const fs::path& path) {
    const std::string text = read_file_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
}

void write_file_text(const fs::path& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_file_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---- annotations -----------------------------------------------------------

AnnotationDb parse_annotations(const json& doc, const json* label_index,
                               std::vector<std::string>* warnings) {
    if (!doc.is_object() || !doc.contains("database") || !doc["database"].is_object()) {
        throw FormatError("annotation file: expected an object with a \"database\" object");
    }
    const json& database = doc["database"];

    AnnotationDb db;
    std::map<std::string, int> index;
    if (label_index) {
        if (!label_index->is_object()) throw FormatError("label index: expected an object");
        int max_id = -1;
        std::set<int> seen;
        for (const auto& [label, id] : label_index->items()) {
            if (!id.is_number_integer() || id.get<int>() < 0) {
                throw FormatError("label index: id of '" + label + "' must be a non-negative integer");
            }
            if (!seen.insert(id.get<int>()).second) {
                throw FormatError("label index: duplicate class id " + std::to_string(id.get<int>()));
            }
            index[label] = id.get<int>();
            max_id = std::max(max_id, id.get<int>());
        }
        db.labels.assign(max_id + 1, std::string());
        for (const auto& [label, id] : index) db.labels[id] = label;
    } else {
        std::set<std::string> names;
        for (const auto& [vid, rec] : database.items()) {
            if (rec.contains("annotations") && rec["annotations"].is_array()) {
                for (const auto& a : rec["annotations"]) {
                    if (a.contains("label") && a["label"].is_string()) names.insert(a["label"]);
                }
            }
        }
        for (const auto& n : names) {
            index[n] = static_cast<int>(db.labels.size());
            db.labels.push_back(n);
        }
    }

    for (const auto& [vid, rec] : database.items()) {
        const std::string where = "video '" + vid + "'";
        if (!rec.is_object()) throw FormatError(where + ": expected an object");
        if (!rec.contains("duration") || !rec["duration"].is_number()) {
            throw FormatError(where + ": missing numeric \"duration\"");
        }
        VideoRecord v;
        v.video_id = vid;
        v.duration = rec["duration"].get<double>();
        if (!(v.duration > 0.0) || !std::isfinite(v.duration)) {
            throw ValidationError(where + ": duration must be positive");
        }
        if (rec.contains("subset")) {
            if (!rec["subset"].is_string()) throw FormatError(where + ": \"subset\" must be a string");
            v.subset = parse_subset(rec["subset"].get<std::string>());
        }
        if (rec.contains("annotations")) {
            if (!rec["annotations"].is_array()) throw FormatError(where + ": \"annotations\" must be an array");
            for (const auto& a : rec["annotations"]) {
                if (!a.contains("label") || !a["label"].is_string() || !a.contains("segment") ||
                    !a["segment"].is_array() || a["segment"].size() != 2 ||
                    !a["segment"][0].is_number() || !a["segment"][1].is_number()) {
                    throw FormatError(where + ": annotation needs \"label\" and a 2-number \"segment\"");
                }
                const std::string label = a["label"];
                auto it = index.find(label);
                if (it == index.end()) {
                    throw ValidationError(where + ": label '" + label + "' not in label index");
                }
                const Segment raw{a["segment"][0].get<double>(), a["segment"][1].get<double>()};
                const auto clamped = clamp_segment(raw, v.duration);
                if (!clamped) {
                    if (warnings) {
                        std::ostringstream w;
                        w << where << ": dropped empty segment [" << raw.start << ", " << raw.end
                          << "] after clamping to [0, " << v.duration << "]";
                        warnings->push_back(w.str());
                    }
                    continue;
                }
                v.ground_truth.push_back({it->second, *clamped});
            }
        }
        db.videos.emplace(vid, std::move(v));
    }
    return db;
}

AnnotationDb load_annotations(const fs::path& path, const std::optional<fs::path>& label_index,
                              std::vector<std::string>* warnings) {
    const json doc = read_json_file(path);
    if (label_index) {
        const json idx = read_json_file(*label_index);
        return parse_annotations(doc, &idx, warnings);
    }
    return parse_annotations(doc, nullptr, warnings);
}

json annotations_to_json(const AnnotationDb& db) {
    ordered_json database = ordered_json::object();
    for (const auto& [id, v] : db.videos) {
        ordered_json anns = ordered_json::array();
        for (const auto& g : v.ground_truth) {
            ordered_json a;
            a["label"] = db.labels.at(g.class_id);
            a["segment"] = {g.segment.start, g.segment.end};
            anns.push_back(std::move(a));
        }
        ordered_json rec;
        rec["duration"] = v.duration;
        rec["subset"] = to_string(v.subset);
        rec["annotations"] = std::move(anns);
        database[id] = std::move(rec);
    }
    ordered_json doc;
    doc["database"] = std::move(database);
    return json::parse(doc.dump());
}

json label_index_to_json(const AnnotationDb& db) {
    json idx = json::object();
    for (std::size_t c = 0; c < db.labels.size(); ++c) {
        if (!db.labels[c].empty()) idx[db.labels[c]] = static_cast<int>(c);
    }
    return idx;
}

void write_annotations(const fs::path& path, const AnnotationDb& db) {
    write_file_text(path, annotations_to_json(db).dump(1) + "\n");
}

void write_label_index(const fs::path& path, const AnnotationDb& db) {
    write_file_text(path, label_index_to_json(db).dump(1) + "\n");
}

// ---- binary containers -----------------------------------------------------

namespace {

class ByteWriter {
public:
    void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) {
        for (int k = 0; k < 2; ++k) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void u32(std::uint32_t v) {
        for (int k = 0; k < 4; ++k) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& b) : b_(b) {}

    std::size_t offset() const { return pos_; }
    bool done() const { return pos_ == b_.size(); }

    void need(std::size_t n, const char* what) const {
        if (b_.size() - pos_ < n) {
            std::ostringstream msg;
            msg << "truncated payload at byte offset " << pos_ << ": " << what << " needs " << n
                << " bytes, " << b_.size() - pos_ << " remain";
            throw FormatError(msg.str());
        }
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return b_[pos_++];
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = static_cast<std::uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b_[pos_ + k]) << (8 * k);
        pos_ += 4;
        return v;
    }
    float f32(const char* what) {
        const std::size_t at = pos_;
        const float v = std::bit_cast<float>(u32(what));
        if (!std::isfinite(v)) {
            throw FormatError("non-finite " + std::string(what) + " value at byte offset " +
                              std::to_string(at));
        }
        return v;
    }
    std::string str(const char* what) {
        const std::uint32_t n = u32(what);
        need(n, what);
        std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void magic(const char (&expected)[4]) {
        need(4, "magic");
        if (!std::equal(expected, expected + 4, b_.begin())) {
            throw FormatError("bad magic at byte offset 0: expected '" + std::string(expected, 4) +
                              "'");
        }
        pos_ += 4;
    }
    void version() {
        const std::size_t at = pos_;
        const std::uint16_t v = u16("version");
        if (v != kContainerVersion) {
            throw FormatError("unsupported container version " + std::to_string(v) +
                              " at byte offset " + std::to_string(at) + " (this build reads " +
                              std::to_string(kContainerVersion) + ")");
        }
    }

private:
    const std::vector<std::uint8_t>& b_;
    std::size_t pos_ = 0;
};

void read_unit_floats(ByteReader& r, float* out, std::size_t n, const char* what) {
    r.need(n * 4, what);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t at = r.offset();
        out[k] = r.f32(what);
        if (out[k] < 0.0f || out[k] > 1.0f) {
            throw FormatError(std::string(what) + " value outside [0, 1] at byte offset " +
                              std::to_string(at));
        }
    }
}

}  // namespace

std::vector<std::uint8_t> encode_bundles(const std::map<std::string, ScoreBundle>& bundles) {
    ByteWriter w;
    w.raw(kBundleMagic, 4);
    w.u16(kContainerVersion);
    w.u32(static_cast<std::uint32_t>(bundles.size()));
    for (const auto& [id, b] : bundles) {
        b.validate();
        w.str(id);
        w.u32(static_cast<std::uint32_t>(b.d));
        w.u8(static_cast<std::uint8_t>(b.kind));
        for (float x : b.start_prob) w.f32(x);
        for (float x : b.end_prob) w.f32(x);
        for (float x : b.map_a.data()) w.f32(x);
        for (float x : b.map_b.data()) w.f32(x);
    }
    return w.take();
}

std::map<std::string, ScoreBundle> decode_bundles(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    r.magic(kBundleMagic);
    r.version();
    const std::uint32_t count = r.u32("record count");
    std::map<std::string, ScoreBundle> out;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::size_t rec_at = r.offset();
        std::string id = r.str("video id");
        const std::uint32_t d = r.u32("D");
        if (d < 1 || d > 65536) {
            throw FormatError("implausible D=" + std::to_string(d) + " in record at byte offset " +
                              std::to_string(rec_at));
        }
        const std::size_t kind_at = r.offset();
        const std::uint8_t kind = r.u8("kind");
        if (kind > 1) {
            throw FormatError("unknown kind tag " + std::to_string(kind) + " at byte offset " +
                              std::to_string(kind_at));
        }
        const std::size_t n = d;
        r.need((2 * n + 2 * n * n) * 4, "bundle payload");
        ScoreBundle b(static_cast<int>(d), static_cast<BundleKind>(kind));
        read_unit_floats(r, b.start_prob.data(), n, "start");
        read_unit_floats(r, b.end_prob.data(), n, "end");
        read_unit_floats(r, b.map_a.data().data(), n * n, "map_a");
        read_unit_floats(r, b.map_b.data().data(), n * n, "map_b");
        if (!out.emplace(id, std::move(b)).second) {
            throw FormatError("duplicate video id '" + id + "' at byte offset " +
                              std::to_string(rec_at));
        }
    }
    if (!r.done()) {
        throw FormatError("trailing bytes after last record at byte offset " +
                          std::to_string(r.offset()));
    }
    return out;
}

void write_bundles(const fs::path& path, const std::map<std::string, ScoreBundle>& bundles) {
    write_file_bytes(path, encode_bundles(bundles));
}

std::map<std::string, ScoreBundle> read_bundles(const fs::path& path) {
    try {
        return decode_bundles(read_file_bytes(path));
    } catch (const FormatError& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
}

std::vector<std::uint8_t> encode_features(const std::map<std::string, FeatureSequence>& feats) {
    ByteWriter w;
    w.raw(kFeatureMagic, 4);
    w.u16(kContainerVersion);
    w.u32(static_cast<std::uint32_t>(feats.size()));
    for (const auto& [id, f] : feats) {
        f.validate();
        w.str(id);
        w.u32(static_cast<std::uint32_t>(f.channels));
        w.u32(static_cast<std::uint32_t>(f.length));
        for (double x : f.data) w.f32(static_cast<float>(x));
    }
    return w.take();
}

std::map<std::string, FeatureSequence> decode_features(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    r.magic(kFeatureMagic);
    r.version();
    const std::uint32_t count = r.u32("record count");
    std::map<std::string, FeatureSequence> out;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::size_t rec_at = r.offset();
        std::string id = r.str("video id");
        const std::uint32_t c = r.u32("C");
        const std::uint32_t t = r.u32("T");
        if (c < 1 || t < 1 || static_cast<std::uint64_t>(c) * t > (1ULL << 31)) {
            throw FormatError("implausible feature shape in record at byte offset " +
                              std::to_string(rec_at));
        }
        r.need(static_cast<std::size_t>(c) * t * 4, "feature payload");
        FeatureSequence f(static_cast<int>(c), static_cast<int>(t));
        for (auto& x : f.data) x = r.f32("feature");
        if (!out.emplace(id, std::move(f)).second) {
            throw FormatError("duplicate video id '" + id + "' at byte offset " +
                              std::to_string(rec_at));
        }
    }
    if (!r.done()) {
        throw FormatError("trailing bytes after last record at byte offset " +
                          std::to_string(r.offset()));
    }
    return out;
}

void write_features(const fs::path& path, const std::map<std::string, FeatureSequence>& feats) {
    write_file_bytes(path, encode_features(feats));
}

std::map<std::string, FeatureSequence> read_features(const fs::path& path) {
    try {
        return decode_features(read_file_bytes(path));
    } catch (const FormatError& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
}

// ---- proposals (JSON lines) --------------------------------------------------

std::string format_proposals(const VideoProposals& sets) {
    std::string out;
    for (const auto& [id, ps] : sets) {
        for (const auto& p : ps) {
            ordered_json j;
            j["video"] = id;
            j["start"] = p.segment.start;
            j["end"] = p.segment.end;
            j["score"] = p.score;
            if (p.class_id) j["class"] = *p.class_id;
            j["stage"] = p.stage;
            out += j.dump();
            out += '\n';
        }
    }
    return out;
}

VideoProposals parse_proposals(const std::string& text) {
    VideoProposals out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fail = [&](const std::string& why) {
            throw FormatError("proposals line " + std::to_string(line_no) + ": " + why);
        };
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(e.what());
        }
        if (!j.is_object()) fail("expected a JSON object");
        for (const char* key : {"video", "start", "end", "score"}) {
            if (!j.contains(key)) fail(std::string("missing \"") + key + "\"");
        }
        if (!j["video"].is_string()) fail("\"video\" must be a string");
        if (!j["start"].is_number() || !j["end"].is_number() || !j["score"].is_number()) {
            fail("\"start\", \"end\" and \"score\" must be numbers");
        }
        Proposal p;
        p.segment = {j["start"].get<double>(), j["end"].get<double>()};
        p.score = j["score"].get<double>();
        if (!p.segment.valid()) fail("segment needs start < end");
        if (!(p.score >= 0.0 && p.score <= 1.0)) fail("score outside [0, 1]");
        if (j.contains("class") && !j["class"].is_null()) {
            if (!j["class"].is_number_integer() || j["class"].get<int>() < 0) {
                fail("\"class\" must be a non-negative integer");
            }
            p.class_id = j["class"].get<int>();
        }
        if (j.contains("stage")) {
            if (!j["stage"].is_number_integer() || j["stage"].get<int>() < 0) {
                fail("\"stage\" must be a non-negative integer");
            }
            p.stage = j["stage"].get<int>();
        }
        out[j["video"].get<std::string>()].push_back(p);
    }
    return out;
}

void write_proposals(const fs::path& path, const VideoProposals& sets) {
    write_file_text(path, format_proposals(sets));
}

VideoProposals read_proposals(const fs::path& path) {
    try {
        return parse_proposals(read_file_text(path));
    } catch (const FormatError& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
}

// ---- models and weights ------------------------------------------------------

json refiner_params_to_json(const RefinerParams& p) {
    p.validate();
    json j;
    j["shape"] = {3, p.input_dim};
    j["weights"] = p.weights.data();
    j["bias"] = p.bias;
    return j;
}

RefinerParams refiner_params_from_json(const json& j) {
    try {
        const auto shape = j.at("shape").get<std::vector<int>>();
        if (shape.size() != 2 || shape[0] != 3 || shape[1] < 1) {
            throw FormatError("refiner params: shape must be [3, input_dim]");
        }
        RefinerParams p(shape[1]);
        const auto w = j.at("weights").get<std::vector<double>>();
        if (w.size() != p.weights.data().size()) {
            throw FormatError("refiner params: weights length does not match shape");
        }
        p.weights.data() = w;
        const auto b = j.at("bias").get<std::vector<double>>();
        if (b.size() != 3) throw FormatError("refiner params: bias must have 3 entries");
        std::copy(b.begin(), b.end(), p.bias.begin());
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw FormatError(std::string("refiner params: ") + e.what());
    }
}

json cascade_to_json(const LinearCascade& c) {
    json j;
    j["roi_bins"] = c.pooling.roi_bins;
    j["context_ratio"] = c.pooling.context_ratio;
    j["samples_per_bin"] = c.pooling.samples_per_bin;
    j["stages"] = json::array();
    for (std::size_t k = 0; k < c.heads.size(); ++k) {
        j["stages"].push_back({{"threshold", c.thresholds.at(k)},
                               {"params", refiner_params_to_json(c.heads[k])}});
    }
    return j;
}

LinearCascade cascade_from_json(const json& j) {
    try {
        LinearCascade c;
        c.pooling.roi_bins = j.at("roi_bins").get<int>();
        c.pooling.context_ratio = j.at("context_ratio").get<double>();
        c.pooling.samples_per_bin = j.value("samples_per_bin", c.pooling.samples_per_bin);
        for (const auto& s : j.at("stages")) {
            c.thresholds.push_back(s.at("threshold").get<double>());
            c.heads.push_back(refiner_params_from_json(s.at("params")));
        }
        return c;
    } catch (const json::exception& e) {
        throw FormatError(std::string("cascade params: ") + e.what());
    }
}

json weights_to_json(const ModelWeights& w) { return json(w.w); }

ModelWeights weights_from_json(const json& j) {
    if (!j.is_array()) throw FormatError("weights: expected a JSON array of numbers");
    ModelWeights w;
    for (const auto& x : j) {
        if (!x.is_number()) throw FormatError("weights: expected a JSON array of numbers");
        w.w.push_back(x.get<double>());
    }
    w.validate();
    return w;
}

LogitsFile parse_logits(const json& j) {
    if (!j.is_object() || !j.contains("logits") || !j["logits"].is_array()) {
        throw FormatError("logits file: expected {\"logits\": [N][B][K]}");
    }
    const json& l = j["logits"];
    LogitsFile out;
    try {
        const int n = static_cast<int>(l.size());
        const int b = n > 0 ? static_cast<int>(l[0].size()) : 0;
        const int k = b > 0 ? static_cast<int>(l[0][0].size()) : 0;
        out.batch = LogitsBatch(n, b, k);
        for (int m = 0; m < n; ++m) {
            if (static_cast<int>(l[m].size()) != b) throw FormatError("logits file: ragged sample axis");
            for (int s = 0; s < b; ++s) {
                if (static_cast<int>(l[m][s].size()) != k) {
                    throw FormatError("logits file: ragged class axis");
                }
                for (int c = 0; c < k; ++c) out.batch.at(m, s, c) = l[m][s][c].get<double>();
            }
        }
        if (j.contains("labels")) out.labels = j["labels"].get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("logits file: ") + e.what());
    }
    out.batch.validate();
    return out;
}

// ---- reports -----------------------------------------------------------------

json report_to_json(const EvalReport& r, const AnnotationDb& db) {
    ordered_json j;
    ordered_json ar = ordered_json::object();
    for (const auto& [an, v] : r.ar_at) ar["AR@" + std::to_string(an)] = v;
    j["ar"] = std::move(ar);
    j["auc"] = r.auc;
    j["ar_curve"] = r.ar_curve;
    if (r.has_map) {
        j["mean_map"] = r.mean_map;
        j["tious"] = r.tious;
        j["map_at_tiou"] = r.map_at_tiou;
        ordered_json per = ordered_json::object();
        for (const auto& [c, ap] : r.ap_per_class) {
            const std::string name = c < static_cast<int>(db.labels.size()) && !db.labels[c].empty()
                                         ? db.labels[c]
                                         : std::to_string(c);
            per[name] = ap;
        }
        j["ap_per_class"] = std::move(per);
    }
    if (r.has_topk) {
        j["top1"] = r.top1;
        j["top5"] = r.top5;
    }
    return json::parse(j.dump());
}

std::string report_to_table(const EvalReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    std::vector<std::pair<std::string, double>> cols;
    for (const auto& [an, v] : r.ar_at) cols.emplace_back("AR@" + std::to_string(an) + "(%)", 100.0 * v);
    cols.emplace_back("AUC(%)", r.auc);
    if (r.has_map) cols.emplace_back("mAP(%)", 100.0 * r.mean_map);
    if (r.has_topk) {
        cols.emplace_back("Top1(%)", 100.0 * r.top1);
        cols.emplace_back("Top5(%)", 100.0 * r.top5);
    }
    for (const auto& [name, v] : cols) out << std::setw(std::max<int>(10, name.size() + 2)) << name;
    out << "\n";
    for (const auto& [name, v] : cols) out << std::setw(std::max<int>(10, name.size() + 2)) << v;
    out << "\n";
    if (r.has_map) {
        out << "\n" << std::setw(8) << "tIoU" << std::setw(10) << "mAP(%)" << "\n";
        for (std::size_t k = 0; k < r.tious.size(); ++k) {
            out << std::setw(8) << r.tious[k] << std::setw(10) << 100.0 * r.map_at_tiou[k] << "\n";
        }
    }
    return out.str();
}

std::string ar_curve_csv(const EvalReport& r) {
    std::ostringstream out;
    out << "an,ar\n" << std::setprecision(17);
    for (std::size_t n = 0; n < r.ar_curve.size(); ++n) out << n + 1 << "," << r.ar_curve[n] << "\n";
    return out.str();
}

}  // namespace talon
