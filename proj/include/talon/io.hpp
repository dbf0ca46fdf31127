#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "talon/core.hpp"
#include "talon/decode.hpp"
#include "talon/ensemble.hpp"
#include "talon/metrics.hpp"
#include "talon/numerics.hpp"
#include "talon/postprocess.hpp"

namespace talon {

namespace fs = std::filesystem;

inline constexpr char kBundleMagic[4] = {'T', 'F', 'N', 'B'};
inline constexpr char kFeatureMagic[4] = {'T', 'F', 'N', 'F'};
inline constexpr std::uint16_t kContainerVersion = 1;

// ---- annotations -----------------------------------------------------------

/// Parses {"database": {id: {"duration", "subset", "annotations": [{"label", "segment"}]}}}.
/// With no label index, class ids follow the sorted distinct labels. Segments are
/// clamped to [0, duration]; ones left empty are dropped and reported in `warnings`.
AnnotationDb parse_annotations(const nlohmann::json& doc, const nlohmann::json* label_index,
                               std::vector<std::string>* warnings = nullptr);

AnnotationDb load_annotations(const fs::path& path, const std::optional<fs::path>& label_index,
                              std::vector<std::string>* warnings = nullptr);

nlohmann::json annotations_to_json(const AnnotationDb& db);
nlohmann::json label_index_to_json(const AnnotationDb& db);

void write_annotations(const fs::path& path, const AnnotationDb& db);
void write_label_index(const fs::path& path, const AnnotationDb& db);

// ---- binary containers -----------------------------------------------------

/// "TFNB" | u16 version | u32 count | per record: u32 id length, id bytes, u32 D,
/// u8 kind, start[D], end[D], map_a[D*D], map_b[D*D] as little-endian f32, row-major.
std::vector<std::uint8_t> encode_bundles(const std::map<std::string, ScoreBundle>& bundles);
std::map<std::string, ScoreBundle> decode_bundles(const std::vector<std::uint8_t>& bytes);

void write_bundles(const fs::path& path, const std::map<std::string, ScoreBundle>& bundles);
std::map<std::string, ScoreBundle> read_bundles(const fs::path& path);

/// "TFNF" | u16 version | u32 count | per record: u32 id length, id bytes, u32 C, u32 T,
/// data[C*T] as little-endian f32, channel-major. Values are narrowed to f32 on write.
std::vector<std::uint8_t> encode_features(const std::map<std::string, FeatureSequence>& feats);
std::map<std::string, FeatureSequence> decode_features(const std::vector<std::uint8_t>& bytes);

void write_features(const fs::path& path, const std::map<std::string, FeatureSequence>& feats);
std::map<std::string, FeatureSequence> read_features(const fs::path& path);

// ---- proposals (JSON lines) --------------------------------------------------

std::string format_proposals(const VideoProposals& sets);
VideoProposals parse_proposals(const std::string& text);

void write_proposals(const fs::path& path, const VideoProposals& sets);
VideoProposals read_proposals(const fs::path& path);

// ---- models and weights ------------------------------------------------------

nlohmann::json refiner_params_to_json(const RefinerParams& p);
RefinerParams refiner_params_from_json(const nlohmann::json& j);

/// A fitted linear cascade: pooling settings plus one head per stage.
struct LinearCascade {
    PoolingOpts pooling;
    std::vector<double> thresholds;
    std::vector<RefinerParams> heads;
};

nlohmann::json cascade_to_json(const LinearCascade& c);
LinearCascade cascade_from_json(const nlohmann::json& j);

nlohmann::json weights_to_json(const ModelWeights& w);
ModelWeights weights_from_json(const nlohmann::json& j);

/// {"logits": [N][B][K], "labels": [B] (optional)}
struct LogitsFile {
    LogitsBatch batch;
    std::vector<int> labels;
};

LogitsFile parse_logits(const nlohmann::json& j);

// ---- reports -----------------------------------------------------------------

nlohmann::json report_to_json(const EvalReport& r, const AnnotationDb& db);
std::string report_to_table(const EvalReport& r);
std::string ar_curve_csv(const EvalReport& r);

// ---- files -------------------------------------------------------------------

std::vector<std::uint8_t> read_file_bytes(const fs::path& path);
std::string read_file_text(const fs::path& path);
nlohmann::json read_json_file(const fs::path& path);

/// Writes to `path`, or to standard output when path is "-".
void write_file_text(const fs::path& path, const std::string& text);
void write_file_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace talon
