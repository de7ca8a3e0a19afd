#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "erpmotion/flow_estimator.hpp"
#include "erpmotion/raster.hpp"

namespace erpm {

struct CurationConfig {
  double stereo_threshold = 0.7;
  double fisheye_threshold = 0.7;
  double black_level = 0.02;
  double motion_threshold = 2.0;  // px / frame at resize_min_dim
  double min_clip_s = 3.0;
  double max_clip_s = 10.0;
  double transition_trim_s = 1.0;
  int resize_min_dim = 256;
  int frames_sampled_per_check = 5;
  double transition_threshold = 0.15;  // mean |diff| of [0, 1] grayscale
  int transition_min_dim = 64;
  int max_clips_per_video = 5;
  // Optional camera-rotation filter in degrees / second; 0 disables it.
  double min_rotation_deg_per_s = 0.0;
  std::uint64_t seed = 0;
  BlockMatchParams flow;

  // Throws ConfigError unless every threshold is positive and min < max.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

enum class Verdict { Keep, Discard };
enum class Reason { NonErpStereo, NonErpFisheye, LowMotion, TooShort, TooLong, ClipCap, LowRotation, Ok };

std::string to_string(Verdict v);
std::string to_string(Reason r);
Verdict verdict_from_string(const std::string& s);
Reason reason_from_string(const std::string& s);

struct ClipScores {
  double stereo3d = 0.0;
  double fisheye = 0.0;
  double motion = 0.0;
  int transitions = 0;
  std::optional<double> rotation_deg_per_s;
  bool operator==(const ClipScores&) const = default;
};

// One manifest line. Either a verdict for [start_frame, end_frame) or, when
// error is set, a per-item failure for the whole source.
struct ClipRecord {
  std::string source_id;
  int start_frame = 0;
  int end_frame = 0;
  double fps = 0.0;
  ClipScores scores;
  Verdict verdict = Verdict::Discard;
  Reason reason = Reason::Ok;
  std::optional<std::string> error;
  bool operator==(const ClipRecord&) const = default;
};

// Random access to the frames of one video.
struct FrameSource {
  std::size_t count = 0;
  std::function<ErpImage(std::size_t)> get;
};
FrameSource frames_in_memory(const std::vector<ErpImage>& frames);

// Evenly spaced indices (first and last included) for format checks.
std::vector<std::size_t> sample_indices(std::size_t count, int samples);

// Mean SSIM between the left and right halves, clamped to [0, 1]. W must be even.
double stereo3d_score(const std::vector<ErpImage>& frames);
// Mean fraction of pixels outside the inscribed circle (center (H/2, W/2),
// radius min(H, W)/2) whose grayscale is below black_level.
double fisheye_score(const std::vector<ErpImage>& frames, double black_level);
// Indices t with mean |g_t - g_{t-1}| > threshold on grayscale frames resized
// to transition_min_dim; consecutive flagged indices collapse to the first.
std::vector<int> detect_transitions(const FrameSource& frames, const CurationConfig& config);
std::vector<int> detect_transitions(const std::vector<ErpImage>& frames, const CurationConfig& config);
// Mean over consecutive pairs of the mean flow magnitude at resize_min_dim.
double motion_score(const FrameSource& frames, std::size_t begin, std::size_t end, const CurationConfig& config);
double motion_score(const std::vector<ErpImage>& frames, const CurationConfig& config);

struct Span {
  int start = 0;
  int end = 0;  // exclusive
  bool operator==(const Span&) const = default;
};

struct Segmentation {
  std::vector<Span> clips;
  std::vector<Span> dropped;  // pieces shorter than min_clip_s
};

// Removes [t - trim, t + trim] around every transition, splits the remaining
// spans greedily into pieces of at most max_clip_s and keeps pieces of at
// least min_clip_s.
Segmentation segment_clips_detailed(int frame_count, double fps, const std::vector<int>& transitions,
                                    const CurationConfig& config);
std::vector<Span> segment_clips(int frame_count, double fps, const std::vector<int>& transitions,
                                const CurationConfig& config);

struct CurateOptions {
  // When set, per-video results are cached there with completion markers and
  // reused on rerun if the configuration matches.
  std::optional<std::filesystem::path> work_dir;
};

// Corpus layout: one subdirectory per video holding numbered frame files
// (.png / .erpf) and meta.json {"fps": float, "id": string}. Records are
// ordered by source id, then start frame.
std::vector<ClipRecord> curate(const std::filesystem::path& corpus, const CurationConfig& config,
                               const CurateOptions& options = {});

nlohmann::ordered_json to_json(const ClipRecord& r);
ClipRecord record_from_json(const nlohmann::json& j);
// JSON Lines, one record per line.
void write_manifest(const std::vector<ClipRecord>& records, const std::filesystem::path& path);
std::vector<ClipRecord> read_manifest(const std::filesystem::path& path);
std::string manifest_string(const std::vector<ClipRecord>& records);

}  // namespace erpm
