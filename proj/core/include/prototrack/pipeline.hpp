#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prototrack/memory_bank.hpp"
#include "prototrack/prompt.hpp"
#include "prototrack/tensor.hpp"

namespace prototrack {

// Memory-selection rule driving each frame's conditioning set.
enum class SelectionStrategy {
  samite,         // dual-anchor calibrated top-5 plus anchors
  sam2_default,   // first frame plus 6 most recent
  feature_only,   // calibration with alpha = 0
  position_only,  // calibration with alpha = 1
  recent_only,    // 7 most recent frames
};

std::string to_string(SelectionStrategy s);
std::optional<SelectionStrategy> strategy_from_string(const std::string& name);

struct TrackConfig {
  double alpha = 0.3;
  int window = 30;
  double beta = 0.7;
  SelectionStrategy strategy = SelectionStrategy::samite;
  double seg_threshold = 0.6;
  double binarize_threshold = 0.5;
};

// Source of per-frame features; frames arrive in strictly increasing order
// with fixed dims per sequence.
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual int height() const = 0;
  virtual int width() const = 0;
  virtual int channels() const = 0;
  virtual int frame_count() const = 0;
  virtual std::optional<std::pair<int, FeatureMap>> next_frame() = 0;
};

// Decodes conditioned features (and an optional dense prompt) into a mask.
class SegmentationHead {
 public:
  virtual ~SegmentationHead() = default;
  virtual BinaryMask decode(const FeatureMap& conditioned, const ProbMask* prompt) const = 0;
  virtual BinaryMask decode_box(const FeatureMap& features, const BBox& box) const = 0;
};

// Deterministic stand-in for a learned decoder: thresholds the activation
// channel (scalar-normalized, multiplied by the prompt when present) and
// keeps the connected component with the strongest peak.
class DefaultSegmentationHead : public SegmentationHead {
 public:
  explicit DefaultSegmentationHead(double threshold = 0.6);
  BinaryMask decode(const FeatureMap& conditioned, const ProbMask* prompt) const override;
  BinaryMask decode_box(const FeatureMap& features, const BBox& box) const override;

 private:
  double threshold_;
};

// Replaceable stand-in for a learned memory encoder.
using MemoryEncoder = std::function<FeatureMap(const FeatureMap&, const BinaryMask&)>;

// Default encoding: features masked to the prediction.
FeatureMap encode_memory(const FeatureMap& features, const BinaryMask& mask);

struct TrackState {
  PrototypicalMemoryBank bank;
  BinaryMask last_mask;
  TrackConfig config;
  int frame_count = 0;
  PositionalEncodingField field;

  TrackState() : bank(0.3, 30) {}
};

// Everything recorded about one processed frame.
struct FrameTrace {
  int frame = 0;
  std::vector<int> selected;
  std::vector<CandidateScore> scores;
  std::optional<int> position_anchor;
  int cosine_evaluations = 0;
  int map_computations = 0;
  bool prompt_accepted = false;
  double mean_iou = 0.0;
  std::vector<double> per_memory_iou;
  bool degenerate = false;
  BBox box;
};

struct TrackReport {
  std::vector<BBox> boxes;
  std::vector<FrameTrace> traces;
};

// Appends one raw-cosine activation channel (features vs. the mean target
// prototype implied by the memories). Requires at least one memory.
FeatureMap condition_features(const FeatureMap& features,
                              const std::vector<const FeatureMap*>& memories);

// Decodes the first frame from its ground-truth box prompt and seeds the bank.
TrackState init_track(const FeatureMap& first_features, const BBox& gt_box,
                      const TrackConfig& config, const SegmentationHead& head,
                      const MemoryEncoder& encoder = encode_memory);

// One tracking step: calibrate, select, condition, prompt, decode twice,
// gate, commit. Never throws out of a frame; failures yield an empty mask
// and a degenerate-flagged trace.
std::pair<BinaryMask, FrameTrace> step(TrackState& state, const FeatureMap& features,
                                       const SegmentationHead& head,
                                       const MemoryEncoder& encoder = encode_memory);

TrackReport run_sequence(FeatureProvider& provider, const BBox& gt_box, const TrackConfig& config);
TrackReport run_sequence(FeatureProvider& provider, const BBox& gt_box, const TrackConfig& config,
                         const SegmentationHead& head, const MemoryEncoder& encoder);

}  // namespace prototrack
