#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "prototrack/attributes.hpp"
#include "prototrack/pipeline.hpp"
#include "prototrack/tensor.hpp"

namespace prototrack {

// Piecewise-linear blob path. Centers are clamped to the first/last waypoint
// outside the covered frame range; a single waypoint pins the blob in place.
struct Waypoint {
  int frame = 1;
  double cx = 0.0;
  double cy = 0.0;
};

struct Trajectory {
  std::vector<Waypoint> waypoints;
  double radius = 3.0;

  std::pair<double, double> center(int t) const;  // (cx, cy)
};

struct OcclusionEvent {
  int start = 1;
  int end = 1;
  bool full = true;
  double fraction = 1.0;  // occluded share of blob rows when partial
};

struct DistractorSpec {
  Trajectory trajectory;
  double similarity = 0.9;  // cosine to the initial target embedding
};

// Fully scripted scenario; every render is a pure function of this spec.
struct ScenarioSpec {
  std::string name;
  int height = 32;
  int width = 32;
  int channels = 16;
  int frames = 60;
  std::uint64_t seed = 1;
  double noise_amplitude = 0.05;
  Trajectory target;
  double target_bg_similarity = 0.0;
  double appearance_drift_deg = 0.0;  // per-frame rotation of the target embedding
  std::vector<DistractorSpec> distractors;
  std::vector<OcclusionEvent> occlusions;
};

struct FrameTruth {
  BinaryMask gt_mask;
  BBox gt_box;
  bool visible = true;
  AttributeSet attributes;
};

// Unit embeddings realized for a spec (before per-pixel noise).
struct ScenarioEmbeddings {
  Prototype target;  // appearance at frame 1
  Prototype background;
  std::vector<Prototype> distractors;

  Prototype target_at(int t, double drift_deg) const;

 private:
  friend ScenarioEmbeddings scenario_embeddings(const ScenarioSpec& spec);
  Prototype drift_axis_;
};

ScenarioEmbeddings scenario_embeddings(const ScenarioSpec& spec);

std::pair<FeatureMap, FrameTruth> render_frame(const ScenarioSpec& spec, int t);

// The seven named scenarios used by the evaluation harness.
std::vector<ScenarioSpec> standard_suite(std::uint64_t seed = 1);

// Plain-text config format, one key per line. Round-trips exactly.
std::string serialize_scenario(const ScenarioSpec& spec);
ScenarioSpec parse_scenario(const std::string& text);

// FeatureProvider over a scenario; frames are rendered on demand.
class ScenarioFeatureProvider : public FeatureProvider {
 public:
  explicit ScenarioFeatureProvider(ScenarioSpec spec);

  int height() const override { return spec_.height; }
  int width() const override { return spec_.width; }
  int channels() const override { return spec_.channels; }
  int frame_count() const override { return spec_.frames; }
  std::optional<std::pair<int, FeatureMap>> next_frame() override;

  const ScenarioSpec& spec() const { return spec_; }

 private:
  ScenarioSpec spec_;
  int next_ = 1;
};

}  // namespace prototrack
