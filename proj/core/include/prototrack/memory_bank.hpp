#pragma once

#include <optional>
#include <vector>

#include "prototrack/tensor.hpp"

namespace prototrack {

// One tracked frame's record: encoded memory, prototypes and prediction.
// Raw features are kept alongside the encoded memory because the reverse
// prompts of cycle checking need the full scene content, which the masked
// encoding discards.
struct MemoryEntry {
  int frame_index = 0;
  FeatureMap features;
  FeatureMap memory;
  Prototype fg_prototype;
  Prototype bg_prototype;
  BinaryMask predicted_mask;
  bool degenerate = false;  // empty or zero-information prediction
};

struct CandidateScore {
  int frame = 0;
  double feat = 0.0;
  double pos = 0.0;
  double fused = 0.0;
};

// Output of one calibration pass: selected frames (anchors first), the
// per-candidate scores and how many cosine evaluations were spent.
struct CalibrationResult {
  std::vector<int> selected_indices;
  std::vector<CandidateScore> scores;
  int similarity_evaluations = 0;
  std::optional<int> position_anchor;
};

struct SelectedMemories {
  std::vector<int> indices;
  std::vector<const FeatureMap*> memories;
  std::vector<const FeatureMap*> features;
  std::vector<const Prototype*> fg_prototypes;
  std::vector<const Prototype*> bg_prototypes;
  std::vector<const BinaryMask*> masks;

  size_t size() const { return indices.size(); }
};

// Ordered per-frame store with dual-anchor scoring and top-5 calibration.
// Single writer; calibration and selection are read-only.
class PrototypicalMemoryBank {
 public:
  explicit PrototypicalMemoryBank(double alpha = 0.3, int window = 30);

  double alpha() const { return alpha_; }
  int window() const { return window_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const std::vector<MemoryEntry>& entries() const { return entries_; }
  bool contains(int frame_index) const;
  const MemoryEntry& entry(int frame_index) const;

  // Appends frame `frame_index` (must be the previous index + 1). Prototypes
  // are pooled from `features` under `mask`; an empty mask carries forward
  // the most recent non-degenerate prototypes and flags the entry.
  const MemoryEntry& add_memory(int frame_index, FeatureMap features, const BinaryMask& mask,
                                FeatureMap memory);

  // Candidate interval [max(2, t-m), t-2], ascending; empty when t <= 3.
  std::vector<int> candidate_set(int t) const;

  // Feature-wise and position-wise scores of candidate tau at frame t.
  // The position anchor is frame t-1, falling back to the most recent
  // non-degenerate frame; without one, the feature score stands in.
  std::pair<double, double> anchor_scores(int tau, int t) const;

  // Anchors plus top-5 candidates by fused score; ties prefer recency.
  // Performs at most 2m cosine evaluations.
  CalibrationResult calibrate(int t) const;

  SelectedMemories select_memories(const CalibrationResult& result) const;

 private:
  std::pair<double, double> scores_against(const Prototype& candidate,
                                           const std::optional<int>& pos_anchor,
                                           int* evaluations) const;
  std::optional<int> resolve_position_anchor(int t) const;

  std::vector<MemoryEntry> entries_;
  double alpha_;
  int window_;
};

// Fused calibration score: (1 - alpha) * s_feat + alpha * s_pos.
double fuse_score(double s_feat, double s_pos, double alpha);

}  // namespace prototrack
