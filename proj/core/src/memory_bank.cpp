#include "prototrack/memory_bank.hpp"

#include <algorithm>
#include <cassert>

namespace prototrack {

PrototypicalMemoryBank::PrototypicalMemoryBank(double alpha, int window)
    : alpha_(alpha), window_(window) {
  if (alpha < 0.0 || alpha > 1.0) throw DomainError("bank: alpha outside [0,1]");
  if (window < 1) throw DomainError("bank: window must be >= 1");
}

bool PrototypicalMemoryBank::contains(int frame_index) const {
  return frame_index >= 1 && frame_index <= static_cast<int>(entries_.size());
}

const MemoryEntry& PrototypicalMemoryBank::entry(int frame_index) const {
  if (!contains(frame_index)) throw MissingEntryError("bank: no entry for requested frame");
  return entries_[static_cast<size_t>(frame_index) - 1];
}

const MemoryEntry& PrototypicalMemoryBank::add_memory(int frame_index, FeatureMap features,
                                                      const BinaryMask& mask, FeatureMap memory) {
  const int expected = static_cast<int>(entries_.size()) + 1;
  if (frame_index != expected) throw SequenceError("bank: frame index must be last + 1");
  if (features.height != mask.height || features.width != mask.width) {
    throw BadShapeError("bank: feature/mask dims mismatch");
  }

  MemoryEntry e;
  e.frame_index = frame_index;
  e.predicted_mask = mask;

  const BinaryMask bg_mask = mask.complement();
  if (mask.area() > 0) {
    e.fg_prototype = masked_gap(features, mask);
  }
  if (bg_mask.area() > 0) {
    e.bg_prototype = masked_gap(features, bg_mask);
  }

  // Lost-target fallback: carry the most recent usable prototypes forward so
  // scoring stays defined, and flag the frame so it never becomes a candidate.
  if (mask.area() == 0 || e.fg_prototype.is_zero()) {
    e.degenerate = true;
    e.fg_prototype = Prototype(std::vector<double>(features.channels, 0.0));
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
      if (!it->degenerate) {
        e.fg_prototype = it->fg_prototype;
        break;
      }
    }
  }
  if (bg_mask.area() == 0) {
    e.bg_prototype = Prototype(std::vector<double>(features.channels, 0.0));
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
      if (it->bg_prototype.channels() > 0 && !it->bg_prototype.is_zero()) {
        e.bg_prototype = it->bg_prototype;
        break;
      }
    }
  }

  e.features = std::move(features);
  e.memory = std::move(memory);
  entries_.push_back(std::move(e));
  return entries_.back();
}

std::vector<int> PrototypicalMemoryBank::candidate_set(int t) const {
  if (t < 2) throw DomainError("candidate_set: t must be >= 2");
  std::vector<int> out;
  const int lo = std::max(2, t - window_);
  const int hi = t - 2;
  for (int i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

std::optional<int> PrototypicalMemoryBank::resolve_position_anchor(int t) const {
  for (int i = t - 1; i >= 2; --i) {
    if (!contains(i)) continue;
    if (!entry(i).degenerate) return i;
  }
  return std::nullopt;
}

std::pair<double, double> PrototypicalMemoryBank::scores_against(
    const Prototype& candidate, const std::optional<int>& pos_anchor, int* evaluations) const {
  const double s_feat = norm_scalar(cosine(candidate, entry(1).fg_prototype));
  ++*evaluations;
  if (!pos_anchor) {
    // No usable position anchor: the feature score stands in (alpha acts as 0).
    return {s_feat, s_feat};
  }
  const double s_pos = norm_scalar(cosine(candidate, entry(*pos_anchor).fg_prototype));
  ++*evaluations;
  return {s_feat, s_pos};
}

std::pair<double, double> PrototypicalMemoryBank::anchor_scores(int tau, int t) const {
  if (!contains(1) || !contains(tau) || !contains(t - 1)) {
    throw MissingEntryError("anchor_scores: required entries missing");
  }
  int evaluations = 0;
  return scores_against(entry(tau).fg_prototype, resolve_position_anchor(t), &evaluations);
}

CalibrationResult PrototypicalMemoryBank::calibrate(int t) const {
  if (t < 2) throw DomainError("calibrate: t must be >= 2");
  if (!contains(t - 1)) throw MissingEntryError("calibrate: entry for t-1 missing");

  CalibrationResult result;
  result.position_anchor = resolve_position_anchor(t);

  std::vector<int> selected;
  selected.push_back(1);
  if (result.position_anchor && *result.position_anchor != 1) {
    selected.push_back(*result.position_anchor);
  }

  const bool feature_anchor_usable = !entry(1).fg_prototype.is_zero();

  std::vector<CandidateScore> scored;
  for (int tau : candidate_set(t)) {
    if (!contains(tau)) continue;
    const MemoryEntry& cand = entry(tau);
    if (cand.degenerate) continue;  // intercept: never condition on lost frames
    if (result.position_anchor && tau == *result.position_anchor) continue;

    CandidateScore s;
    s.frame = tau;
    if (feature_anchor_usable) {
      std::tie(s.feat, s.pos) =
          scores_against(cand.fg_prototype, result.position_anchor, &result.similarity_evaluations);
    } else if (result.position_anchor) {
      s.pos = norm_scalar(cosine(cand.fg_prototype, entry(*result.position_anchor).fg_prototype));
      ++result.similarity_evaluations;
      s.feat = 0.5;  // neutral: anchor carries no information
    } else {
      s.feat = s.pos = 0.5;
    }
    s.fused = fuse_score(s.feat, s.pos, alpha_);
    scored.push_back(s);
  }
  assert(result.similarity_evaluations <= 2 * window_);

  std::vector<CandidateScore> ranked = scored;
  std::stable_sort(ranked.begin(), ranked.end(), [](const CandidateScore& a, const CandidateScore& b) {
    if (a.fused != b.fused) return a.fused > b.fused;
    return a.frame > b.frame;  // tie toward the more recent frame
  });
  if (ranked.size() > 5) ranked.resize(5);

  std::vector<int> top;
  for (const CandidateScore& s : ranked) top.push_back(s.frame);
  std::sort(top.begin(), top.end());
  selected.insert(selected.end(), top.begin(), top.end());

  result.selected_indices = std::move(selected);
  std::sort(scored.begin(), scored.end(),
            [](const CandidateScore& a, const CandidateScore& b) { return a.frame < b.frame; });
  result.scores = std::move(scored);
  return result;
}

SelectedMemories PrototypicalMemoryBank::select_memories(const CalibrationResult& result) const {
  SelectedMemories out;
  for (int idx : result.selected_indices) {
    const MemoryEntry& e = entry(idx);  // throws MissingEntryError when stale
    out.indices.push_back(idx);
    out.memories.push_back(&e.memory);
    out.features.push_back(&e.features);
    out.fg_prototypes.push_back(&e.fg_prototype);
    out.bg_prototypes.push_back(&e.bg_prototype);
    out.masks.push_back(&e.predicted_mask);
  }
  return out;
}

double fuse_score(double s_feat, double s_pos, double alpha) {
  if (s_feat < 0.0 || s_feat > 1.0 || s_pos < 0.0 || s_pos > 1.0) {
    throw DomainError("fuse_score: scores outside [0,1]");
  }
  if (alpha < 0.0 || alpha > 1.0) throw DomainError("fuse_score: alpha outside [0,1]");
  return (1.0 - alpha) * s_feat + alpha * s_pos;
}

}  // namespace prototrack
