#include "prototrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace prototrack {

std::string to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::samite: return "samite";
    case SelectionStrategy::sam2_default: return "sam2_default";
    case SelectionStrategy::feature_only: return "feature_only";
    case SelectionStrategy::position_only: return "position_only";
    case SelectionStrategy::recent_only: return "recent_only";
  }
  return "unknown";
}

std::optional<SelectionStrategy> strategy_from_string(const std::string& name) {
  for (SelectionStrategy s :
       {SelectionStrategy::samite, SelectionStrategy::sam2_default, SelectionStrategy::feature_only,
        SelectionStrategy::position_only, SelectionStrategy::recent_only}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

DefaultSegmentationHead::DefaultSegmentationHead(double threshold) : threshold_(threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw DomainError("segmentation head: threshold outside (0,1)");
  }
}

namespace {

// Keeps only the 4-connected component holding the strongest activation peak.
BinaryMask strongest_component(const BinaryMask& mask, const ProbMask& activation) {
  const int h = mask.height;
  const int w = mask.width;
  std::vector<int> label(static_cast<size_t>(h) * w, -1);
  int best_label = -1;
  double best_peak = -1.0;
  int next = 0;

  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const size_t start = static_cast<size_t>(sy) * w + sx;
      if (!mask.data[start] || label[start] >= 0) continue;
      const int cur = next++;
      double peak = -1.0;
      std::deque<std::pair<int, int>> queue{{sy, sx}};
      label[start] = cur;
      while (!queue.empty()) {
        auto [y, x] = queue.front();
        queue.pop_front();
        peak = std::max(peak, activation.at(y, x));
        constexpr int dy[] = {-1, 1, 0, 0};
        constexpr int dx[] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
          const int ny = y + dy[d];
          const int nx = x + dx[d];
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          const size_t ni = static_cast<size_t>(ny) * w + nx;
          if (!mask.data[ni] || label[ni] >= 0) continue;
          label[ni] = cur;
          queue.emplace_back(ny, nx);
        }
      }
      if (peak > best_peak) {
        best_peak = peak;
        best_label = cur;
      }
    }
  }

  BinaryMask out(h, w);
  if (best_label < 0) return out;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = label[i] == best_label ? 1 : 0;
  return out;
}

struct PixelBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
};

PixelBox to_pixel_box(const BBox& box) {
  PixelBox p;
  p.x0 = static_cast<int>(std::llround(box.x));
  p.y0 = static_cast<int>(std::llround(box.y));
  p.x1 = p.x0 + static_cast<int>(std::llround(box.w)) - 1;
  p.y1 = p.y0 + static_cast<int>(std::llround(box.h)) - 1;
  return p;
}

}  // namespace

BinaryMask DefaultSegmentationHead::decode(const FeatureMap& conditioned,
                                           const ProbMask* prompt) const {
  if (conditioned.channels < 2) throw BadShapeError("decode: conditioned features lack activation");
  if (prompt && (prompt->height != conditioned.height || prompt->width != conditioned.width)) {
    throw BadShapeError("decode: prompt dims mismatch");
  }
  const int act_channel = conditioned.channels - 1;
  ProbMask activation(conditioned.height, conditioned.width);
  for (int y = 0; y < conditioned.height; ++y) {
    for (int x = 0; x < conditioned.width; ++x) {
      double a = norm_scalar(conditioned.at(y, x, act_channel));
      if (prompt) a *= prompt->at(y, x);
      activation.at(y, x) = a;
    }
  }
  const BinaryMask raw = binarize(activation, threshold_);
  return strongest_component(raw, activation);
}

BinaryMask DefaultSegmentationHead::decode_box(const FeatureMap& features, const BBox& box) const {
  if (box.empty_box()) throw BadPromptError("decode_box: empty box prompt");
  const PixelBox p = to_pixel_box(box);
  if (p.x0 < 0 || p.y0 < 0 || p.x1 >= features.width || p.y1 >= features.height) {
    throw BadPromptError("decode_box: box outside frame bounds");
  }

  BinaryMask box_mask(features.height, features.width);
  for (int y = p.y0; y <= p.y1; ++y) {
    for (int x = p.x0; x <= p.x1; ++x) box_mask.at(y, x) = 1;
  }
  const Prototype interior_mean = masked_gap(features, box_mask);
  if (interior_mean.is_zero()) return box_mask;

  BinaryMask out(features.height, features.width);
  const SimilarityMap sims = pixel_cosine_map(features, interior_mean);
  size_t kept = 0;
  for (int y = p.y0; y <= p.y1; ++y) {
    for (int x = p.x0; x <= p.x1; ++x) {
      if (sims.at(y, x) > threshold_) {
        out.at(y, x) = 1;
        ++kept;
      }
    }
  }
  // A box whose interior shows no coherent contrast falls back to the box.
  return kept == 0 ? box_mask : out;
}

FeatureMap encode_memory(const FeatureMap& features, const BinaryMask& mask) {
  if (features.height != mask.height || features.width != mask.width) {
    throw BadShapeError("encode_memory: dims mismatch");
  }
  FeatureMap out = features;
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      if (mask.at(y, x)) continue;
      for (int c = 0; c < out.channels; ++c) out.at(y, x, c) = 0.0;
    }
  }
  return out;
}

FeatureMap condition_features(const FeatureMap& features,
                              const std::vector<const FeatureMap*>& memories) {
  if (memories.empty()) throw BadShapeError("condition_features: need at least one memory");
  std::vector<double> proto(features.channels, 0.0);
  for (const FeatureMap* mem : memories) {
    if (mem->height != features.height || mem->width != features.width ||
        mem->channels != features.channels) {
      throw BadShapeError("condition_features: memory dims mismatch");
    }
    const double inv = 1.0 / static_cast<double>(mem->pixel_count());
    size_t i = 0;
    for (size_t px = 0; px < mem->pixel_count(); ++px) {
      for (int c = 0; c < mem->channels; ++c) proto[c] += mem->data[i++] * inv;
    }
  }
  for (double& v : proto) v /= static_cast<double>(memories.size());

  FeatureMap out(features.height, features.width, features.channels + 1);
  const Prototype p{std::vector<double>(proto)};
  SimilarityMap act(features.height, features.width);
  if (!p.is_zero()) act = pixel_cosine_map(features, p);
  for (int y = 0; y < features.height; ++y) {
    for (int x = 0; x < features.width; ++x) {
      for (int c = 0; c < features.channels; ++c) out.at(y, x, c) = features.at(y, x, c);
      out.at(y, x, features.channels) = act.at(y, x);
    }
  }
  return out;
}

TrackState init_track(const FeatureMap& first_features, const BBox& gt_box,
                      const TrackConfig& config, const SegmentationHead& head,
                      const MemoryEncoder& encoder) {
  TrackState state;
  state.config = config;
  double alpha = config.alpha;
  if (config.strategy == SelectionStrategy::feature_only) alpha = 0.0;
  if (config.strategy == SelectionStrategy::position_only) alpha = 1.0;
  state.bank = PrototypicalMemoryBank(alpha, config.window);

  const BinaryMask first_mask = head.decode_box(first_features, gt_box);
  state.bank.add_memory(1, first_features, first_mask, encoder(first_features, first_mask));
  state.last_mask = first_mask;
  state.frame_count = 1;
  state.field = positional_field(first_features.height, first_features.width,
                                 first_features.channels % 2 == 0 && first_features.channels >= 4
                                     ? first_features.channels
                                     : 16);
  return state;
}

namespace {

CalibrationResult fixed_selection(int t, SelectionStrategy strategy) {
  CalibrationResult result;
  if (strategy == SelectionStrategy::sam2_default) {
    result.selected_indices.push_back(1);
    for (int i = std::max(2, t - 6); i <= t - 1; ++i) result.selected_indices.push_back(i);
  } else {  // recent_only
    for (int i = std::max(1, t - 7); i <= t - 1; ++i) result.selected_indices.push_back(i);
  }
  return result;
}

}  // namespace

std::pair<BinaryMask, FrameTrace> step(TrackState& state, const FeatureMap& features,
                                       const SegmentationHead& head, const MemoryEncoder& encoder) {
  if (state.frame_count < 1) throw SequenceError("step: track not initialized");
  const int t = state.frame_count + 1;

  FrameTrace trace;
  trace.frame = t;
  BinaryMask final_mask(features.height, features.width);

  try {
    CalibrationResult calib;
    switch (state.config.strategy) {
      case SelectionStrategy::sam2_default:
      case SelectionStrategy::recent_only:
        calib = fixed_selection(t, state.config.strategy);
        break;
      default:
        calib = state.bank.calibrate(t);
        break;
    }
    trace.selected = calib.selected_indices;
    trace.scores = calib.scores;
    trace.position_anchor = calib.position_anchor;
    trace.cosine_evaluations = calib.similarity_evaluations;

    const SelectedMemories sel = state.bank.select_memories(calib);
    const FeatureMap conditioned = condition_features(features, sel.memories);

    MapCounter counter;
    const ProbMask prompt = generate_prompt(features, sel.fg_prototypes, sel.bg_prototypes,
                                            state.field, state.last_mask, &counter);
    const BinaryMask mask_with = head.decode(conditioned, &prompt);
    const BinaryMask mask_without = head.decode(conditioned, nullptr);

    const PromptDecision decision =
        cycle_consistent_gate(features, prompt, mask_with, mask_without, sel, state.field,
                              state.config.beta, state.config.binarize_threshold, &counter);
    trace.map_computations = counter.maps;
    trace.prompt_accepted = decision.accepted;
    trace.mean_iou = decision.mean_iou;
    trace.per_memory_iou = decision.per_memory_iou;

    final_mask = decision.accepted ? mask_with : mask_without;
  } catch (const Error&) {
    // A frame never aborts the run; it enters the bank as a lost frame.
    final_mask = BinaryMask(features.height, features.width);
  }

  const MemoryEntry& entry =
      state.bank.add_memory(t, features, final_mask, encoder(features, final_mask));
  trace.degenerate = entry.degenerate;
  trace.box = mask_to_bbox(final_mask);

  state.last_mask = final_mask;
  state.frame_count = t;
  return {final_mask, trace};
}

TrackReport run_sequence(FeatureProvider& provider, const BBox& gt_box, const TrackConfig& config) {
  const DefaultSegmentationHead head(config.seg_threshold);
  return run_sequence(provider, gt_box, config, head, encode_memory);
}

TrackReport run_sequence(FeatureProvider& provider, const BBox& gt_box, const TrackConfig& config,
                         const SegmentationHead& head, const MemoryEncoder& encoder) {
  auto first = provider.next_frame();
  if (!first) throw SequenceError("run_sequence: provider yielded no frames");

  TrackState state = init_track(first->second, gt_box, config, head, encoder);

  TrackReport report;
  FrameTrace init_trace;
  init_trace.frame = first->first;
  init_trace.box = mask_to_bbox(state.last_mask);
  init_trace.degenerate = state.bank.entry(1).degenerate;
  report.traces.push_back(std::move(init_trace));
  report.boxes.push_back(report.traces.back().box);

  while (auto frame = provider.next_frame()) {
    auto [mask, trace] = step(state, frame->second, head, encoder);
    report.boxes.push_back(trace.box);
    report.traces.push_back(std::move(trace));
  }
  return report;
}

}  // namespace prototrack
