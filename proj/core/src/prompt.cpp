#include "prototrack/prompt.hpp"

#include <cmath>
#include <numbers>

namespace prototrack {

namespace {

// Channel layout per axis: ceil(n/4) frequencies, four phases per frequency
// ((1+sin)/2, (1-sin)/2, (1+cos)/2, (1-cos)/2). Complete phase quads keep
// every pixel's encoding norm constant, which makes cosine similarity an
// exact monotone function of distance at the default channel counts.
double axis_channel_value(int j, int n, double u) {
  const int freqs = (n + 3) / 4;
  const int k = j % freqs;
  const int kind = j / freqs;
  const double omega = std::numbers::pi / static_cast<double>(1 << k);
  double v = (kind < 2) ? std::sin(omega * u) : std::cos(omega * u);
  if (kind == 1 || kind == 3) v = -v;
  return (1.0 + v) / 2.0;
}

ProbMask all_zero(int h, int w) { return ProbMask(h, w); }

ProbMask all_one(int h, int w) {
  ProbMask out(h, w);
  std::fill(out.data.begin(), out.data.end(), 1.0);
  return out;
}

}  // namespace

PositionalEncodingField positional_field(int h, int w, int c) {
  if (c < 4 || c % 2 != 0) throw BadShapeError("positional_field: channels must be even and >= 4");
  FeatureMap f(h, w, c);
  const int n = c / 2;
  for (int y = 0; y < h; ++y) {
    const double uy = (y + 0.5) / static_cast<double>(h);
    for (int x = 0; x < w; ++x) {
      const double ux = (x + 0.5) / static_cast<double>(w);
      for (int j = 0; j < n; ++j) {
        f.at(y, x, j) = axis_channel_value(j, n, uy);
        f.at(y, x, n + j) = axis_channel_value(j, n, ux);
      }
    }
  }
  return PositionalEncodingField{std::move(f)};
}

SimilarityMap pixel_cosine_map(const FeatureMap& f, const Prototype& p) {
  if (f.channels != p.channels()) throw BadShapeError("pixel_cosine_map: channel mismatch");
  const double pn = p.norm();
  if (pn == 0.0) throw ZeroVectorError("pixel_cosine_map: zero-norm prototype");
  SimilarityMap out(f.height, f.width);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      double dot = 0.0;
      double sq = 0.0;
      for (int c = 0; c < f.channels; ++c) {
        const double v = f.at(y, x, c);
        dot += v * p.data[c];
        sq += v * v;
      }
      out.at(y, x) = sq == 0.0 ? 0.0 : std::clamp(dot / (std::sqrt(sq) * pn), -1.0, 1.0);
    }
  }
  return out;
}

ProbMask discriminative_prior(const FeatureMap& features, const Prototype& fg,
                              const Prototype& bg, MapCounter* counter) {
  if (fg.channels() == 0 || bg.channels() == 0 || fg.is_zero() || bg.is_zero()) {
    return all_zero(features.height, features.width);
  }
  if (counter) ++counter->maps;
  const ProbMask fg_map = norm_spatial(pixel_cosine_map(features, fg));
  const ProbMask bg_map = norm_spatial(pixel_cosine_map(features, bg));
  SimilarityMap diff(features.height, features.width);
  for (size_t i = 0; i < diff.data.size(); ++i) {
    diff.data[i] = std::max(0.0, fg_map.data[i] - bg_map.data[i]);
  }
  return norm_spatial(diff);
}

ProbMask positional_prior(const PositionalEncodingField& field, const BinaryMask& prev_mask,
                          MapCounter* counter) {
  if (field.height() != prev_mask.height || field.width() != prev_mask.width) {
    throw BadShapeError("positional_prior: dims mismatch");
  }
  if (prev_mask.empty_mask()) {
    return all_one(field.height(), field.width());  // lost target: no constraint
  }
  if (counter) ++counter->maps;
  const Prototype pos = masked_gap(field.values, prev_mask);
  return norm_spatial(pixel_cosine_map(field.values, pos));
}

ProbMask fuse_prompt(const ProbMask& disc, const ProbMask& pos) {
  if (disc.height != pos.height || disc.width != pos.width) {
    throw BadShapeError("fuse_prompt: dims mismatch");
  }
  SimilarityMap prod(disc.height, disc.width);
  for (size_t i = 0; i < prod.data.size(); ++i) prod.data[i] = disc.data[i] * pos.data[i];
  return norm_spatial(prod);
}

ProbMask generate_prompt(const FeatureMap& features,
                         const std::vector<const Prototype*>& fg_prototypes,
                         const std::vector<const Prototype*>& bg_prototypes,
                         const PositionalEncodingField& field, const BinaryMask& prev_mask,
                         MapCounter* counter) {
  if (fg_prototypes.empty() || fg_prototypes.size() != bg_prototypes.size()) {
    throw BadShapeError("generate_prompt: need aligned, non-empty prototype lists");
  }
  const ProbMask pos = positional_prior(field, prev_mask, counter);
  ProbMask sum(features.height, features.width);
  for (size_t m = 0; m < fg_prototypes.size(); ++m) {
    const ProbMask disc =
        discriminative_prior(features, *fg_prototypes[m], *bg_prototypes[m], counter);
    const ProbMask fused = fuse_prompt(disc, pos);
    for (size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += fused.data[i];
  }
  const double inv = 1.0 / static_cast<double>(fg_prototypes.size());
  for (double& v : sum.data) v = std::clamp(v * inv, 0.0, 1.0);
  return sum;
}

PromptDecision cycle_consistent_gate(const FeatureMap& features, const ProbMask& prompt,
                                     const BinaryMask& mask_with_prompt,
                                     const BinaryMask& mask_without_prompt,
                                     const SelectedMemories& memories,
                                     const PositionalEncodingField& field, double beta,
                                     double binarize_threshold, MapCounter* counter) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("cycle_consistent_gate: beta outside (0,1)");
  if (mask_with_prompt.height != mask_without_prompt.height ||
      mask_with_prompt.width != mask_without_prompt.width) {
    throw BadShapeError("cycle_consistent_gate: candidate mask dims mismatch");
  }

  PromptDecision decision;
  decision.prompt = prompt;
  decision.per_memory_iou.assign(memories.size(), 0.0);

  // Degenerate predictions cannot seed reverse prototypes; fall through to
  // rejection so the unprompted mask is kept.
  const size_t area = mask_with_prompt.area();
  if (memories.size() == 0 || area == 0 || area == mask_with_prompt.data.size()) {
    return decision;
  }

  const Prototype cur_fg = masked_gap(features, mask_with_prompt);
  const Prototype cur_bg = masked_gap(features, mask_with_prompt.complement());
  const ProbMask reverse_pos = positional_prior(field, mask_with_prompt, counter);

  double total = 0.0;
  for (size_t m = 0; m < memories.size(); ++m) {
    const ProbMask disc = discriminative_prior(*memories.features[m], cur_fg, cur_bg, counter);
    const ProbMask reverse_prompt = fuse_prompt(disc, reverse_pos);
    const BinaryMask reverse_mask = binarize(reverse_prompt, binarize_threshold);
    decision.per_memory_iou[m] = mask_iou(reverse_mask, *memories.masks[m]);
    total += decision.per_memory_iou[m];
  }
  decision.mean_iou = total / static_cast<double>(memories.size());
  decision.accepted = decision.mean_iou >= beta;
  return decision;
}

}  // namespace prototrack
