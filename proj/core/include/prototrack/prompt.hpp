#pragma once

#include <vector>

#include "prototrack/memory_bank.hpp"
#include "prototrack/tensor.hpp"

namespace prototrack {

// Deterministic 2D sinusoidal encoding grid, values in [0, 1]. The first
// half of the channels encodes normalized y, the second half normalized x.
struct PositionalEncodingField {
  FeatureMap values;

  int height() const { return values.height; }
  int width() const { return values.width; }
  int channels() const { return values.channels; }
};

// Counts similarity-map computations (one unit per discriminative or
// positional prior), for the per-frame complexity budget.
struct MapCounter {
  int maps = 0;
};

// Outcome of the cycle-consistency check for one frame's prompt.
struct PromptDecision {
  ProbMask prompt;
  bool accepted = false;
  double mean_iou = 0.0;
  std::vector<double> per_memory_iou;
};

// Builds the encoding field. Channels must be even and >= 4. Frequencies
// use the lowest octaves only so that cosine similarity between encodings
// decays monotonically with spatial distance.
PositionalEncodingField positional_field(int h, int w, int c);

// Per-pixel cosine between a feature map and a prototype. Zero-norm pixels
// contribute similarity 0.
SimilarityMap pixel_cosine_map(const FeatureMap& f, const Prototype& p);

// FG-minus-BG prior: norm(relu(norm(cos(F, fg)) - norm(cos(F, bg)))).
// A zero-norm prototype on either side yields an all-zero prior.
ProbMask discriminative_prior(const FeatureMap& features, const Prototype& fg,
                              const Prototype& bg, MapCounter* counter = nullptr);

// Prior from the previous prediction's pooled positional encoding; an empty
// previous mask places no constraint (all-one prior).
ProbMask positional_prior(const PositionalEncodingField& field, const BinaryMask& prev_mask,
                          MapCounter* counter = nullptr);

// Re-weights the discriminative prior by the positional prior and renormalizes.
ProbMask fuse_prompt(const ProbMask& disc, const ProbMask& pos);

// Pixelwise average of the per-memory fused prompts.
ProbMask generate_prompt(const FeatureMap& features,
                         const std::vector<const Prototype*>& fg_prototypes,
                         const std::vector<const Prototype*>& bg_prototypes,
                         const PositionalEncodingField& field, const BinaryMask& prev_mask,
                         MapCounter* counter = nullptr);

// Reverse-generates a prompt on every selected memory's feature map from the
// with-prompt prediction, binarizes it and compares against that memory's
// stored mask; the prompt is accepted iff the mean IoU reaches beta.
PromptDecision cycle_consistent_gate(const FeatureMap& features, const ProbMask& prompt,
                                     const BinaryMask& mask_with_prompt,
                                     const BinaryMask& mask_without_prompt,
                                     const SelectedMemories& memories,
                                     const PositionalEncodingField& field, double beta,
                                     double binarize_threshold = 0.5,
                                     MapCounter* counter = nullptr);

}  // namespace prototrack
