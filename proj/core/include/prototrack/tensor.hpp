#pragma once

#include <cstdint>
#include <vector>

#include "prototrack/errors.hpp"

namespace prototrack {

// Dense H x W x C feature map, row-major by (y, x, c). All values finite.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c);
  FeatureMap(int h, int w, int c, std::vector<double> values);

  double& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  double at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  size_t pixel_count() const { return static_cast<size_t>(height) * width; }
};

// {0,1} mask over an H x W grid.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int h, int w);
  BinaryMask(int h, int w, std::vector<std::uint8_t> values);

  std::uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t area() const;
  bool empty_mask() const { return area() == 0; }
  BinaryMask complement() const;
  bool operator==(const BinaryMask& other) const = default;
};

// [0,1]-valued mask (probability / prior map).
struct ProbMask {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  ProbMask() = default;
  ProbMask(int h, int w);
  ProbMask(int h, int w, std::vector<double> values);

  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
};

// Raw, unbounded similarity map prior to normalization.
struct SimilarityMap {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  SimilarityMap() = default;
  SimilarityMap(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0.0) {}

  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
};

// Length-C summary vector of foreground, background or positional content.
struct Prototype {
  std::vector<double> data;

  Prototype() = default;
  explicit Prototype(std::vector<double> values);

  int channels() const { return static_cast<int>(data.size()); }
  double norm() const;
  bool is_zero() const { return norm() == 0.0; }
};

// Axis-aligned box, top-left (x, y) plus extent. Empty box is w = h = 0.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool empty_box() const { return w <= 0.0 || h <= 0.0; }
  double area() const { return empty_box() ? 0.0 : w * h; }
  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
  bool operator==(const BBox& other) const = default;
};

// Cosine similarity, clamped to [-1, 1]. Throws ZeroVectorError when either
// vector has zero norm; the caller decides the fallback.
double cosine(const Prototype& a, const Prototype& b);

// Maps a scalar similarity in [-1, 1] to [0, 1] via (s + 1) / 2.
// Inputs outside the range by more than 1e-9 raise DomainError.
double norm_scalar(double s);

// Per-map min-max normalization. Constant maps normalize to all-zero,
// signalling "no discriminative evidence".
ProbMask norm_spatial(const SimilarityMap& m);

// Masked global average pooling: per-channel mean of f over m's 1-pixels.
Prototype masked_gap(const FeatureMap& f, const BinaryMask& m);

// Intersection-over-union of two masks; 1.0 when both are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

// Pixel = 1 iff value > threshold; threshold must lie in (0, 1).
BinaryMask binarize(const ProbMask& m, double threshold);

// Tight box around the 1-pixels; an empty mask yields the empty box.
BBox mask_to_bbox(const BinaryMask& m);

}  // namespace prototrack
