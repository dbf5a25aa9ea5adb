#include "prototrack/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace prototrack {

namespace {

void require_finite(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite value");
  }
}

void require_dims(int h, int w, int c) {
  if (h < 1 || w < 1 || c < 1) throw BadShapeError("dimensions must be >= 1");
}

}  // namespace

FeatureMap::FeatureMap(int h, int w, int c) : height(h), width(w), channels(c) {
  require_dims(h, w, c);
  data.assign(static_cast<size_t>(h) * w * c, 0.0);
}

FeatureMap::FeatureMap(int h, int w, int c, std::vector<double> values)
    : height(h), width(w), channels(c), data(std::move(values)) {
  require_dims(h, w, c);
  if (data.size() != static_cast<size_t>(h) * w * c) {
    throw BadShapeError("feature data length does not match H*W*C");
  }
  require_finite(data, "FeatureMap");
}

BinaryMask::BinaryMask(int h, int w) : height(h), width(w) {
  require_dims(h, w, 1);
  data.assign(static_cast<size_t>(h) * w, 0);
}

BinaryMask::BinaryMask(int h, int w, std::vector<std::uint8_t> values)
    : height(h), width(w), data(std::move(values)) {
  require_dims(h, w, 1);
  if (data.size() != static_cast<size_t>(h) * w) {
    throw BadShapeError("mask data length does not match H*W");
  }
  for (auto v : data) {
    if (v > 1) throw Error("BinaryMask: values must be 0 or 1");
  }
}

size_t BinaryMask::area() const {
  return static_cast<size_t>(std::accumulate(data.begin(), data.end(), size_t{0}));
}

BinaryMask BinaryMask::complement() const {
  BinaryMask out(height, width);
  for (size_t i = 0; i < data.size(); ++i) out.data[i] = data[i] ? 0 : 1;
  return out;
}

ProbMask::ProbMask(int h, int w) : height(h), width(w) {
  require_dims(h, w, 1);
  data.assign(static_cast<size_t>(h) * w, 0.0);
}

ProbMask::ProbMask(int h, int w, std::vector<double> values)
    : height(h), width(w), data(std::move(values)) {
  require_dims(h, w, 1);
  if (data.size() != static_cast<size_t>(h) * w) {
    throw BadShapeError("prob mask data length does not match H*W");
  }
  for (double v : data) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error("ProbMask: value outside [0,1]");
  }
}

Prototype::Prototype(std::vector<double> values) : data(std::move(values)) {
  require_finite(data, "Prototype");
}

double Prototype::norm() const {
  double s = 0.0;
  for (double v : data) s += v * v;
  return std::sqrt(s);
}

double cosine(const Prototype& a, const Prototype& b) {
  if (a.channels() != b.channels()) throw BadShapeError("cosine: channel mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw ZeroVectorError("cosine: zero-norm vector");
  double dot = 0.0;
  for (int i = 0; i < a.channels(); ++i) dot += a.data[i] * b.data[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

double norm_scalar(double s) {
  constexpr double kTol = 1e-9;
  if (s < -1.0 - kTol || s > 1.0 + kTol) throw DomainError("norm_scalar: input outside [-1,1]");
  return std::clamp((s + 1.0) / 2.0, 0.0, 1.0);
}

ProbMask norm_spatial(const SimilarityMap& m) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : m.data) {
    if (!std::isfinite(v)) throw Error("norm_spatial: non-finite value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  ProbMask out(m.height, m.width);
  if (hi == lo) return out;  // constant map carries no evidence
  const double inv = 1.0 / (hi - lo);
  for (size_t i = 0; i < m.data.size(); ++i) {
    out.data[i] = std::clamp((m.data[i] - lo) * inv, 0.0, 1.0);
  }
  return out;
}

Prototype masked_gap(const FeatureMap& f, const BinaryMask& m) {
  if (f.height != m.height || f.width != m.width) {
    throw BadShapeError("masked_gap: spatial dims mismatch");
  }
  std::vector<double> sum(f.channels, 0.0);
  size_t count = 0;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      if (!m.at(y, x)) continue;
      ++count;
      for (int c = 0; c < f.channels; ++c) sum[c] += f.at(y, x, c);
    }
  }
  if (count == 0) throw EmptyMaskError("masked_gap: mask has no foreground pixels");
  for (double& v : sum) v /= static_cast<double>(count);
  return Prototype(std::move(sum));
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.height != b.height || a.width != b.width) {
    throw BadShapeError("mask_iou: dims mismatch");
  }
  size_t inter = 0;
  size_t uni = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    inter += a.data[i] & b.data[i];
    uni += a.data[i] | b.data[i];
  }
  if (uni == 0) return 1.0;  // both empty: agreement on "no object"
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask binarize(const ProbMask& m, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw DomainError("binarize: threshold must lie in (0,1)");
  }
  BinaryMask out(m.height, m.width);
  for (size_t i = 0; i < m.data.size(); ++i) out.data[i] = m.data[i] > threshold ? 1 : 0;
  return out;
}

BBox mask_to_bbox(const BinaryMask& m) {
  int min_x = m.width, min_y = m.height, max_x = -1, max_y = -1;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (!m.at(y, x)) continue;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) return BBox{};
  return BBox{static_cast<double>(min_x), static_cast<double>(min_y),
              static_cast<double>(max_x - min_x + 1), static_cast<double>(max_y - min_y + 1)};
}

}  // namespace prototrack
