#include "prototrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace prototrack {

const char* to_abbrev(Attribute a) {
  switch (a) {
    case Attribute::CM: return "CM";
    case Attribute::VC: return "VC";
    case Attribute::ROT: return "ROT";
    case Attribute::SV: return "SV";
    case Attribute::DEF: return "DEF";
    case Attribute::BC: return "BC";
    case Attribute::POC: return "POC";
    case Attribute::FOC: return "FOC";
    case Attribute::MB: return "MB";
    case Attribute::IV: return "IV";
    case Attribute::ARC: return "ARC";
    case Attribute::OV: return "OV";
    case Attribute::LR: return "LR";
    case Attribute::FM: return "FM";
  }
  return "?";
}

const std::vector<Attribute>& all_attributes() {
  static const std::vector<Attribute> kAll = {
      Attribute::CM, Attribute::VC,  Attribute::ROT, Attribute::SV, Attribute::DEF,
      Attribute::BC, Attribute::POC, Attribute::FOC, Attribute::MB, Attribute::IV,
      Attribute::ARC, Attribute::OV, Attribute::LR,  Attribute::FM};
  return kAll;
}

std::optional<Attribute> attribute_from_abbrev(const std::string& abbrev) {
  for (Attribute a : all_attributes()) {
    if (abbrev == to_abbrev(a)) return a;
  }
  return std::nullopt;
}

namespace {

void require_paired(const std::vector<BBox>& pred, const std::vector<BBox>& gt) {
  if (pred.size() != gt.size()) throw LengthMismatchError("metric: pred/gt length mismatch");
  if (pred.empty()) throw LengthMismatchError("metric: empty sequences");
}

std::vector<double> frame_ious(const std::vector<BBox>& pred, const std::vector<BBox>& gt) {
  std::vector<double> out(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) out[i] = box_iou(pred[i], gt[i]);
  return out;
}

double center_distance(const BBox& a, const BBox& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

// Per-axis scaled distance; agreement on an absent target counts as zero.
double normalized_distance(const BBox& pred, const BBox& gt) {
  if (gt.empty_box()) {
    return pred.empty_box() ? 0.0 : std::numeric_limits<double>::infinity();
  }
  const double dx = (pred.center_x() - gt.center_x()) / gt.w;
  const double dy = (pred.center_y() - gt.center_y()) / gt.h;
  return std::hypot(dx, dy);
}

}  // namespace

double box_iou(const BBox& a, const BBox& b) {
  const bool ea = a.empty_box();
  const bool eb = b.empty_box();
  if (ea && eb) return 1.0;
  if (ea || eb) return 0.0;
  const double ix0 = std::max(a.x, b.x);
  const double iy0 = std::max(a.y, b.y);
  const double ix1 = std::min(a.x + a.w, b.x + b.w);
  const double iy1 = std::min(a.y + a.h, b.y + b.h);
  const double iw = std::max(0.0, ix1 - ix0);
  const double ih = std::max(0.0, iy1 - iy0);
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni <= 0.0 ? 0.0 : inter / uni;
}

std::vector<std::pair<double, double>> success_curve(const std::vector<BBox>& pred,
                                                     const std::vector<BBox>& gt,
                                                     const EvalProtocol& protocol) {
  require_paired(pred, gt);
  const std::vector<double> ious = frame_ious(pred, gt);
  std::vector<std::pair<double, double>> curve;
  for (int i = 0; i < protocol.success_steps; ++i) {
    const double theta = static_cast<double>(i) / (protocol.success_steps - 1);
    size_t hits = 0;
    for (double v : ious) {
      if (v > theta) ++hits;
    }
    curve.emplace_back(theta, static_cast<double>(hits) / ious.size());
  }
  return curve;
}

double success_auc(const std::vector<BBox>& pred, const std::vector<BBox>& gt,
                   const EvalProtocol& protocol) {
  const auto curve = success_curve(pred, gt, protocol);
  double sum = 0.0;
  for (const auto& [theta, frac] : curve) sum += frac;
  return sum / curve.size();
}

double precision(const std::vector<BBox>& pred, const std::vector<BBox>& gt,
                 const EvalProtocol& protocol) {
  require_paired(pred, gt);
  size_t hits = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (center_distance(pred[i], gt[i]) <= protocol.precision_threshold) ++hits;
  }
  return static_cast<double>(hits) / pred.size();
}

std::vector<std::pair<double, double>> norm_precision_curve(const std::vector<BBox>& pred,
                                                            const std::vector<BBox>& gt,
                                                            const EvalProtocol& protocol) {
  require_paired(pred, gt);
  std::vector<double> dists(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) dists[i] = normalized_distance(pred[i], gt[i]);
  std::vector<std::pair<double, double>> curve;
  for (int i = 0; i < protocol.norm_precision_steps; ++i) {
    const double theta = 0.5 * static_cast<double>(i) / (protocol.norm_precision_steps - 1);
    size_t hits = 0;
    for (double d : dists) {
      if (d < theta) ++hits;
    }
    curve.emplace_back(theta, static_cast<double>(hits) / dists.size());
  }
  return curve;
}

double norm_precision(const std::vector<BBox>& pred, const std::vector<BBox>& gt,
                      const EvalProtocol& protocol) {
  const auto curve = norm_precision_curve(pred, gt, protocol);
  double sum = 0.0;
  for (const auto& [theta, frac] : curve) sum += frac;
  return sum / curve.size();
}

AoSr ao_sr(const std::vector<BBox>& pred, const std::vector<BBox>& gt) {
  require_paired(pred, gt);
  const std::vector<double> ious = frame_ious(pred, gt);
  AoSr out;
  for (double v : ious) {
    out.ao += v;
    if (v > 0.5) out.sr50 += 1.0;
    if (v > 0.75) out.sr75 += 1.0;
  }
  out.ao /= ious.size();
  out.sr50 /= ious.size();
  out.sr75 /= ious.size();
  return out;
}

MetricReport evaluate_sequence(const std::vector<BBox>& pred, const std::vector<BBox>& gt,
                               const AttributeSet& attributes, const EvalProtocol& protocol) {
  MetricReport r;
  r.frames = static_cast<int>(pred.size());
  r.auc = success_auc(pred, gt, protocol);
  r.precision = precision(pred, gt, protocol);
  r.norm_precision = norm_precision(pred, gt, protocol);
  const AoSr a = ao_sr(pred, gt);
  r.ao = a.ao;
  r.sr50 = a.sr50;
  r.sr75 = a.sr75;
  for (Attribute attr : attributes) r.per_attribute_auc[attr] = r.auc;
  return r;
}

std::map<Attribute, double> attribute_breakdown(
    const std::vector<std::pair<MetricReport, AttributeSet>>& reports) {
  if (reports.empty()) throw LengthMismatchError("attribute_breakdown: no reports");
  std::map<Attribute, double> sums;
  std::map<Attribute, int> counts;
  for (const auto& [report, attrs] : reports) {
    for (Attribute a : attrs) {
      sums[a] += report.auc;
      counts[a] += 1;
    }
  }
  std::map<Attribute, double> out;
  for (const auto& [a, sum] : sums) out[a] = sum / counts[a];
  return out;
}

}  // namespace prototrack
