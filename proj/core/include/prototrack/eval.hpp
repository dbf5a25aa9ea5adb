#pragma once

#include <map>
#include <vector>

#include "prototrack/attributes.hpp"
#include "prototrack/tensor.hpp"

namespace prototrack {

// Protocol constants; defaults follow the OTB/LaSOT conventions and are
// frozen for the acceptance tests.
struct EvalProtocol {
  int success_steps = 21;          // IoU thresholds 0.00, 0.05, ..., 1.00
  int norm_precision_steps = 51;   // normalized-distance thresholds 0.00, ..., 0.50
  double precision_threshold = 20.0;  // pixels
};

struct MetricReport {
  double auc = 0.0;
  double precision = 0.0;
  double norm_precision = 0.0;
  double ao = 0.0;
  double sr50 = 0.0;
  double sr75 = 0.0;
  std::map<Attribute, double> per_attribute_auc;
  int frames = 0;
};

// Intersection-over-union of boxes; both empty -> 1.0, one empty -> 0.0.
double box_iou(const BBox& a, const BBox& b);

// Mean over the success thresholds of the fraction of frames with IoU
// strictly above the threshold.
double success_auc(const std::vector<BBox>& pred, const std::vector<BBox>& gt,
                   const EvalProtocol& protocol = {});

// Fraction of frames whose center distance is at most 20 pixels.
double precision(const std::vector<BBox>& pred, const std::vector<BBox>& gt,
                 const EvalProtocol& protocol = {});

// AUC over normalized-distance thresholds; distances are scaled per axis by
// the ground-truth box extent.
double norm_precision(const std::vector<BBox>& pred, const std::vector<BBox>& gt,
                      const EvalProtocol& protocol = {});

struct AoSr {
  double ao = 0.0;
  double sr50 = 0.0;
  double sr75 = 0.0;
};

AoSr ao_sr(const std::vector<BBox>& pred, const std::vector<BBox>& gt);

// All box metrics for one sequence; attributes label the report.
MetricReport evaluate_sequence(const std::vector<BBox>& pred, const std::vector<BBox>& gt,
                               const AttributeSet& attributes = {},
                               const EvalProtocol& protocol = {});

// Mean AUC over the sequences carrying each attribute tag.
std::map<Attribute, double> attribute_breakdown(
    const std::vector<std::pair<MetricReport, AttributeSet>>& reports);

// Success / precision curve samples for CSV emission.
std::vector<std::pair<double, double>> success_curve(const std::vector<BBox>& pred,
                                                     const std::vector<BBox>& gt,
                                                     const EvalProtocol& protocol = {});
std::vector<std::pair<double, double>> norm_precision_curve(const std::vector<BBox>& pred,
                                                            const std::vector<BBox>& gt,
                                                            const EvalProtocol& protocol = {});

}  // namespace prototrack
