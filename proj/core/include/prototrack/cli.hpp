#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prototrack/eval.hpp"
#include "prototrack/pipeline.hpp"
#include "prototrack/synth_world.hpp"

namespace prototrack::cli {

// One resolved invocation of the tool. Exactly one of `scenario` (suite name
// or config-file path) and `sequence_dir` may be set for tracking runs.
struct RunConfig {
  TrackConfig track;
  std::optional<std::uint64_t> seed;
  std::string scenario;
  std::string sequence_dir;
  std::string out_dir;  // empty: $PROTO_TRACK_OUT, then "results"
};

void validate_config(const RunConfig& config, bool needs_input);
std::string resolve_out_dir(const RunConfig& config);
std::uint64_t effective_seed(const RunConfig& config);

// LaSOT-style per-sequence annotation.
struct AnnotationSequence {
  std::vector<BBox> boxes;
  std::vector<std::uint8_t> full_occlusion;  // empty or one flag per box
  std::vector<std::uint8_t> out_of_view;
  AttributeSet attributes;
};

// Parses `x,y,w,h` lines. Throws ParseError with the offending line number.
AnnotationSequence parse_groundtruth(const std::string& text);

// Parses a single comma-separated 0/1 line (companion flag files).
std::vector<std::uint8_t> parse_flag_line(const std::string& text);

// Reads groundtruth.txt plus optional full_occlusion.txt / out_of_view.txt /
// attributes.txt from a sequence directory.
AnnotationSequence load_sequence_dir(const std::string& dir);

// Serializes boxes in the ground-truth text convention.
std::string serialize_boxes(const std::vector<BBox>& boxes);

// Result of one tracked sequence, ready for reporting.
struct SequenceRun {
  std::string name;
  TrackReport report;
  std::vector<BBox> gt_boxes;
  AttributeSet attributes;
  MetricReport metrics;
};

SequenceRun run_scenario(const ScenarioSpec& spec, const TrackConfig& config);

// Builds a desk-scale scenario whose target follows a recorded annotation,
// so annotated sequences can drive the engine without real features.
ScenarioSpec scenario_from_annotation(const AnnotationSequence& annotation,
                                      const std::string& name, std::uint64_t seed,
                                      double* scale_out = nullptr);

// Subcommands. All return 0 on success after writing every requested output.
int cmd_track(const RunConfig& config);
int cmd_compare(const RunConfig& config, const std::vector<SelectionStrategy>& strategies);
int cmd_sweep(const RunConfig& config, const std::string& param,
              const std::vector<double>& values);

}  // namespace prototrack::cli
