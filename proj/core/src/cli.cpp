#include "prototrack/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace prototrack::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Coordinates print as integers when integral, else with four decimals.
std::string format_coord(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

json trace_to_json(const FrameTrace& t) {
  json scores = json::array();
  for (const CandidateScore& s : t.scores) {
    scores.push_back({s.frame, s.feat, s.pos, s.fused});
  }
  json record{
      {"frame", t.frame},
      {"selected", t.selected},
      {"scores", scores},
      {"cosine_evaluations", t.cosine_evaluations},
      {"map_computations", t.map_computations},
      {"prompt_accepted", t.prompt_accepted},
      {"mean_iou", t.mean_iou},
      {"per_memory_iou", t.per_memory_iou},
      {"degenerate", t.degenerate},
      {"box", {t.box.x, t.box.y, t.box.w, t.box.h}},
  };
  if (t.position_anchor) {
    record["position_anchor"] = *t.position_anchor;
  } else {
    record["position_anchor"] = nullptr;
  }
  return record;
}

json metrics_to_json(const MetricReport& m) {
  json attrs = json::object();
  for (const auto& [a, v] : m.per_attribute_auc) attrs[to_abbrev(a)] = v;
  return json{{"frames", m.frames},       {"auc", m.auc},
              {"precision", m.precision}, {"norm_precision", m.norm_precision},
              {"ao", m.ao},               {"sr50", m.sr50},
              {"sr75", m.sr75},           {"per_attribute_auc", attrs}};
}

json config_to_json(const TrackConfig& c, std::uint64_t seed) {
  return json{{"alpha", c.alpha},
              {"window_m", c.window},
              {"beta", c.beta},
              {"strategy", to_string(c.strategy)},
              {"seg_threshold", c.seg_threshold},
              {"binarize_threshold", c.binarize_threshold},
              {"seed", seed}};
}

std::string curve_csv(const std::vector<std::pair<double, double>>& curve, const char* header) {
  std::ostringstream out;
  out << header << "\n";
  for (const auto& [theta, frac] : curve) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%.3f,%.10f\n", theta, frac);
    out << buf;
  }
  return out.str();
}

struct AggregateRow {
  double ao = 0.0, auc = 0.0, precision = 0.0, norm_precision = 0.0, sr50 = 0.0, sr75 = 0.0;
};

AggregateRow aggregate(const std::vector<SequenceRun>& runs) {
  AggregateRow row;
  for (const SequenceRun& r : runs) {
    row.ao += r.metrics.ao;
    row.auc += r.metrics.auc;
    row.precision += r.metrics.precision;
    row.norm_precision += r.metrics.norm_precision;
    row.sr50 += r.metrics.sr50;
    row.sr75 += r.metrics.sr75;
  }
  const double n = static_cast<double>(runs.size());
  row.ao /= n;
  row.auc /= n;
  row.precision /= n;
  row.norm_precision /= n;
  row.sr50 /= n;
  row.sr75 /= n;
  return row;
}

std::vector<SequenceRun> run_suite(std::uint64_t seed, const TrackConfig& config) {
  std::vector<ScenarioSpec> suite = standard_suite(seed);
  std::vector<std::future<SequenceRun>> jobs;
  jobs.reserve(suite.size());
  for (const ScenarioSpec& spec : suite) {
    jobs.push_back(std::async(std::launch::async,
                              [spec, config]() { return run_scenario(spec, config); }));
  }
  std::vector<SequenceRun> out;
  out.reserve(jobs.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

void append_table_row(std::ostringstream& out, const std::string& a, const std::string& b,
                      const AggregateRow& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-14s %-22s %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f\n", a.c_str(),
                b.c_str(), m.ao, m.auc, m.precision, m.norm_precision, m.sr50, m.sr75);
  out << buf;
}

const char* kTableHeader =
    "strategy       scenario                     ao      auc     prec   nprec     sr50     sr75\n";

AggregateRow row_of(const MetricReport& m) {
  return AggregateRow{m.ao, m.auc, m.precision, m.norm_precision, m.sr50, m.sr75};
}

ScenarioSpec resolve_scenario(const RunConfig& config) {
  const std::uint64_t seed = effective_seed(config);
  for (ScenarioSpec& spec : standard_suite(seed)) {
    if (spec.name == config.scenario) return spec;
  }
  if (!fs::exists(config.scenario)) {
    throw Error("unknown scenario '" + config.scenario + "' (not a suite name or file)");
  }
  std::ifstream in(config.scenario);
  std::stringstream buffer;
  buffer << in.rdbuf();
  ScenarioSpec spec = parse_scenario(buffer.str());
  if (config.seed) spec.seed = *config.seed;
  if (spec.name.empty()) spec.name = fs::path(config.scenario).stem().string();
  return spec;
}

}  // namespace

void validate_config(const RunConfig& config, bool needs_input) {
  const TrackConfig& t = config.track;
  if (t.alpha < 0.0 || t.alpha > 1.0) throw DomainError("config: alpha outside [0,1]");
  if (t.beta <= 0.0 || t.beta >= 1.0) throw DomainError("config: beta outside (0,1)");
  if (t.window < 1) throw DomainError("config: m must be >= 1");
  if (t.seg_threshold <= 0.0 || t.seg_threshold >= 1.0) {
    throw DomainError("config: seg-threshold outside (0,1)");
  }
  if (t.binarize_threshold <= 0.0 || t.binarize_threshold >= 1.0) {
    throw DomainError("config: binarize-threshold outside (0,1)");
  }
  const bool has_scenario = !config.scenario.empty();
  const bool has_dir = !config.sequence_dir.empty();
  if (needs_input && has_scenario == has_dir) {
    throw Error("config: exactly one of --scenario and --sequence-dir must be given");
  }
  if (!needs_input && (has_scenario || has_dir)) {
    throw Error("config: this command runs on the standard suite; drop the input flags");
  }
}

std::string resolve_out_dir(const RunConfig& config) {
  if (!config.out_dir.empty()) return config.out_dir;
  if (const char* env = std::getenv("PROTO_TRACK_OUT"); env && *env) return env;
  return "results";
}

std::uint64_t effective_seed(const RunConfig& config) { return config.seed.value_or(1); }

AnnotationSequence parse_groundtruth(const std::string& text) {
  AnnotationSequence out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    BBox box;
    if (!(ls >> box.x >> box.y >> box.w >> box.h)) {
      throw ParseError(line_no, "expected x,y,w,h");
    }
    std::string extra;
    if (ls >> extra) throw ParseError(line_no, "trailing content after x,y,w,h");
    if (box.w < 0 || box.h < 0) throw ParseError(line_no, "negative box extent");
    out.boxes.push_back(box);
  }
  return out;
}

std::vector<std::uint8_t> parse_flag_line(const std::string& text) {
  std::vector<std::uint8_t> out;
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream in(cleaned);
  int v = 0;
  while (in >> v) {
    if (v != 0 && v != 1) throw ParseError(1, "flags must be 0 or 1");
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

AnnotationSequence load_sequence_dir(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream gt(root / "groundtruth.txt");
  if (!gt) throw Error("missing " + (root / "groundtruth.txt").string());
  std::stringstream buffer;
  buffer << gt.rdbuf();
  AnnotationSequence seq = parse_groundtruth(buffer.str());
  if (seq.boxes.empty()) throw Error("empty ground truth in " + dir);

  auto read_flags = [&](const char* file) -> std::vector<std::uint8_t> {
    std::ifstream in(root / file);
    if (!in) return {};
    std::stringstream fb;
    fb << in.rdbuf();
    std::vector<std::uint8_t> flags = parse_flag_line(fb.str());
    if (flags.size() != seq.boxes.size()) {
      throw LengthMismatchError(std::string(file) + ": flag count differs from box count");
    }
    return flags;
  };
  seq.full_occlusion = read_flags("full_occlusion.txt");
  seq.out_of_view = read_flags("out_of_view.txt");

  std::ifstream attrs(root / "attributes.txt");
  if (attrs) {
    std::stringstream ab;
    ab << attrs.rdbuf();
    std::string cleaned = ab.str();
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream in(cleaned);
    std::string tag;
    while (in >> tag) {
      const auto a = attribute_from_abbrev(tag);
      if (!a) throw ParseError(1, "unknown attribute tag '" + tag + "'");
      seq.attributes.insert(*a);
    }
  }
  return seq;
}

std::string serialize_boxes(const std::vector<BBox>& boxes) {
  std::ostringstream out;
  for (const BBox& b : boxes) {
    out << format_coord(b.x) << "," << format_coord(b.y) << "," << format_coord(b.w) << ","
        << format_coord(b.h) << "\n";
  }
  return out.str();
}

SequenceRun run_scenario(const ScenarioSpec& spec, const TrackConfig& config) {
  SequenceRun run;
  run.name = spec.name;

  std::vector<FrameTruth> truths;
  truths.reserve(spec.frames);
  for (int t = 1; t <= spec.frames; ++t) truths.push_back(render_frame(spec, t).second);
  if (!truths.front().visible) throw BadPromptError("scenario: first frame target not visible");

  ScenarioFeatureProvider provider(spec);
  run.report = run_sequence(provider, truths.front().gt_box, config);

  for (const FrameTruth& truth : truths) {
    run.gt_boxes.push_back(truth.gt_box);
    run.attributes.insert(truth.attributes.begin(), truth.attributes.end());
  }
  run.metrics = evaluate_sequence(run.report.boxes, run.gt_boxes, run.attributes);
  return run;
}

ScenarioSpec scenario_from_annotation(const AnnotationSequence& annotation,
                                      const std::string& name, std::uint64_t seed,
                                      double* scale_out) {
  const size_t n = annotation.boxes.size();
  auto occluded = [&](size_t i) {
    if (!annotation.full_occlusion.empty() && annotation.full_occlusion[i]) return true;
    if (!annotation.out_of_view.empty() && annotation.out_of_view[i]) return true;
    return annotation.boxes[i].empty_box();
  };
  if (occluded(0)) throw BadPromptError("annotation: first frame has no usable box");

  double extent = 0.0;
  std::vector<double> half_sizes;
  for (size_t i = 0; i < n; ++i) {
    if (occluded(i)) continue;
    const BBox& b = annotation.boxes[i];
    extent = std::max({extent, b.x + b.w, b.y + b.h});
    half_sizes.push_back(std::min(b.w, b.h) / 2.0);
  }
  if (extent <= 0.0) throw Error("annotation: no visible frames");
  const double scale = std::min(1.0, 40.0 / extent);
  if (scale_out) *scale_out = scale;

  std::sort(half_sizes.begin(), half_sizes.end());
  const double radius = std::clamp(half_sizes[half_sizes.size() / 2] * scale, 1.5, 6.0);

  ScenarioSpec spec;
  spec.name = name;
  spec.seed = seed;
  spec.frames = static_cast<int>(n);
  spec.channels = 16;
  spec.noise_amplitude = 0.02;
  spec.target.radius = radius;
  const double margin = radius + 1.0;
  double grid = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (occluded(i)) continue;
    const BBox& b = annotation.boxes[i];
    grid = std::max({grid, b.center_x() * scale + margin, b.center_y() * scale + margin});
  }
  spec.width = spec.height = std::max(12, static_cast<int>(std::ceil(grid)) + 1);

  for (size_t i = 0; i < n; ++i) {
    if (occluded(i)) continue;
    const BBox& b = annotation.boxes[i];
    spec.target.waypoints.push_back(
        {static_cast<int>(i) + 1, b.center_x() * scale, b.center_y() * scale});
  }
  // Occlusion events from flag runs.
  size_t i = 0;
  while (i < n) {
    if (!occluded(i)) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < n && occluded(j)) ++j;
    spec.occlusions.push_back({static_cast<int>(i) + 1, static_cast<int>(j), true, 1.0});
    i = j;
  }
  return spec;
}

int cmd_track(const RunConfig& config) {
  try {
    validate_config(config, /*needs_input=*/true);
    const fs::path out_root = resolve_out_dir(config);
    const std::uint64_t seed = effective_seed(config);

    SequenceRun run;
    double scale = 1.0;
    if (!config.scenario.empty()) {
      run = run_scenario(resolve_scenario(config), config.track);
    } else {
      const AnnotationSequence annotation = load_sequence_dir(config.sequence_dir);
      const std::string name = fs::path(config.sequence_dir).filename().string();
      const ScenarioSpec spec = scenario_from_annotation(annotation, name, seed, &scale);
      run = run_scenario(spec, config.track);
      // Report in the annotation's native coordinates.
      for (BBox& b : run.report.boxes) {
        if (b.empty_box()) continue;
        b.x /= scale;
        b.y /= scale;
        b.w /= scale;
        b.h /= scale;
      }
      run.gt_boxes = annotation.boxes;
      run.attributes = annotation.attributes;
      run.metrics = evaluate_sequence(run.report.boxes, run.gt_boxes, run.attributes);
    }

    write_file(out_root / (run.name + ".txt"), serialize_boxes(run.report.boxes));

    std::ostringstream traces;
    for (const FrameTrace& t : run.report.traces) traces << trace_to_json(t).dump() << "\n";
    write_file(out_root / (run.name + ".trace.jsonl"), traces.str());

    json report{{"name", run.name},
                {"config", config_to_json(config.track, seed)},
                {"metrics", metrics_to_json(run.metrics)}};
    write_file(out_root / (run.name + ".report.json"), report.dump(2) + "\n");

    write_file(out_root / (run.name + ".success_curve.csv"),
               curve_csv(success_curve(run.report.boxes, run.gt_boxes), "iou_threshold,fraction"));
    write_file(out_root / (run.name + ".precision_curve.csv"),
               curve_csv(norm_precision_curve(run.report.boxes, run.gt_boxes),
                         "norm_dist_threshold,fraction"));

    std::cout << "sequence " << run.name << ": ao=" << run.metrics.ao
              << " auc=" << run.metrics.auc << " frames=" << run.metrics.frames << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "track: " << e.what() << "\n";
    return 1;
  }
}

int cmd_compare(const RunConfig& config, const std::vector<SelectionStrategy>& strategies) {
  try {
    validate_config(config, /*needs_input=*/false);
    if (strategies.size() < 2) throw Error("compare: need at least two strategies");
    const fs::path out_root = resolve_out_dir(config);
    const std::uint64_t seed = effective_seed(config);

    std::ostringstream table;
    table << kTableHeader;
    json rows = json::array();

    for (SelectionStrategy strategy : strategies) {
      TrackConfig track = config.track;
      track.strategy = strategy;
      const std::vector<SequenceRun> runs = run_suite(seed, track);
      for (const SequenceRun& r : runs) {
        append_table_row(table, to_string(strategy), r.name, row_of(r.metrics));
        rows.push_back({{"strategy", to_string(strategy)},
                        {"scenario", r.name},
                        {"metrics", metrics_to_json(r.metrics)}});
      }
      const AggregateRow agg = aggregate(runs);
      append_table_row(table, to_string(strategy), "aggregate", agg);
      rows.push_back({{"strategy", to_string(strategy)},
                      {"scenario", "aggregate"},
                      {"metrics",
                       json{{"ao", agg.ao},
                            {"auc", agg.auc},
                            {"precision", agg.precision},
                            {"norm_precision", agg.norm_precision},
                            {"sr50", agg.sr50},
                            {"sr75", agg.sr75}}}});
    }

    write_file(out_root / "compare.txt", table.str());
    json doc{{"seed", seed}, {"config", config_to_json(config.track, seed)}, {"rows", rows}};
    write_file(out_root / "compare.json", doc.dump(2) + "\n");
    std::cout << table.str();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "compare: " << e.what() << "\n";
    return 1;
  }
}

int cmd_sweep(const RunConfig& config, const std::string& param,
              const std::vector<double>& values) {
  try {
    validate_config(config, /*needs_input=*/false);
    if (values.empty()) throw Error("sweep: no values given");
    const fs::path out_root = resolve_out_dir(config);
    const std::uint64_t seed = effective_seed(config);

    std::ostringstream table;
    table << "param          value                        ao      auc     prec   nprec     sr50     sr75\n";
    json rows = json::array();

    for (double value : values) {
      TrackConfig track = config.track;
      if (param == "alpha") {
        if (value < 0.0 || value > 1.0) throw DomainError("sweep: alpha value outside [0,1]");
        track.alpha = value;
      } else if (param == "m") {
        if (value < 1.0 || value != std::floor(value)) {
          throw DomainError("sweep: m values must be integers >= 1");
        }
        track.window = static_cast<int>(value);
      } else if (param == "beta") {
        if (value <= 0.0 || value >= 1.0) throw DomainError("sweep: beta value outside (0,1)");
        track.beta = value;
      } else {
        throw Error("sweep: param must be one of alpha, m, beta");
      }

      const std::vector<SequenceRun> runs = run_suite(seed, track);
      const AggregateRow agg = aggregate(runs);
      append_table_row(table, param, format_coord(value), agg);
      json per_scenario = json::array();
      for (const SequenceRun& r : runs) {
        per_scenario.push_back({{"scenario", r.name}, {"metrics", metrics_to_json(r.metrics)}});
      }
      rows.push_back({{"value", value},
                      {"aggregate",
                       json{{"ao", agg.ao},
                            {"auc", agg.auc},
                            {"precision", agg.precision},
                            {"norm_precision", agg.norm_precision},
                            {"sr50", agg.sr50},
                            {"sr75", agg.sr75}}},
                      {"per_scenario", per_scenario}});
    }

    write_file(out_root / "sweep.txt", table.str());
    json doc{{"param", param},
             {"seed", seed},
             {"config", config_to_json(config.track, seed)},
             {"rows", rows}};
    write_file(out_root / "sweep.json", doc.dump(2) + "\n");
    std::cout << table.str();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sweep: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace prototrack::cli
