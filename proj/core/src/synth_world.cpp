#include "prototrack/synth_world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace prototrack {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
}

// Gram-Schmidt an orthonormal basis of `count` vectors in R^dims.
std::vector<std::vector<double>> orthonormal_basis(std::mt19937_64& rng, int count, int dims) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> basis;
  while (static_cast<int>(basis.size()) < count) {
    std::vector<double> v(dims);
    for (double& x : v) x = gauss(rng);
    for (const auto& b : basis) {
      double dot = 0.0;
      for (int i = 0; i < dims; ++i) dot += v[i] * b[i];
      for (int i = 0; i < dims; ++i) v[i] -= dot * b[i];
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    if (n < 1e-12) continue;  // colinear draw, retry
    normalize(v);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<double> mix_toward(const std::vector<double>& target, const std::vector<double>& ortho,
                               double similarity) {
  std::vector<double> v(target.size());
  const double rest = std::sqrt(std::max(0.0, 1.0 - similarity * similarity));
  for (size_t i = 0; i < v.size(); ++i) v[i] = similarity * target[i] + rest * ortho[i];
  return v;
}

struct Disk {
  std::vector<std::pair<int, int>> pixels;  // (y, x)
  int min_y = 0;
  int max_y = 0;
};

Disk disk_pixels(double cx, double cy, double radius, int h, int w) {
  Disk d;
  d.min_y = h;
  d.max_y = -1;
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(cy + radius)));
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(cx + radius)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dy = y - cy;
      const double dx = x - cx;
      if (dy * dy + dx * dx <= radius * radius) {
        d.pixels.emplace_back(y, x);
        d.min_y = std::min(d.min_y, y);
        d.max_y = std::max(d.max_y, y);
      }
    }
  }
  return d;
}

void validate_spec(const ScenarioSpec& spec) {
  if (spec.height < 1 || spec.width < 1 || spec.channels < 1 || spec.frames < 1) {
    throw BadShapeError("scenario: dims and frame count must be >= 1");
  }
  if (spec.target.waypoints.empty()) throw Error("scenario: target trajectory empty");
  if (spec.channels < 3 + static_cast<int>(spec.distractors.size())) {
    throw BadShapeError("scenario: channels too small for embedding construction");
  }
  auto check_traj = [&](const Trajectory& traj) {
    for (const Waypoint& wp : traj.waypoints) {
      if (wp.cx < 0 || wp.cx > spec.width - 1 || wp.cy < 0 || wp.cy > spec.height - 1) {
        throw Error("scenario: trajectory out of bounds");
      }
    }
  };
  check_traj(spec.target);
  for (const auto& d : spec.distractors) check_traj(d.trajectory);
  for (const auto& o : spec.occlusions) {
    if (o.start < 1 || o.end > spec.frames || o.start > o.end) {
      throw Error("scenario: occlusion interval outside [1, frames]");
    }
    if (!o.full && !(o.fraction > 0.0 && o.fraction <= 1.0)) {
      throw Error("scenario: partial occlusion fraction outside (0,1]");
    }
  }
  for (const auto& d : spec.distractors) {
    if (d.similarity < 0.0 || d.similarity > 1.0) {
      throw Error("scenario: distractor similarity outside [0,1]");
    }
  }
  if (spec.target_bg_similarity < 0.0 || spec.target_bg_similarity > 1.0) {
    throw Error("scenario: bg similarity outside [0,1]");
  }
}

const OcclusionEvent* active_occlusion(const ScenarioSpec& spec, int t) {
  for (const auto& o : spec.occlusions) {
    if (t >= o.start && t <= o.end) return &o;
  }
  return nullptr;
}

}  // namespace

std::pair<double, double> Trajectory::center(int t) const {
  if (waypoints.empty()) throw Error("trajectory: no waypoints");
  if (t <= waypoints.front().frame) return {waypoints.front().cx, waypoints.front().cy};
  if (t >= waypoints.back().frame) return {waypoints.back().cx, waypoints.back().cy};
  for (size_t i = 1; i < waypoints.size(); ++i) {
    const Waypoint& a = waypoints[i - 1];
    const Waypoint& b = waypoints[i];
    if (t > b.frame) continue;
    const double span = static_cast<double>(b.frame - a.frame);
    const double u = span == 0.0 ? 1.0 : (t - a.frame) / span;
    return {a.cx + u * (b.cx - a.cx), a.cy + u * (b.cy - a.cy)};
  }
  return {waypoints.back().cx, waypoints.back().cy};
}

Prototype ScenarioEmbeddings::target_at(int t, double drift_deg) const {
  const double theta = drift_deg * (t - 1) * std::numbers::pi / 180.0;
  std::vector<double> v(target.data.size());
  for (size_t i = 0; i < v.size(); ++i) {
    v[i] = std::cos(theta) * target.data[i] + std::sin(theta) * drift_axis_.data[i];
  }
  return Prototype(std::move(v));
}

ScenarioEmbeddings scenario_embeddings(const ScenarioSpec& spec) {
  validate_spec(spec);
  std::mt19937_64 rng(mix(spec.seed, 0xE5CE2A1Aull));
  const int count = 3 + static_cast<int>(spec.distractors.size());
  auto basis = orthonormal_basis(rng, count, spec.channels);

  ScenarioEmbeddings e;
  e.target = Prototype(basis[0]);
  e.drift_axis_ = Prototype(basis[1]);
  e.background = Prototype(mix_toward(basis[0], basis[2], spec.target_bg_similarity));
  for (size_t i = 0; i < spec.distractors.size(); ++i) {
    e.distractors.emplace_back(mix_toward(basis[0], basis[3 + i], spec.distractors[i].similarity));
  }
  return e;
}

std::pair<FeatureMap, FrameTruth> render_frame(const ScenarioSpec& spec, int t) {
  validate_spec(spec);
  if (t < 1 || t > spec.frames) throw DomainError("render_frame: frame outside [1, frames]");

  const ScenarioEmbeddings emb = scenario_embeddings(spec);
  const Prototype target_now = emb.target_at(t, spec.appearance_drift_deg);

  FeatureMap f(spec.height, spec.width, spec.channels);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      for (int c = 0; c < spec.channels; ++c) f.at(y, x, c) = emb.background.data[c];
    }
  }

  for (size_t i = 0; i < spec.distractors.size(); ++i) {
    const auto [cx, cy] = spec.distractors[i].trajectory.center(t);
    for (auto [y, x] : disk_pixels(cx, cy, spec.distractors[i].trajectory.radius, spec.height,
                                   spec.width)
             .pixels) {
      for (int c = 0; c < spec.channels; ++c) f.at(y, x, c) = emb.distractors[i].data[c];
    }
  }

  const auto [tcx, tcy] = spec.target.center(t);
  const Disk target_disk = disk_pixels(tcx, tcy, spec.target.radius, spec.height, spec.width);
  const OcclusionEvent* occ = active_occlusion(spec, t);

  FrameTruth truth;
  truth.gt_mask = BinaryMask(spec.height, spec.width);

  const bool fully_occluded = occ && occ->full;
  int occluded_below = -1;  // inclusive row bound for partial occlusion
  if (occ && !occ->full && target_disk.max_y >= target_disk.min_y) {
    const int rows = target_disk.max_y - target_disk.min_y + 1;
    occluded_below = target_disk.min_y + static_cast<int>(std::ceil(occ->fraction * rows)) - 1;
  }

  for (auto [y, x] : target_disk.pixels) {
    const bool hidden = fully_occluded || y <= occluded_below;
    for (int c = 0; c < spec.channels; ++c) {
      f.at(y, x, c) = hidden ? emb.background.data[c] : target_now.data[c];
    }
    if (!hidden) truth.gt_mask.at(y, x) = 1;
  }

  // Seeded per-frame noise, drawn in fixed scan order for every pixel.
  if (spec.noise_amplitude > 0.0) {
    std::mt19937_64 rng(mix(spec.seed, 0xF00D0000ull + static_cast<std::uint64_t>(t)));
    std::uniform_real_distribution<double> noise(-spec.noise_amplitude, spec.noise_amplitude);
    for (double& v : f.data) v += noise(rng);
  }

  truth.visible = truth.gt_mask.area() > 0;
  truth.gt_box = mask_to_bbox(truth.gt_mask);

  if (fully_occluded) truth.attributes.insert(Attribute::FOC);
  if (occ && !occ->full) truth.attributes.insert(Attribute::POC);
  if (spec.target_bg_similarity >= 0.5) truth.attributes.insert(Attribute::BC);
  for (const auto& d : spec.distractors) {
    if (d.similarity >= 0.5) truth.attributes.insert(Attribute::BC);
  }
  if (t >= 2) {
    const auto [px, py] = spec.target.center(t - 1);
    const double jump = std::hypot(tcx - px, tcy - py);
    if (jump > 2.0 * spec.target.radius + 1.0) truth.attributes.insert(Attribute::FM);
  }
  return {std::move(f), std::move(truth)};
}

std::vector<ScenarioSpec> standard_suite(std::uint64_t seed) {
  std::vector<ScenarioSpec> suite;

  auto base = [&](const std::string& name) {
    ScenarioSpec s;
    s.name = name;
    s.seed = seed;
    s.target.radius = 3.0;
    return s;
  };

  {
    ScenarioSpec s = base("static");
    s.target.waypoints = {{1, 16, 16}};
    suite.push_back(s);
  }
  {
    ScenarioSpec s = base("linear-motion");
    s.target.waypoints = {{1, 6, 16}, {60, 26, 16}};
    s.appearance_drift_deg = 0.4;
    suite.push_back(s);
  }
  {
    ScenarioSpec s = base("partial-occlusion");
    s.target.waypoints = {{1, 16, 16}};
    s.occlusions = {{25, 40, false, 0.5}};
    suite.push_back(s);
  }
  {
    ScenarioSpec s = base("full-occlusion-window");
    s.target.waypoints = {{1, 10, 16}, {60, 22, 16}};
    s.occlusions = {{22, 39, true, 1.0}};  // 18 of 60 frames
    suite.push_back(s);
  }
  {
    ScenarioSpec s = base("distractor-cross");
    s.target.waypoints = {{1, 6, 14}, {60, 26, 14}};
    s.appearance_drift_deg = 0.35;
    DistractorSpec d;
    d.similarity = 0.9;
    d.trajectory.radius = 3.0;
    d.trajectory.waypoints = {{1, 26, 19.5}, {60, 6, 19.5}};
    s.distractors = {d};
    suite.push_back(s);
  }
  {
    ScenarioSpec s = base("distractor-occlusion");
    s.target.waypoints = {{1, 8, 16}, {60, 24, 16}};
    s.appearance_drift_deg = 0.3;
    DistractorSpec d;
    d.similarity = 0.9;
    d.trajectory.radius = 3.0;
    d.trajectory.waypoints = {{1, 24, 20}, {60, 8, 20}};
    s.distractors = {d};
    s.occlusions = {{28, 34, true, 1.0}};
    suite.push_back(s);
  }
  {
    ScenarioSpec s = base("fast-motion");
    s.target.waypoints = {{1, 8, 8},   {15, 8, 8},   {16, 24, 8},  {30, 24, 8},
                          {31, 24, 24}, {45, 24, 24}, {46, 8, 24},  {60, 8, 24}};
    suite.push_back(s);
  }
  return suite;
}

std::string serialize_scenario(const ScenarioSpec& spec) {
  std::ostringstream out;
  out << "name " << spec.name << "\n";
  out << "height " << spec.height << "\n";
  out << "width " << spec.width << "\n";
  out << "channels " << spec.channels << "\n";
  out << "frames " << spec.frames << "\n";
  out << "seed " << spec.seed << "\n";
  out << "noise " << spec.noise_amplitude << "\n";
  out << "bg_similarity " << spec.target_bg_similarity << "\n";
  out << "drift_deg " << spec.appearance_drift_deg << "\n";
  out << "target_radius " << spec.target.radius << "\n";
  for (const Waypoint& wp : spec.target.waypoints) {
    out << "target_waypoint " << wp.frame << " " << wp.cx << " " << wp.cy << "\n";
  }
  for (const auto& d : spec.distractors) {
    out << "distractor " << d.similarity << " " << d.trajectory.radius << "\n";
    for (const Waypoint& wp : d.trajectory.waypoints) {
      out << "distractor_waypoint " << wp.frame << " " << wp.cx << " " << wp.cy << "\n";
    }
  }
  for (const auto& o : spec.occlusions) {
    if (o.full) {
      out << "occlude " << o.start << " " << o.end << " full\n";
    } else {
      out << "occlude " << o.start << " " << o.end << " partial " << o.fraction << "\n";
    }
  }
  return out.str();
}

ScenarioSpec parse_scenario(const std::string& text) {
  ScenarioSpec spec;
  spec.target.waypoints.clear();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    auto fail = [&](const std::string& why) { throw ParseError(line_no, why); };
    auto read_double = [&](double& v) { if (!(ls >> v)) fail("expected a number"); };
    auto read_int = [&](int& v) { if (!(ls >> v)) fail("expected an integer"); };

    if (key == "name") {
      ls >> spec.name;
    } else if (key == "height") {
      read_int(spec.height);
    } else if (key == "width") {
      read_int(spec.width);
    } else if (key == "channels") {
      read_int(spec.channels);
    } else if (key == "frames") {
      read_int(spec.frames);
    } else if (key == "seed") {
      if (!(ls >> spec.seed)) fail("expected an integer seed");
    } else if (key == "noise") {
      read_double(spec.noise_amplitude);
    } else if (key == "bg_similarity") {
      read_double(spec.target_bg_similarity);
    } else if (key == "drift_deg") {
      read_double(spec.appearance_drift_deg);
    } else if (key == "target_radius") {
      read_double(spec.target.radius);
    } else if (key == "target_waypoint") {
      Waypoint wp;
      read_int(wp.frame);
      read_double(wp.cx);
      read_double(wp.cy);
      spec.target.waypoints.push_back(wp);
    } else if (key == "distractor") {
      DistractorSpec d;
      read_double(d.similarity);
      read_double(d.trajectory.radius);
      spec.distractors.push_back(d);
    } else if (key == "distractor_waypoint") {
      if (spec.distractors.empty()) fail("distractor_waypoint before any distractor");
      Waypoint wp;
      read_int(wp.frame);
      read_double(wp.cx);
      read_double(wp.cy);
      spec.distractors.back().trajectory.waypoints.push_back(wp);
    } else if (key == "occlude") {
      OcclusionEvent o;
      read_int(o.start);
      read_int(o.end);
      std::string mode;
      if (!(ls >> mode)) fail("expected occlusion mode");
      if (mode == "full") {
        o.full = true;
      } else if (mode == "partial") {
        o.full = false;
        read_double(o.fraction);
      } else {
        fail("occlusion mode must be 'full' or 'partial'");
      }
      spec.occlusions.push_back(o);
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  validate_spec(spec);
  return spec;
}

ScenarioFeatureProvider::ScenarioFeatureProvider(ScenarioSpec spec) : spec_(std::move(spec)) {
  validate_spec(spec_);
}

std::optional<std::pair<int, FeatureMap>> ScenarioFeatureProvider::next_frame() {
  if (next_ > spec_.frames) return std::nullopt;
  const int t = next_++;
  return std::make_pair(t, render_frame(spec_, t).first);
}

}  // namespace prototrack
