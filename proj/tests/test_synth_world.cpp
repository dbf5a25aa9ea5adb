#include <doctest.h>

#include <cmath>

#include "prototrack/synth_world.hpp"

using namespace prototrack;

TEST_SUITE("synth_world") {

TEST_CASE("render_frame is deterministic per (spec, t)") {
  for (const ScenarioSpec& spec : standard_suite(9)) {
    const auto [fa, ta] = render_frame(spec, 5);
    const auto [fb, tb] = render_frame(spec, 5);
    CHECK(fa.data == fb.data);
    CHECK(ta.gt_mask == tb.gt_mask);
    CHECK(ta.attributes == tb.attributes);
  }
}

TEST_CASE("a zero-similarity distractor is orthogonal to the target") {
  ScenarioSpec spec;
  spec.target.waypoints = {{1, 10, 10}};
  DistractorSpec d;
  d.similarity = 0.0;
  d.trajectory.waypoints = {{1, 24, 24}};
  spec.distractors = {d};
  const ScenarioEmbeddings emb = scenario_embeddings(spec);
  CHECK(std::abs(cosine(emb.target, emb.distractors[0])) <= 1e-9);
}

TEST_CASE("embedding geometry hits the scripted similarities") {
  for (std::uint64_t seed : {1ull, 7ull, 13ull}) {
    for (const ScenarioSpec& spec : standard_suite(seed)) {
      const ScenarioEmbeddings emb = scenario_embeddings(spec);
      CHECK(cosine(emb.background, emb.target) ==
            doctest::Approx(spec.target_bg_similarity).epsilon(1e-9));
      for (size_t i = 0; i < spec.distractors.size(); ++i) {
        CHECK(cosine(emb.distractors[i], emb.target) ==
              doctest::Approx(spec.distractors[i].similarity).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("rendered pixels stay near their embeddings despite noise") {
  const ScenarioSpec spec = standard_suite(3)[4];  // distractor-cross, noise 0.05
  const ScenarioEmbeddings emb = scenario_embeddings(spec);
  for (int t : {1, 20, 40, 60}) {
    const auto [f, truth] = render_frame(spec, t);
    if (!truth.visible) continue;
    const Prototype pooled = masked_gap(f, truth.gt_mask);
    const Prototype expected = emb.target_at(t, spec.appearance_drift_deg);
    CHECK(cosine(pooled, expected) > 0.995);
  }
}

TEST_CASE("full occlusion empties the ground truth") {
  ScenarioSpec spec;
  spec.target.waypoints = {{1, 16, 16}};
  spec.occlusions = {{2, 3, true, 1.0}};
  spec.frames = 4;
  const auto [f, truth] = render_frame(spec, 2);
  CHECK_FALSE(truth.visible);
  CHECK(truth.gt_mask.empty_mask());
  CHECK(truth.gt_box.empty_box());
  CHECK(truth.attributes.count(Attribute::FOC) == 1);
}

TEST_CASE("partial occlusion hides the scripted fraction of rows") {
  ScenarioSpec spec;
  spec.target.waypoints = {{1, 16, 16}};
  spec.occlusions = {{1, 1, false, 0.5}};
  spec.noise_amplitude = 0.0;
  const auto [f, truth] = render_frame(spec, 1);
  CHECK(truth.visible);
  CHECK(truth.attributes.count(Attribute::POC) == 1);
  ScenarioSpec clear = spec;
  clear.occlusions.clear();
  const auto full = render_frame(clear, 1).second;
  CHECK(truth.gt_mask.area() < full.gt_mask.area());
  CHECK(truth.gt_mask.area() > 0);
  // Hidden rows are the topmost ones.
  CHECK(mask_to_bbox(truth.gt_mask).y > mask_to_bbox(full.gt_mask).y);
}

TEST_CASE("the standard suite has the seven named scenarios") {
  const auto suite = standard_suite(1);
  REQUIRE(suite.size() == 7);
  const std::vector<std::string> names{"static",
                                       "linear-motion",
                                       "partial-occlusion",
                                       "full-occlusion-window",
                                       "distractor-cross",
                                       "distractor-occlusion",
                                       "fast-motion"};
  for (size_t i = 0; i < names.size(); ++i) CHECK(suite[i].name == names[i]);
}

TEST_CASE("full-occlusion-window tags FOC exactly on the scripted interval") {
  const auto suite = standard_suite(11);
  const ScenarioSpec& spec = suite[3];
  REQUIRE(spec.occlusions.size() == 1);
  const int lo = spec.occlusions[0].start;
  const int hi = spec.occlusions[0].end;
  CHECK(hi - lo + 1 == 18);  // 30% of 60 frames
  for (int t = 1; t <= spec.frames; ++t) {
    const FrameTruth truth = render_frame(spec, t).second;
    CHECK(truth.attributes.count(Attribute::FOC) == static_cast<size_t>(t >= lo && t <= hi));
  }
}

TEST_CASE("distractor-cross brings the centroids within two radii") {
  const ScenarioSpec spec = standard_suite(2)[4];
  REQUIRE(spec.distractors.size() == 1);
  bool close = false;
  for (int t = 1; t <= spec.frames; ++t) {
    const auto [tx, ty] = spec.target.center(t);
    const auto [dx, dy] = spec.distractors[0].trajectory.center(t);
    close |= std::hypot(tx - dx, ty - dy) <= 2.0 * spec.target.radius;
  }
  CHECK(close);
}

TEST_CASE("fast-motion tags FM on the jump frames") {
  const ScenarioSpec spec = standard_suite(4)[6];
  bool any_fm = false;
  for (int t = 2; t <= spec.frames; ++t) {
    any_fm |= render_frame(spec, t).second.attributes.count(Attribute::FM) > 0;
  }
  CHECK(any_fm);
}

TEST_CASE("ground-truth box matches the mask on every visible frame") {
  for (const ScenarioSpec& spec : standard_suite(6)) {
    for (int t = 1; t <= spec.frames; ++t) {
      const FrameTruth truth = render_frame(spec, t).second;
      if (!truth.visible) continue;
      CHECK(truth.gt_box == mask_to_bbox(truth.gt_mask));
    }
  }
}

TEST_CASE("scenario configs round-trip through text") {
  for (const ScenarioSpec& spec : standard_suite(77)) {
    const std::string text = serialize_scenario(spec);
    const ScenarioSpec parsed = parse_scenario(text);
    CHECK(serialize_scenario(parsed) == text);
    CHECK(parsed.name == spec.name);
    CHECK(parsed.seed == spec.seed);
    CHECK(parsed.frames == spec.frames);
    CHECK(parsed.distractors.size() == spec.distractors.size());
    CHECK(parsed.occlusions.size() == spec.occlusions.size());
  }
}

TEST_CASE("parse_scenario reports the offending line") {
  CHECK_THROWS_AS(parse_scenario("name x\nbogus_key 3\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("distractor_waypoint 1 2 3\n"), ParseError);
  try {
    parse_scenario("name x\nheight nope\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("specs validate their invariants") {
  ScenarioSpec spec;
  spec.target.waypoints = {{1, 200, 16}};
  CHECK_THROWS_AS(render_frame(spec, 1), Error);

  ScenarioSpec bad_occ;
  bad_occ.target.waypoints = {{1, 16, 16}};
  bad_occ.occlusions = {{0, 3, true, 1.0}};
  CHECK_THROWS_AS(render_frame(bad_occ, 1), Error);

  ScenarioSpec ok;
  ok.target.waypoints = {{1, 16, 16}};
  CHECK_THROWS_AS(render_frame(ok, 0), DomainError);
  CHECK_THROWS_AS(render_frame(ok, 61), DomainError);
}

}  // TEST_SUITE
