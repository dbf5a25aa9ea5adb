#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "prototrack/memory_bank.hpp"

using namespace prototrack;

namespace {

// Appends a frame whose FG prototype is exactly `proto` (pixel 0) and whose
// BG pixel holds an arbitrary distinct vector.
void push_frame(PrototypicalMemoryBank& bank, const std::vector<double>& proto) {
  const int c = static_cast<int>(proto.size());
  FeatureMap f(1, 2, c);
  for (int i = 0; i < c; ++i) {
    f.at(0, 0, i) = proto[i];
    f.at(0, 1, i) = i == 0 ? -1.0 : 0.25;
  }
  BinaryMask m(1, 2);
  m.at(0, 0) = 1;
  const int t = static_cast<int>(bank.size()) + 1;
  bank.add_memory(t, f, m, f);
}

void push_empty_frame(PrototypicalMemoryBank& bank, int channels) {
  FeatureMap f(1, 2, channels);
  std::fill(f.data.begin(), f.data.end(), 0.5);
  const int t = static_cast<int>(bank.size()) + 1;
  bank.add_memory(t, f, BinaryMask(1, 2), f);
}

double oracle_cos(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Full-sort reference for calibrate(): scores every non-degenerate candidate
// in the interval with its own cosine path and takes the best five.
std::vector<int> oracle_select(const PrototypicalMemoryBank& bank, int t) {
  const int lo = std::max(2, t - bank.window());
  const int hi = t - 2;
  int pos_anchor = 0;
  for (int i = t - 1; i >= 2; --i) {
    if (!bank.entry(i).degenerate) {
      pos_anchor = i;
      break;
    }
  }
  std::vector<int> selected{1};
  if (pos_anchor != 0) selected.push_back(pos_anchor);

  struct Row {
    int frame;
    double fused;
  };
  std::vector<Row> rows;
  for (int tau = lo; tau <= hi; ++tau) {
    const MemoryEntry& e = bank.entry(tau);
    if (e.degenerate || tau == pos_anchor) continue;
    const double sf = (oracle_cos(e.fg_prototype.data, bank.entry(1).fg_prototype.data) + 1) / 2;
    const double sp = pos_anchor == 0
                          ? sf
                          : (oracle_cos(e.fg_prototype.data,
                                        bank.entry(pos_anchor).fg_prototype.data) + 1) / 2;
    rows.push_back({tau, (1.0 - bank.alpha()) * sf + bank.alpha() * sp});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.fused != b.fused) return a.fused > b.fused;
    return a.frame > b.frame;
  });
  if (rows.size() > 5) rows.resize(5);
  std::vector<int> top;
  for (const Row& r : rows) top.push_back(r.frame);
  std::sort(top.begin(), top.end());
  selected.insert(selected.end(), top.begin(), top.end());
  return selected;
}

PrototypicalMemoryBank random_bank(std::mt19937_64& rng, int entries, int channels, double alpha,
                                   int window, double degenerate_rate = 0.0) {
  PrototypicalMemoryBank bank(alpha, window);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::bernoulli_distribution degen(degenerate_rate);
  for (int i = 0; i < entries; ++i) {
    if (i > 0 && degen(rng)) {
      push_empty_frame(bank, channels);
      continue;
    }
    std::vector<double> v(channels);
    double norm = 0.0;
    for (double& x : v) {
      x = dist(rng);
      norm += x * x;
    }
    if (norm < 1e-6) v[0] = 1.0;
    push_frame(bank, v);
  }
  return bank;
}

}  // namespace

TEST_SUITE("memory_bank") {

TEST_CASE("add_memory computes prototypes by pooling") {
  PrototypicalMemoryBank bank;
  FeatureMap f(2, 2, 2);
  f.at(0, 0, 0) = 3.0;
  f.at(0, 0, 1) = -1.0;
  f.at(0, 1, 0) = 5.0;
  f.at(0, 1, 1) = 1.0;
  f.at(1, 0, 0) = 0.0;
  f.at(1, 0, 1) = 0.0;
  f.at(1, 1, 0) = 2.0;
  f.at(1, 1, 1) = 2.0;
  BinaryMask m(2, 2);
  m.at(0, 0) = m.at(0, 1) = 1;

  const MemoryEntry& e = bank.add_memory(1, f, m, f);
  CHECK(bank.size() == 1);
  CHECK(e.fg_prototype.data[0] == doctest::Approx(4.0));
  CHECK(e.fg_prototype.data[1] == doctest::Approx(0.0));
  CHECK(e.bg_prototype.data[0] == doctest::Approx(1.0));
  CHECK(e.bg_prototype.data[1] == doctest::Approx(1.0));
  CHECK_FALSE(e.degenerate);
}

TEST_CASE("add_memory exact partition recovers the foreground vector") {
  PrototypicalMemoryBank bank;
  push_frame(bank, {0.5, 2.5, -3.0});
  const MemoryEntry& e = bank.entry(1);
  CHECK(e.fg_prototype.data == std::vector<double>{0.5, 2.5, -3.0});
}

TEST_CASE("empty mask carries the last non-empty prototype forward") {
  PrototypicalMemoryBank bank;
  push_frame(bank, {1.0, 0.0});
  push_frame(bank, {0.0, 1.0});
  push_empty_frame(bank, 2);
  const MemoryEntry& e = bank.entry(3);
  CHECK(e.degenerate);
  CHECK(e.fg_prototype.data == bank.entry(2).fg_prototype.data);
}

TEST_CASE("add_memory rejects non-monotone frame indices") {
  PrototypicalMemoryBank bank;
  FeatureMap f(1, 1, 1, {1.0});
  BinaryMask m(1, 1, {1});
  CHECK_THROWS_AS(bank.add_memory(2, f, m, f), SequenceError);
  bank.add_memory(1, f, m, f);
  CHECK_THROWS_AS(bank.add_memory(1, f, m, f), SequenceError);
  CHECK_THROWS_AS(bank.add_memory(3, f, m, f), SequenceError);
}

TEST_CASE("candidate_set is the clamped interval") {
  PrototypicalMemoryBank bank(0.3, 30);
  CHECK(bank.candidate_set(2).empty());
  CHECK(bank.candidate_set(3).empty());
  CHECK(bank.candidate_set(10) == std::vector<int>{2, 3, 4, 5, 6, 7, 8});
  std::vector<int> expected;
  for (int i = 70; i <= 98; ++i) expected.push_back(i);
  CHECK(bank.candidate_set(100) == expected);

  PrototypicalMemoryBank small(0.3, 4);
  CHECK(small.candidate_set(10) == std::vector<int>{6, 7, 8});
}

TEST_CASE("anchor_scores match a hand-computed oracle") {
  PrototypicalMemoryBank bank(0.3, 30);
  push_frame(bank, {1.0, 0.0, 0.0});
  push_frame(bank, {0.6, 0.8, 0.0});
  push_frame(bank, {0.0, 0.0, 1.0});

  auto [sf, sp] = bank.anchor_scores(2, 4);
  CHECK(sf == doctest::Approx((oracle_cos({0.6, 0.8, 0.0}, {1.0, 0.0, 0.0}) + 1) / 2));
  CHECK(sp == doctest::Approx((oracle_cos({0.6, 0.8, 0.0}, {0.0, 0.0, 1.0}) + 1) / 2));

  // Identical prototype scores 1 against itself; orthogonal scores 0.5.
  auto [sf2, sp2] = bank.anchor_scores(2, 3);
  CHECK(sf2 == doctest::Approx(0.8));  // cos = 0.6
  CHECK(sp2 == doctest::Approx(1.0));  // candidate is the position anchor itself

  PrototypicalMemoryBank orth(0.3, 30);
  push_frame(orth, {1.0, 0.0});
  push_frame(orth, {0.0, 1.0});
  push_frame(orth, {1.0, 0.0});
  auto [sf3, sp3] = orth.anchor_scores(2, 4);
  CHECK(sf3 == doctest::Approx(0.5));
  CHECK(sp3 == doctest::Approx(0.5));
}

TEST_CASE("fuse_score blends linearly") {
  CHECK(fuse_score(0.8, 0.6, 0.3) == doctest::Approx(0.74));
  CHECK(fuse_score(0.8, 0.6, 0.0) == doctest::Approx(0.8));
  CHECK(fuse_score(0.8, 0.6, 1.0) == doctest::Approx(0.6));
  CHECK_THROWS_AS(fuse_score(1.5, 0.5, 0.3), DomainError);
}

TEST_CASE("calibrate at t=2 selects only the first frame") {
  PrototypicalMemoryBank bank;
  push_frame(bank, {1.0, 0.0});
  const CalibrationResult r = bank.calibrate(2);
  CHECK(r.selected_indices == std::vector<int>{1});
  CHECK(r.similarity_evaluations == 0);
}

TEST_CASE("calibrate equals the full-sort oracle on distinct scores") {
  std::mt19937_64 rng(9);
  const auto bank = random_bank(rng, 13, 4, 0.3, 30);
  const CalibrationResult r = bank.calibrate(14);
  CHECK(r.selected_indices == oracle_select(bank, 14));
  CHECK(r.selected_indices.size() == 7);
}

TEST_CASE("ties break toward the more recent frame") {
  PrototypicalMemoryBank bank(0.3, 30);
  push_frame(bank, {1.0, 0.0});                    // anchor
  for (int i = 0; i < 7; ++i) push_frame(bank, {1.0, 0.0});  // identical candidates
  const CalibrationResult r = bank.calibrate(9);
  // Candidates 2..7 all tie; the five most recent win.
  CHECK(r.selected_indices == std::vector<int>{1, 8, 3, 4, 5, 6, 7});
}

TEST_CASE("select_memories returns aligned views in order") {
  PrototypicalMemoryBank bank;
  for (int i = 0; i < 9; ++i) push_frame(bank, {1.0, 0.1 * i});
  CalibrationResult r;
  r.selected_indices = {1, 5, 9};
  const SelectedMemories sel = bank.select_memories(r);
  CHECK(sel.size() == 3);
  CHECK(sel.indices == std::vector<int>{1, 5, 9});
  CHECK(sel.fg_prototypes[1] == &bank.entry(5).fg_prototype);
  CHECK(sel.masks[2] == &bank.entry(9).predicted_mask);

  r.selected_indices = {1, 42};
  CHECK_THROWS_AS(bank.select_memories(r), MissingEntryError);
}

TEST_CASE("calibrate spends at most 2m cosine evaluations") {
  std::mt19937_64 rng(31);
  for (int window : {1, 3, 30}) {
    const auto bank = random_bank(rng, 40, 4, 0.3, window);
    for (int t = 2; t <= 41; ++t) {
      const CalibrationResult r = bank.calibrate(t);
      CHECK(r.similarity_evaluations <= 2 * window);
    }
  }
}

TEST_CASE("selection is invariant to positive rescaling of a candidate") {
  std::mt19937_64 rng(13);
  auto bank = random_bank(rng, 20, 4, 0.3, 30);
  const auto before = bank.calibrate(21).selected_indices;

  // Rebuild the bank with candidate 7's prototype rescaled by 12.5.
  PrototypicalMemoryBank scaled(0.3, 30);
  for (int i = 1; i <= 20; ++i) {
    std::vector<double> v = bank.entry(i).fg_prototype.data;
    if (i == 7) {
      for (double& x : v) x *= 12.5;
    }
    push_frame(scaled, v);
  }
  CHECK(scaled.calibrate(21).selected_indices == before);
}

TEST_CASE("alpha endpoints reduce to single-anchor ranking") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    PrototypicalMemoryBank by_feat(0.0, 30);
    PrototypicalMemoryBank by_pos(1.0, 30);
    PrototypicalMemoryBank mixed(0.3, 30);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 12;
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(5);
      for (double& x : v) x = dist(rng);
      if (Prototype(v).is_zero()) v[0] = 1.0;
      push_frame(by_feat, v);
      push_frame(by_pos, v);
      push_frame(mixed, v);
    }
    const int t = n + 1;
    const auto feat_sel = by_feat.calibrate(t);
    const auto pos_sel = by_pos.calibrate(t);

    // alpha = 0: ranking by s_feat alone; alpha = 1: by s_pos alone.
    auto rank_by = [&](const CalibrationResult& r, bool use_feat) {
      std::vector<std::pair<double, int>> rows;
      for (const CandidateScore& s : r.scores) rows.push_back({use_feat ? s.feat : s.pos, s.frame});
      std::stable_sort(rows.begin(), rows.end(), [](auto& a, auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
      });
      std::vector<int> top;
      for (size_t i = 0; i < rows.size() && i < 5; ++i) top.push_back(rows[i].second);
      std::sort(top.begin(), top.end());
      return top;
    };
    std::vector<int> feat_top(feat_sel.selected_indices.begin() + 2, feat_sel.selected_indices.end());
    std::vector<int> pos_top(pos_sel.selected_indices.begin() + 2, pos_sel.selected_indices.end());
    CHECK(feat_top == rank_by(feat_sel, true));
    CHECK(pos_top == rank_by(pos_sel, false));
  }
}

TEST_CASE("anchors are always selected for t >= 3") {
  std::mt19937_64 rng(53);
  const auto bank = random_bank(rng, 30, 4, 0.3, 10);
  for (int t = 3; t <= 31; ++t) {
    const auto sel = bank.calibrate(t).selected_indices;
    CHECK(std::find(sel.begin(), sel.end(), 1) != sel.end());
    CHECK(std::find(sel.begin(), sel.end(), t - 1) != sel.end());
  }
}

TEST_CASE("calibrate matches the oracle on random banks, with degenerates") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const int entries = 3 + static_cast<int>(rng() % 62);
    const int channels = 2 + static_cast<int>(rng() % 15);
    const int window = 1 + static_cast<int>(rng() % 40);
    const double alpha = (rng() % 11) / 10.0;
    const auto bank = random_bank(rng, entries, channels, alpha, window, 0.15);
    if (bank.entry(1).degenerate) continue;
    const int t = entries + 1;
    CHECK(bank.calibrate(t).selected_indices == oracle_select(bank, t));
  }
}

TEST_CASE("degenerate frames are never candidates") {
  PrototypicalMemoryBank bank;
  push_frame(bank, {1.0, 0.0});
  push_frame(bank, {0.9, 0.1});
  push_empty_frame(bank, 2);
  push_frame(bank, {0.8, 0.2});
  push_frame(bank, {0.7, 0.3});
  const auto sel = bank.calibrate(6).selected_indices;
  CHECK(std::find(sel.begin(), sel.end(), 3) == sel.end());
}

TEST_CASE("position anchor falls back past degenerate frames") {
  PrototypicalMemoryBank bank;
  push_frame(bank, {1.0, 0.0});
  push_frame(bank, {0.9, 0.1});
  push_empty_frame(bank, 2);
  push_empty_frame(bank, 2);
  const CalibrationResult r = bank.calibrate(5);
  REQUIRE(r.position_anchor.has_value());
  CHECK(*r.position_anchor == 2);
  CHECK(std::find(r.selected_indices.begin(), r.selected_indices.end(), 2) !=
        r.selected_indices.end());
}

}  // TEST_SUITE
