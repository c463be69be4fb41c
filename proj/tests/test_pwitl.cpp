#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lapspec/pwitl.hpp"

using namespace lapspec;

namespace {

const Complex kI(0.0, 1.0);

struct MeanAndError {
  Complex mean;
  double stderr_re;
  double stderr_im;
};

MeanAndError summarize(const std::vector<Complex>& v) {
  Complex s = 0.0;
  for (const Complex& x : v) s += x;
  const double n = static_cast<double>(v.size());
  const Complex m = s / n;
  double vr = 0.0, vi = 0.0;
  for (const Complex& x : v) {
    vr += (x.real() - m.real()) * (x.real() - m.real());
    vi += (x.imag() - m.imag()) * (x.imag() - m.imag());
  }
  return {m, std::sqrt(vr / (n - 1) / n), std::sqrt(vi / (n - 1) / n)};
}

void check_loop_identity(const TruncatedTree& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& v = t.node(i);
    double s = v.loop_weight + (i == 0 ? 0.0 : v.edge_weight);
    for (std::size_t c = 0; c < v.child_count; ++c) s += t.node(v.first_child + c).edge_weight;
    CHECK(std::abs(s) <= 1e-12 * (1.0 + std::abs(v.loop_weight)));
  }
}

}  // namespace

TEST_CASE("truncation parameters") {
  const auto stable = LevyMeasure::alpha_stable(0.5, 0.5);
  CHECK_THROWS_AS((TruncationParams{3, 64, 0.0}).validate(stable), std::invalid_argument);
  CHECK_THROWS_AS((TruncationParams{3, 0, 0.1}).validate(stable), std::invalid_argument);
  CHECK_THROWS_AS((TruncationParams{3, 4, -1.0}).validate(LevyMeasure::point_mass(1.0)), std::invalid_argument);
  const auto d = TruncationParams::defaults_for(stable, 5);
  CHECK(d.depth == 5);
  CHECK(d.branching == 256);
  CHECK(d.delta == 1e-3);
  const auto f = TruncationParams::defaults_for(LevyMeasure::point_mass(2.0), 4);
  CHECK(f.branching == 64);
  CHECK(f.delta == 0.0);
}

TEST_CASE("empty process gives a single root") {
  RandomStream rng(1, 1);
  const auto t = sample_tree(LevyMeasure::point_mass(0.0), TruncationParams{6, 64, 0.0}, rng);
  REQUIRE(t.size() == 1);
  CHECK(t.node(0).loop_weight == 0.0);
  CHECK(t.word(0).empty());
  CHECK(tree_resolvent_recursive(t, kI).value == kI);
  CHECK(tree_resolvent_direct(t, kI).value == kI);
}

TEST_CASE("loop weights from retained children") {
  const auto root = TruncatedTree::from_children({{1.0, 1.0}, {}, {}});
  CHECK(root.node(0).loop_weight == -2.0);

  const auto chain = TruncatedTree::from_children({{1.0}, {1.0}, {}});
  REQUIRE(chain.size() == 3);
  CHECK(chain.node(1).loop_weight == -2.0);
  CHECK(chain.node(2).loop_weight == -1.0);
  CHECK(chain.word(2) == "1.1");
}

TEST_CASE("two-node tree resolvent by both methods") {
  const auto t = TruncatedTree::from_children({{1.0}, {}});
  const Complex want(-0.2, 0.6);
  const auto r = tree_resolvent_recursive(t, kI);
  const auto d = tree_resolvent_direct(t, kI);
  CHECK(r.method == ResolventMethod::recursive);
  CHECK(d.method == ResolventMethod::direct);
  CHECK(std::abs(r.value - want) <= 1e-15);
  CHECK(std::abs(d.value - want) <= 1e-15);
  CHECK_THROWS_AS(tree_resolvent_recursive(t, Complex(1.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(tree_resolvent_direct(t, Complex(1.0, -1.0)), std::invalid_argument);
}

TEST_CASE("sampled trees: sorted children, loop identity, method agreement") {
  struct Case {
    LevyMeasure m;
    TruncationParams p;
    Complex z;
  };
  const std::vector<Case> cases = {
      {LevyMeasure::point_mass(2.0), {3, 64, 0.0}, Complex(0.0, 0.5)},
      {LevyMeasure::point_mass(2.0), {6, 64, 0.0}, Complex(1.0, 1.0)},
      {LevyMeasure::scaled_gaussian(2.0), {4, 64, 0.0}, Complex(-0.5, 0.3)},
      {LevyMeasure::alpha_stable(0.5, 0.5), {2, 256, 1e-3}, Complex(0.2, 1.0)},
      {LevyMeasure::alpha_stable(0.5, 0.9), {4, 4, 1e-3}, Complex(0.0, 0.5)},
  };
  double worst = 0.0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    for (std::uint64_t k = 0; k < 40; ++k) {
      RandomStream rng(31, derive_stream_id(stream_kind::kTree, c, k));
      const auto t = sample_tree(cases[c].m, cases[c].p, rng);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& v = t.node(i);
        CHECK(v.depth <= cases[c].p.depth);
        CHECK(v.child_count <= cases[c].p.branching);
        for (std::size_t j = 1; j < v.child_count; ++j)
          CHECK(std::abs(t.node(v.first_child + j - 1).edge_weight) >=
                std::abs(t.node(v.first_child + j).edge_weight));
        if (i > 0) {
          CHECK(v.parent < i);
          CHECK(std::abs(v.edge_weight) >= cases[c].p.delta);
        }
      }
      check_loop_identity(t);
      const auto r = tree_resolvent_recursive(t, cases[c].z);
      const auto d = tree_resolvent_direct(t, cases[c].z);
      CHECK(r.guard_hits == 0);
      CHECK(r.value.imag() > 0.0);
      CHECK(std::abs(r.value) <= 1.0 / cases[c].z.imag());
      worst = std::max(worst, std::abs(r.value - d.value));
    }
  }
  MESSAGE("worst recursive vs direct " << worst);
  CHECK(worst <= 1e-10);
}

TEST_CASE("direct method refuses oversized trees") {
  RandomStream rng(2, 2);
  const auto t = sample_tree(LevyMeasure::point_mass(8.0), TruncationParams{3, 64, 0.0}, rng);
  REQUIRE(t.size() > 10);
  CHECK_THROWS_AS(tree_resolvent_direct(t, kI, 10), std::runtime_error);
}

TEST_CASE("runaway trees hit the node guard") {
  RandomStream rng(3, 3);
  TruncationParams p{20, 64, 0.0};
  p.max_nodes = 1000;
  CHECK_THROWS(sample_tree(LevyMeasure::point_mass(5.0), p, rng));
}

TEST_CASE("tree text export") {
  const auto t = TruncatedTree::from_children({{2.0, 1.0}, {0.5}, {}, {}});
  std::istringstream in(t.to_text());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "word,parent_word,edge_weight,loop_weight");
  CHECK(lines[1].rfind("root,", 0) == 0);
  CHECK(lines[4].rfind("1.1,1,", 0) == 0);
}

TEST_CASE("ensemble: trivial measure, bounded stderr, worker determinism") {
  const std::vector<Complex> pts = {kI, Complex(2.0, 0.5)};
  const auto zero = sample_root_resolvent_ensemble(LevyMeasure::point_mass(0.0), {4, 64, 0.0}, pts, 50, 1);
  for (std::size_t k = 0; k < 50; ++k)
    for (std::size_t j = 0; j < pts.size(); ++j) CHECK(zero[k * pts.size() + j] == -1.0 / pts[j]);

  const auto m = LevyMeasure::point_mass(2.0);
  const auto a = sample_root_resolvent_ensemble(m, {5, 64, 0.0}, pts, 2000, 7, 1);
  const auto b = sample_root_resolvent_ensemble(m, {5, 64, 0.0}, pts, 2000, 7, 3);
  CHECK(a == b);
  CHECK_THROWS_AS(sample_root_resolvent_ensemble(m, {5, 64, 0.0}, pts, 0, 7), std::invalid_argument);
}

TEST_CASE("ensemble mean stabilizes in depth") {
  const auto m = LevyMeasure::point_mass(2.0);
  const Complex z(0.0, 0.5);
  const std::size_t count = 100000;
  std::vector<MeanAndError> by_depth;
  for (std::size_t h : {2, 4, 6, 8, 10}) by_depth.push_back(summarize(sample_root_resolvent_ensemble(m, {h, 64, 0.0}, {z}, count, 11)));
  const auto& h8 = by_depth[3];
  const auto& h10 = by_depth[4];
  MESSAGE("H=8 mean " << h8.mean << " stderr " << h8.stderr_re << "," << h8.stderr_im << " H=10 mean " << h10.mean);
  CHECK(h8.stderr_re <= (1.0 / z.imag()) / std::sqrt(double(count)));
  CHECK(h8.stderr_im <= (1.0 / z.imag()) / std::sqrt(double(count)));
  CHECK(std::abs(h8.mean.real() - h10.mean.real()) <= 2.0 * h8.stderr_re);
  CHECK(std::abs(h8.mean.imag() - h10.mean.imag()) <= 2.0 * h8.stderr_im);
  // Cauchy in depth: successive gaps shrink
  std::vector<double> gaps;
  for (std::size_t i = 0; i + 1 < by_depth.size(); ++i) gaps.push_back(std::abs(by_depth[i].mean - by_depth[i + 1].mean));
  MESSAGE("depth gaps " << gaps[0] << " " << gaps[1] << " " << gaps[2] << " " << gaps[3]);
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) CHECK(gaps[i + 1] < gaps[i]);
}
