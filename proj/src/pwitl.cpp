#include "lapspec/pwitl.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "lapspec/parallel.hpp"
#include "text_format.hpp"

namespace lapspec {

namespace {

constexpr double kDenominatorFloor = 1e-14;
constexpr double kHerglotzSlack = 1e-12;

void check_herglotz(Complex s, Complex z, const char* where) {
  if (!(s.imag() > 0.0) || std::abs(s) > (1.0 + kHerglotzSlack) / z.imag())
    throw std::logic_error(std::string(where) + ": value left the Herglotz region");
}

}  // namespace

void TruncationParams::validate(const LevyMeasure& m) const {
  if (branching < 1) throw std::invalid_argument("TruncationParams: branching must be >= 1");
  if (!m.is_finite() && !(delta > 0.0))
    throw std::invalid_argument("TruncationParams: infinite-mass measure needs delta > 0");
  if (delta < 0.0) throw std::invalid_argument("TruncationParams: delta must be >= 0");
}

TruncationParams TruncationParams::defaults_for(const LevyMeasure& m, std::size_t depth) {
  TruncationParams p;
  p.depth = depth;
  if (m.is_finite()) {
    p.branching = 64;
    p.delta = 0.0;
  } else {
    p.branching = 256;
    p.delta = 1e-3;
  }
  return p;
}

std::string TruncatedTree::word(std::size_t i) const {
  std::vector<std::size_t> ranks;
  while (i != 0) {
    ranks.push_back(nodes_[i].rank);
    i = nodes_[i].parent;
  }
  std::string out;
  for (auto it = ranks.rbegin(); it != ranks.rend(); ++it) {
    if (!out.empty()) out += '.';
    out += std::to_string(*it);
  }
  return out;
}

std::string TruncatedTree::to_text() const {
  std::string out = "word,parent_word,edge_weight,loop_weight\n";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const bool root = i == 0;
    out += (root ? "root" : word(i)) + "," + (root ? "" : (nodes_[i].parent == 0 ? "root" : word(nodes_[i].parent))) +
           "," + detail::g17(nodes_[i].edge_weight) + "," + detail::g17(nodes_[i].loop_weight) + "\n";
  }
  return out;
}

void TruncatedTree::finalize_loops() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& v = nodes_[i];
    double loop = i == 0 ? 0.0 : -v.edge_weight;
    for (std::size_t c = v.first_child; c < v.first_child + v.child_count; ++c) loop -= nodes_[c].edge_weight;
    v.loop_weight = loop;
  }
}

TruncatedTree TruncatedTree::from_children(const std::vector<std::vector<double>>& children_of) {
  TruncatedTree t;
  t.nodes_.push_back(Node{});
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    t.nodes_[i].first_child = t.nodes_.size();
    if (i >= children_of.size()) continue;
    const auto& kids = children_of[i];
    t.nodes_[i].child_count = kids.size();
    for (std::size_t k = 0; k < kids.size(); ++k) {
      Node c;
      c.parent = i;
      c.rank = k + 1;
      c.depth = t.nodes_[i].depth + 1;
      c.edge_weight = kids[k];
      t.nodes_.push_back(c);
    }
  }
  t.finalize_loops();
  return t;
}

TruncatedTree sample_tree(const LevyMeasure& m, const TruncationParams& params, RandomStream& rng) {
  params.validate(m);
  TruncationPolicy policy;
  policy.delta = params.delta;
  policy.max_points = params.branching;
  policy.laplacian_use = true;

  TruncatedTree t;
  t.nodes_.push_back(TruncatedTree::Node{});
  std::vector<double> weights;
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    t.nodes_[i].first_child = t.nodes_.size();
    if (t.nodes_[i].depth >= params.depth) continue;
    sample_point_process_into(m, policy, rng, weights);
    if (t.nodes_.size() + weights.size() > params.max_nodes)
      throw std::runtime_error("sample_tree: tree exceeds max_nodes = " + std::to_string(params.max_nodes));
    t.nodes_[i].child_count = weights.size();
    const std::size_t depth = t.nodes_[i].depth + 1;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      TruncatedTree::Node c;
      c.parent = i;
      c.rank = k + 1;
      c.depth = depth;
      c.edge_weight = weights[k];
      t.nodes_.push_back(c);
    }
  }
  t.finalize_loops();
  return t;
}

RootResolventSample tree_resolvent_recursive(const TruncatedTree& t, Complex z) {
  if (!(z.imag() > 0.0)) throw std::invalid_argument("tree_resolvent_recursive: Im z must be positive");
  RootResolventSample out{z, 0.0, ResolventMethod::recursive, 0};
  std::vector<Complex> s(t.size());
  for (std::size_t i = t.size(); i-- > 0;) {
    const auto& v = t.node(i);
    Complex acc = 0.0;
    for (std::size_t c = v.first_child; c < v.first_child + v.child_count; ++c) {
      const double y = t.node(c).edge_weight;
      Complex den = s[c] * y - 1.0;
      if (std::abs(den) < kDenominatorFloor) {
        ++out.guard_hits;
        den = kDenominatorFloor;
      }
      acc += y * reciprocal(den);
    }
    s[i] = -reciprocal(z - acc);
    check_herglotz(s[i], z, "tree_resolvent_recursive");
  }
  out.value = s[0];
  return out;
}

RootResolventSample tree_resolvent_direct(const TruncatedTree& t, Complex z, std::size_t max_nodes) {
  if (!(z.imag() > 0.0)) throw std::invalid_argument("tree_resolvent_direct: Im z must be positive");
  const std::size_t n = t.size();
  if (n > max_nodes)
    throw std::runtime_error("tree_resolvent_direct: " + std::to_string(n) + " nodes exceed the dense limit");
  // (L_t - z) x = e_root with unknowns ordered leaves first (node i sits at
  // n - 1 - i), so eliminating a node only touches its parent's row.
  std::vector<Complex> a(n * n, 0.0);
  std::vector<Complex> rhs(n, 0.0);
  rhs[n - 1] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t qi = n - 1 - i;
    a[qi * n + qi] = t.node(i).loop_weight - z;
    if (i != 0) {
      const std::size_t qp = n - 1 - t.node(i).parent;
      a[qi * n + qp] = a[qp * n + qi] = t.node(i).edge_weight;
    }
  }
  // LU with partial pivoting; multipliers stay below the diagonal
  std::vector<std::size_t> pivots(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a[k * n + k]);
    for (std::size_t r = k + 1; r < n; ++r)
      if (const double v = std::abs(a[r * n + k]); v > best) {
        best = v;
        piv = r;
      }
    if (best == 0.0) throw std::runtime_error("tree_resolvent_direct: pivot breakdown");
    pivots[k] = piv;
    if (piv != k)
      for (std::size_t c = 0; c < n; ++c) std::swap(a[k * n + c], a[piv * n + c]);
    const Complex inv = 1.0 / a[k * n + k];
    for (std::size_t r = k + 1; r < n; ++r) {
      if (a[r * n + k] == 0.0) continue;
      const Complex f = a[r * n + k] * inv;
      a[r * n + k] = f;
      for (std::size_t c = k + 1; c < n; ++c) a[r * n + c] -= f * a[k * n + c];
    }
  }
  const auto lu_solve = [&](std::vector<Complex> b) {
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(b[k], b[pivots[k]]);
      for (std::size_t r = k + 1; r < n; ++r)
        if (a[r * n + k] != 0.0) b[r] -= a[r * n + k] * b[k];
    }
    for (std::size_t k = n; k-- > 0;) {
      Complex acc = b[k];
      for (std::size_t c = k + 1; c < n; ++c) acc -= a[k * n + c] * b[c];
      b[k] = acc / a[k * n + k];
    }
    return b;
  };
  std::vector<Complex> x = lu_solve(rhs);
  // iterative refinement against the tree itself, residual in extended
  // precision: large weights otherwise cost digits through cancellation
  using Wide = std::complex<long double>;
  for (int step = 0; step < 2; ++step) {
    std::vector<Wide> r(n, Wide(0.0L));
    r[n - 1] = 1.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t qi = n - 1 - i;
      r[qi] -= (static_cast<long double>(t.node(i).loop_weight) - Wide(z)) * Wide(x[qi]);
      if (i != 0) {
        const std::size_t qp = n - 1 - t.node(i).parent;
        const long double w = t.node(i).edge_weight;
        r[qi] -= w * Wide(x[qp]);
        r[qp] -= w * Wide(x[qi]);
      }
    }
    std::vector<Complex> rd(n);
    for (std::size_t i = 0; i < n; ++i) rd[i] = Complex(r[i]);
    const auto d = lu_solve(rd);
    for (std::size_t i = 0; i < n; ++i) x[i] += d[i];
  }
  return {z, x[n - 1], ResolventMethod::direct, 0};
}

std::vector<Complex> sample_root_resolvent_ensemble(const LevyMeasure& m,
                                                    const TruncationParams& params,
                                                    const std::vector<Complex>& points,
                                                    std::size_t count, std::uint64_t seed,
                                                    std::size_t workers) {
  if (count < 1) throw std::invalid_argument("sample_root_resolvent_ensemble: count must be >= 1");
  params.validate(m);
  std::vector<Complex> out(count * points.size());
  parallel_for(count, workers, [&](std::size_t k) {
    RandomStream rng(seed, derive_stream_id(stream_kind::kTree, k));
    const TruncatedTree tree = sample_tree(m, params, rng);
    for (std::size_t j = 0; j < points.size(); ++j)
      out[k * points.size() + j] = tree_resolvent_recursive(tree, points[j]).value;
  });
  return out;
}

}  // namespace lapspec
