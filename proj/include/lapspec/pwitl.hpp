#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lapspec/levy_measure.hpp"
#include "lapspec/point_process.hpp"
#include "lapspec/random.hpp"
#include "lapspec/stieltjes.hpp"

namespace lapspec {

struct TruncationParams {
  /// Maximum word length; the root has depth 0.
  std::size_t depth = 0;
  /// At most this many children per node (the largest |y| are kept).
  std::size_t branching = 64;
  /// Child weights with |y| < delta are dropped; must be > 0 for infinite m.
  double delta = 0.0;
  /// Guard against runaway trees; sampling throws beyond this.
  std::size_t max_nodes = 1u << 22;

  void validate(const LevyMeasure& m) const;
  /// branching = 64 and no cutoff for finite m; 256 and delta = 1e-3 otherwise.
  static TruncationParams defaults_for(const LevyMeasure& m, std::size_t depth);
};

/// Truncated Poisson weighted infinite tree with loops. Nodes are stored in
/// breadth-first order, so every child comes after its parent; node 0 is the
/// root (empty word).
class TruncatedTree {
 public:
  struct Node {
    std::size_t parent = 0;      // unused for the root
    std::size_t rank = 0;        // 1-based position among its siblings
    std::size_t depth = 0;
    double edge_weight = 0.0;    // y on the edge to the parent
    double loop_weight = 0.0;    // y_vv
    std::size_t first_child = 0;
    std::size_t child_count = 0;
  };

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Word of node i as "1.3.2"; empty string for the root.
  std::string word(std::size_t i) const;
  /// "word,parent_word,edge_weight,loop_weight" rows with a header line.
  std::string to_text() const;

  /// Builds a tree from explicit children lists (used by tests); loop
  /// weights follow from the retained edges.
  static TruncatedTree from_children(const std::vector<std::vector<double>>& children_of);

 private:
  friend TruncatedTree sample_tree(const LevyMeasure&, const TruncationParams&, RandomStream&);
  void finalize_loops();

  std::vector<Node> nodes_;
};

TruncatedTree sample_tree(const LevyMeasure& m, const TruncationParams& params, RandomStream& rng);

enum class ResolventMethod { recursive, direct };

struct RootResolventSample {
  Complex z;
  Complex value;
  ResolventMethod method;
  /// Times the |s y - 1| floor of 1e-14 was hit (must stay zero).
  std::size_t guard_hits = 0;
};

/// Bottom-up s_v = -(z - sum_k y_vk / (s_vk y_vk - 1))^{-1}, leaves -1/z.
/// Throws std::logic_error if a node leaves the Herglotz region.
RootResolventSample tree_resolvent_recursive(const TruncatedTree& t, Complex z);

/// Same quantity by Gaussian elimination with partial pivoting on the dense
/// complex matrix L_t - z; throws std::runtime_error on pivot breakdown or
/// trees above `max_nodes` nodes.
RootResolventSample tree_resolvent_direct(const TruncatedTree& t, Complex z,
                                          std::size_t max_nodes = 4096);

/// Recursive root resolvents at every z of `points` for `count` independent
/// trees; tree k uses stream derive_stream_id(kTree, k). Output is
/// tree-major: result[k * points.size() + j]. Identical for any worker count.
std::vector<Complex> sample_root_resolvent_ensemble(const LevyMeasure& m,
                                                    const TruncationParams& params,
                                                    const std::vector<Complex>& points,
                                                    std::size_t count, std::uint64_t seed,
                                                    std::size_t workers = 1);

}  // namespace lapspec
