#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace kaes {

/// Squared Euclidean distance accumulated in double, dimension order. Both
/// the tree and the linear scan use this exact routine, so they agree bit
/// for bit.
double squared_distance(std::span<const float> a, std::span<const float> b) noexcept;

/// Nearest point by linear scan; ties go to the lowest index.
std::size_t nearest_linear(std::span<const float> points, std::size_t dim, std::span<const float> query);

struct KdTreeOptions {
  /// 1 tree with unlimited checks is exact. More trees turn on randomized
  /// split dimensions and best-bin-first search bounded by max_checks.
  int trees = 1;
  std::size_t max_checks = std::numeric_limits<std::size_t>::max();
  std::size_t leaf_size = 4;
  std::uint64_t seed = 0;
  /// Randomized trees pick each split among this many highest-variance dimensions.
  int candidate_dims = 5;

  bool exact() const noexcept {
    return trees == 1 && max_checks == std::numeric_limits<std::size_t>::max();
  }
};

/// k-d tree (or randomized forest) over a fixed point set. The points are
/// copied, so the index owns everything it needs.
class KdForest {
public:
  KdForest() = default;
  KdForest(std::span<const float> points, std::size_t dim, KdTreeOptions options = {});

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : points_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  const KdTreeOptions& options() const noexcept { return options_; }

  /// Nearest point index; ties go to the lowest index in exact mode.
  std::size_t nearest(std::span<const float> query) const;

private:
  struct Node {
    // Leaves have split_dim == -1 and cover order_[begin, end).
    int split_dim = -1;
    double split = 0.0;
    std::uint32_t left = 0, right = 0;
    std::uint32_t begin = 0, end = 0;
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<std::uint32_t> order;
  };

  std::uint32_t build(Tree& tree, std::uint32_t begin, std::uint32_t end, bool randomized, std::uint64_t& rng_state);
  void search_exact(const Tree& tree, std::uint32_t node, std::span<const float> query,
                    double& best_dist, std::size_t& best) const;
  std::size_t search_approximate(std::span<const float> query) const;

  std::vector<float> points_;
  std::size_t dim_ = 0;
  KdTreeOptions options_{};
  std::vector<Tree> trees_;
};

}  // namespace kaes
