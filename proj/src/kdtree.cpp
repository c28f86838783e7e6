#include "kaes/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "kaes/error.hpp"
#include "kaes/random.hpp"

namespace kaes {

double squared_distance(std::span<const float> a, std::span<const float> b) noexcept {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
    sum += diff * diff;
  }
  return sum;
}

std::size_t nearest_linear(std::span<const float> points, std::size_t dim, std::span<const float> query) {
  if (dim == 0 || points.empty()) throw ValidationError("nearest_linear on an empty point set");
  const std::size_t n = points.size() / dim;
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = squared_distance(points.subspan(i * dim, dim), query);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

KdForest::KdForest(std::span<const float> points, std::size_t dim, KdTreeOptions options)
    : points_(points.begin(), points.end()), dim_(dim), options_(options) {
  if (dim == 0 || points.empty() || points.size() % dim != 0)
    throw ValidationError("k-d tree needs a non-empty n x dim point matrix");
  if (options_.trees < 1) throw ValidationError("k-d forest needs at least one tree");
  if (options_.leaf_size < 1) options_.leaf_size = 1;
  const auto n = static_cast<std::uint32_t>(size());
  const bool randomized = options_.trees > 1;
  std::uint64_t rng_state = options_.seed;
  for (int t = 0; t < options_.trees; ++t) {
    Tree tree;
    tree.order.resize(n);
    std::iota(tree.order.begin(), tree.order.end(), 0U);
    tree.nodes.reserve(2 * n / options_.leaf_size + 2);
    build(tree, 0, n, randomized, rng_state);
    trees_.push_back(std::move(tree));
  }
}

std::uint32_t KdForest::build(Tree& tree, std::uint32_t begin, std::uint32_t end, bool randomized,
                              std::uint64_t& rng_state) {
  const auto id = static_cast<std::uint32_t>(tree.nodes.size());
  tree.nodes.push_back(Node{});
  tree.nodes[id].begin = begin;
  tree.nodes[id].end = end;
  if (end - begin <= options_.leaf_size) return id;

  // Per-dimension variance over this node's points.
  std::vector<std::pair<double, int>> spread(dim_);
  for (std::size_t d = 0; d < dim_; ++d) {
    double mean = 0.0, m2 = 0.0;
    std::size_t count = 0;
    for (std::uint32_t k = begin; k < end; ++k) {
      const double x = points_[tree.order[k] * dim_ + d];
      ++count;
      const double delta = x - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (x - mean);
    }
    spread[d] = {m2, static_cast<int>(d)};
  }
  std::sort(spread.begin(), spread.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  if (spread.front().first <= 0.0) return id;  // all points identical

  int dim_choice = spread.front().second;
  if (randomized) {
    const int candidates = std::min<int>(options_.candidate_dims, static_cast<int>(dim_));
    int usable = 0;
    while (usable < candidates && spread[static_cast<std::size_t>(usable)].first > 0.0) ++usable;
    rng_state = splitmix64(rng_state);
    dim_choice = spread[rng_state % static_cast<std::uint64_t>(usable)].second;
  }

  const std::uint32_t mid = begin + (end - begin) / 2;
  auto coord = [&](std::uint32_t p) { return points_[p * dim_ + static_cast<std::size_t>(dim_choice)]; };
  std::nth_element(tree.order.begin() + begin, tree.order.begin() + mid, tree.order.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return coord(a) < coord(b) || (coord(a) == coord(b) && a < b);
                   });
  const double split = coord(tree.order[mid]);

  const std::uint32_t left = build(tree, begin, mid, randomized, rng_state);
  const std::uint32_t right = build(tree, mid, end, randomized, rng_state);
  Node& node = tree.nodes[id];
  node.split_dim = dim_choice;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdForest::search_exact(const Tree& tree, std::uint32_t node_id, std::span<const float> query,
                            double& best_dist, std::size_t& best) const {
  const Node& node = tree.nodes[node_id];
  if (node.split_dim < 0) {
    for (std::uint32_t k = node.begin; k < node.end; ++k) {
      const std::size_t p = tree.order[k];
      const double d = squared_distance(std::span(points_).subspan(p * dim_, dim_), query);
      if (d < best_dist || (d == best_dist && p < best)) {
        best_dist = d;
        best = p;
      }
    }
    return;
  }
  // Points left of the split have coordinate <= split, right ones >= split.
  const double diff = static_cast<double>(query[static_cast<std::size_t>(node.split_dim)]) - node.split;
  const std::uint32_t near = diff < 0.0 ? node.left : node.right;
  const std::uint32_t far = diff < 0.0 ? node.right : node.left;
  search_exact(tree, near, query, best_dist, best);
  // Equality must still be explored: a tie may carry a lower index.
  if (diff * diff <= best_dist) search_exact(tree, far, query, best_dist, best);
}

std::size_t KdForest::search_approximate(std::span<const float> query) const {
  struct Branch {
    double bound;
    std::size_t tree;
    std::uint32_t node;
    bool operator>(const Branch& o) const {
      return bound > o.bound || (bound == o.bound && (tree > o.tree || (tree == o.tree && node > o.node)));
    }
  };
  std::priority_queue<Branch, std::vector<Branch>, std::greater<>> queue;
  for (std::size_t t = 0; t < trees_.size(); ++t) queue.push({0.0, t, 0});

  std::vector<char> seen(size(), 0);
  std::size_t checks = 0;
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  while (!queue.empty()) {
    const Branch b = queue.top();
    queue.pop();
    if (b.bound > best_dist) break;
    if (checks >= options_.max_checks && best_dist < std::numeric_limits<double>::infinity()) break;
    const Tree& tree = trees_[b.tree];
    std::uint32_t id = b.node;
    // Descend to a leaf, deferring the far side of every split.
    while (tree.nodes[id].split_dim >= 0) {
      const Node& node = tree.nodes[id];
      const double diff = static_cast<double>(query[static_cast<std::size_t>(node.split_dim)]) - node.split;
      const std::uint32_t near = diff < 0.0 ? node.left : node.right;
      const std::uint32_t far = diff < 0.0 ? node.right : node.left;
      queue.push({std::max(b.bound, diff * diff), b.tree, far});
      id = near;
    }
    const Node& leaf = tree.nodes[id];
    for (std::uint32_t k = leaf.begin; k < leaf.end; ++k) {
      const std::size_t p = tree.order[k];
      if (seen[p]) continue;
      seen[p] = 1;
      ++checks;
      const double d = squared_distance(std::span(points_).subspan(p * dim_, dim_), query);
      if (d < best_dist || (d == best_dist && p < best)) {
        best_dist = d;
        best = p;
      }
    }
  }
  return best;
}

std::size_t KdForest::nearest(std::span<const float> query) const {
  if (trees_.empty()) throw ValidationError("nearest on an empty k-d forest");
  if (query.size() != dim_)
    throw ValidationError("query has " + std::to_string(query.size()) + " components, index dim is " +
                          std::to_string(dim_));
  if (!options_.exact()) return search_approximate(query);
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  search_exact(trees_.front(), 0, query, best_dist, best);
  return best;
}

}  // namespace kaes
