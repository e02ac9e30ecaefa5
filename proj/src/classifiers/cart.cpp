#include "cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pam/error.hpp"

namespace pam::clf::detail {
namespace {

struct OpenNode {
  int node = 0;
  int depth = 0;
  SplitStats total;
  bool splittable = true;
};

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct Running {
  SplitStats left;
  double last = 0.0;
};

double quality(const SplitStats& s, const TreeParams& p) {
  if (p.criterion == Criterion::gini) {
    const double n = s.a + s.b;
    return n > 0.0 ? (s.a * s.a + s.b * s.b) / n : 0.0;
  }
  return s.a * s.a / (s.b + p.lambda);
}

double leaf_value(const SplitStats& s, const TreeParams& p) {
  if (p.criterion == Criterion::gini) {
    const double n = s.a + s.b;
    return n > 0.0 ? s.a / n : 0.5;
  }
  return -s.a / (s.b + p.lambda);
}

bool is_pure(const SplitStats& s, const TreeParams& p) {
  return p.criterion == Criterion::gini && (s.a <= 0.0 || s.b <= 0.0);
}

}  // namespace

double Tree::predict(std::span<const double> x) const {
  int k = 0;
  while (nodes[k].feature >= 0) {
    const auto& n = nodes[k];
    k = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[k].value;
}

nlohmann::json Tree::to_json() const {
  std::vector<int> feature, left, right;
  std::vector<double> threshold, value;
  for (const auto& n : nodes) {
    feature.push_back(n.feature);
    left.push_back(n.left);
    right.push_back(n.right);
    threshold.push_back(n.threshold);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value}};
}

Tree Tree::from_json(const nlohmann::json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const auto n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n)
    throw StructuralError("tree arrays are inconsistent");
  Tree t;
  t.nodes.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    t.nodes[k] = {feature[k], threshold[k], left[k], right[k], value[k]};
    if (feature[k] >= 0 && (left[k] <= static_cast<int>(k) || right[k] <= static_cast<int>(k) ||
                            left[k] >= static_cast<int>(n) || right[k] >= static_cast<int>(n)))
      throw StructuralError("tree child index out of range");
  }
  return t;
}

SortedColumns SortedColumns::build(const LabeledDataset& data) {
  SortedColumns s;
  s.rows = data.size();
  s.dim = data.dim();
  s.order.resize(s.rows * s.dim);
  const auto values = data.values();
  std::vector<std::uint32_t> idx(s.rows);
  for (std::size_t f = 0; f < s.dim; ++f) {
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      return values[a * s.dim + f] < values[b * s.dim + f];
    });
    std::copy(idx.begin(), idx.end(), s.order.begin() + static_cast<std::ptrdiff_t>(f * s.rows));
  }
  return s;
}

Tree grow_tree(const LabeledDataset& data, const SortedColumns& sorted,
               std::span<const double> stat_a, std::span<const double> stat_b,
               std::span<const std::uint8_t> active, const TreeParams& params,
               std::mt19937_64* rng) {
  const std::size_t m = data.size();
  const std::size_t dim = data.dim();
  const auto values = data.values();
  const auto min_leaf = static_cast<std::size_t>(std::max(1, params.min_samples_leaf));
  const bool subsample = params.max_features > 0 && params.max_features < dim;
  if (subsample && rng == nullptr) throw InvalidInput("feature subsampling needs a generator");

  Tree tree;
  tree.nodes.emplace_back();
  std::vector<int> slot(m, -1);
  OpenNode root;
  for (std::size_t k = 0; k < m; ++k) {
    if (!active[k]) continue;
    slot[k] = 0;
    root.total.a += stat_a[k];
    root.total.b += stat_b[k];
    ++root.total.count;
  }
  std::vector<OpenNode> open{root};
  std::vector<std::size_t> feature_pool(dim);

  while (!open.empty()) {
    const std::size_t q_count = open.size();
    for (auto& q : open) {
      q.splittable = q.depth < params.max_depth && q.total.count >= 2 * min_leaf &&
                     !is_pure(q.total, params);
    }

    // Per-node candidate features, as a q_count x dim mask when subsampling.
    std::vector<std::uint8_t> allowed;
    if (subsample) {
      allowed.assign(q_count * dim, 0);
      for (std::size_t q = 0; q < q_count; ++q) {
        if (!open[q].splittable) continue;
        std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
        for (std::size_t k = 0; k < params.max_features; ++k) {
          std::uniform_int_distribution<std::size_t> pick(k, dim - 1);
          std::swap(feature_pool[k], feature_pool[pick(*rng)]);
          allowed[q * dim + feature_pool[k]] = 1;
        }
      }
    }

    std::vector<Candidate> best(q_count);
    std::vector<Running> run(q_count);
    for (std::size_t f = 0; f < dim; ++f) {
      std::fill(run.begin(), run.end(), Running{});
      for (std::uint32_t k : sorted.column(f)) {
        const int q = slot[k];
        if (q < 0) continue;
        const auto qi = static_cast<std::size_t>(q);
        if (!open[qi].splittable || (subsample && !allowed[qi * dim + f])) continue;
        const double v = values[k * dim + f];
        auto& r = run[qi];
        if (r.left.count >= min_leaf && v > r.last) {
          const auto& total = open[qi].total;
          const SplitStats right{total.a - r.left.a, total.b - r.left.b,
                                 total.count - r.left.count};
          if (right.count >= min_leaf) {
            const double gain = quality(r.left, params) + quality(right, params) -
                                quality(total, params);
            if (gain > best[qi].gain) {
              double mid = r.last + 0.5 * (v - r.last);
              if (!(mid < v)) mid = r.last;
              best[qi] = {gain, static_cast<int>(f), mid};
            }
          }
        }
        r.left.a += stat_a[k];
        r.left.b += stat_b[k];
        ++r.left.count;
        r.last = v;
      }
    }

    std::vector<OpenNode> next;
    std::vector<int> child_slot(q_count * 2, -1);
    for (std::size_t q = 0; q < q_count; ++q) {
      const auto& node = open[q];
      const auto& c = best[q];
      const double floor = 1e-10 * std::abs(quality(node.total, params));
      if (!node.splittable || c.feature < 0 || !(c.gain > floor)) {
        auto& leaf = tree.nodes[static_cast<std::size_t>(node.node)];
        leaf.feature = -1;
        leaf.value = leaf_value(node.total, params);
        continue;
      }
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& split = tree.nodes[static_cast<std::size_t>(node.node)];
      split.feature = c.feature;
      split.threshold = c.threshold;
      split.left = left;
      split.right = left + 1;
      split.value = leaf_value(node.total, params);
      child_slot[2 * q] = static_cast<int>(next.size());
      next.push_back({left, node.depth + 1, {}, true});
      child_slot[2 * q + 1] = static_cast<int>(next.size());
      next.push_back({left + 1, node.depth + 1, {}, true});
    }

    for (std::size_t k = 0; k < m; ++k) {
      const int q = slot[k];
      if (q < 0) continue;
      const auto qi = static_cast<std::size_t>(q);
      if (child_slot[2 * qi] < 0) {
        slot[k] = -1;
        continue;
      }
      const auto& split = tree.nodes[static_cast<std::size_t>(open[qi].node)];
      const bool go_left = values[k * dim + static_cast<std::size_t>(split.feature)] <= split.threshold;
      const int s = child_slot[2 * qi + (go_left ? 0 : 1)];
      slot[k] = s;
      auto& t = next[static_cast<std::size_t>(s)].total;
      t.a += stat_a[k];
      t.b += stat_b[k];
      ++t.count;
    }
    open = std::move(next);
  }
  return tree;
}

}  // namespace pam::clf::detail
