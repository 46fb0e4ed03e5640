#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "anomspec/errors.hpp"
#include "anomspec/forest.hpp"

using namespace anomspec;

namespace {

Dataset uniform_points(std::size_t dims, std::size_t n, std::uint64_t seed, double lo = -1, double hi = 1) {
  Rng rng = make_rng(seed);
  Dataset d(dims);
  std::vector<double> p(dims);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : p) v = uniform(rng, lo, hi);
    d.push_back(p);
  }
  return d;
}

// Reference descent written against the node fields directly.
std::size_t leaf_of(const Tree& t, std::span<const double> p) {
  std::size_t i = 0;
  const auto nodes = t.nodes();
  while (!nodes[i].is_leaf()) i = p[static_cast<std::size_t>(nodes[i].dim)] < nodes[i].split ? i + 1 : nodes[i].right;
  return i;
}

}  // namespace

TEST_CASE("sampling draws distinct rows and caps at the data size") {
  const Dataset data = uniform_points(1, 10000, 1);
  Rng rng = make_rng(2);
  const auto idx = sample_indices(data, 256, rng);
  CHECK(idx.size() == 256);
  CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 256);
  CHECK(std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return i < data.size(); }));

  const Dataset three = uniform_points(1, 3, 3);
  const auto all = sample_indices(three, 3, rng);
  CHECK(std::set<std::size_t>(all.begin(), all.end()) == std::set<std::size_t>{0, 1, 2});
  CHECK(sample_without_replacement(three, 10, rng).size() == 3);

  CHECK_THROWS_AS(sample_indices(Dataset(1), 5, rng), InvalidArgument);
}

TEST_CASE("tiny trees have the forced shape") {
  Rng rng = make_rng(4);
  const Tree single = build_tree(Dataset(1, {0.5}), rng);
  REQUIRE(single.nodes().size() == 1);
  CHECK(single.nodes()[0].is_leaf());
  CHECK(single.nodes()[0].depth == 0);

  const Tree pair = build_tree(Dataset(1, {0.0, 1.0}), rng);
  REQUIRE(pair.nodes().size() == 3);
  CHECK(pair.nodes()[0].split > 0.0);
  CHECK(pair.nodes()[0].split < 1.0);
  CHECK(pair.nodes()[1].depth == 1);
  CHECK(pair.nodes()[2].depth == 1);

  const Tree same = build_tree(Dataset(2, {3, 3, 3, 3, 3, 3}), rng);
  CHECK(same.nodes().size() == 1);
}

TEST_CASE("adjacent doubles still split") {
  Rng rng = make_rng(5);
  const double a = 1.0, b = std::nextafter(1.0, 2.0);
  const Tree t = build_tree(Dataset(1, {a, b}), rng);
  REQUIRE(t.nodes().size() == 3);
  const double pa[1] = {a}, pb[1] = {b};
  CHECK(leaf_of(t, pa) != leaf_of(t, pb));
}

TEST_CASE("three points in the plane: three leaves, dimensions alternate") {
  Rng rng = make_rng(6);
  const Dataset s(2, {0, 0, 0, 1, 1, 0});
  const Tree t = build_tree(s, rng);
  CHECK(t.leaf_count() == 3);
  std::set<std::size_t> leaves;
  for (std::size_t i = 0; i < 3; ++i) leaves.insert(leaf_of(t, s.point(i)));
  CHECK(leaves.size() == 3);
  // Root splits dimension 0; the child holding two points must then split dimension 1.
  const auto nodes = t.nodes();
  CHECK(nodes[0].dim == 0);
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!nodes[i].is_leaf()) CHECK(nodes[i].dim == 1);
}

TEST_CASE("every distinct sample point gets its own leaf, splits lie inside their partition") {
  for (std::size_t dims : {1u, 2u, 3u}) {
    Dataset s = uniform_points(dims, 200, 10 + dims);
    // Add duplicates: they must share a leaf.
    for (std::size_t i = 0; i < 20; ++i) {
      std::vector<double> p(s.point(i).begin(), s.point(i).end());
      s.push_back(p);
    }
    Rng rng = make_rng(7);
    const Tree t = build_tree(s, rng);

    std::map<std::size_t, std::set<std::vector<double>>> by_leaf;
    for (std::size_t i = 0; i < s.size(); ++i)
      by_leaf[leaf_of(t, s.point(i))].insert({s.point(i).begin(), s.point(i).end()});
    for (const auto& [leaf, points] : by_leaf) CHECK(points.size() == 1);
    CHECK(by_leaf.size() == 200);

    // Depth of every node equals its distance from the root.
    const auto nodes = t.nodes();
    std::vector<Depth> expect(nodes.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].is_leaf()) continue;
      expect[i + 1] = expect[i] + 1;
      expect[nodes[i].right] = expect[i] + 1;
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) CHECK(nodes[i].depth == expect[i]);

    // Each split separates the sample points that reach it into two non-empty groups.
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      if (nodes[n].is_leaf()) continue;
      std::size_t left = 0, right = 0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        std::size_t at = 0;
        bool reached = false;
        while (true) {
          if (at == n) {
            reached = true;
            break;
          }
          if (nodes[at].is_leaf()) break;
          at = s.point(i)[static_cast<std::size_t>(nodes[at].dim)] < nodes[at].split ? at + 1 : nodes[at].right;
        }
        if (!reached) continue;
        (s.point(i)[static_cast<std::size_t>(nodes[n].dim)] < nodes[n].split ? left : right)++;
      }
      CHECK(left > 0);
      CHECK(right > 0);
    }
  }
}

TEST_CASE("path depth follows the reference descent") {
  const Dataset s = uniform_points(2, 256, 20);
  Rng rng = make_rng(21);
  const Tree t = build_tree(s, rng);
  const Dataset probes = uniform_points(2, 2000, 22, -2, 2);
  for (std::size_t i = 0; i < probes.size(); ++i)
    CHECK(t.path_depth(probes.point(i)) == t.nodes()[leaf_of(t, probes.point(i))].depth);
  const double bad[1] = {0.0};
  CHECK_THROWS_AS(t.path_depth(bad), InvalidArgument);
}

TEST_CASE("forest: deterministic per seed, cumulative depth is the sum over trees") {
  const Dataset data = uniform_points(2, 3000, 30);
  const ForestConfig cfg{20, 64, 99, false};
  const Forest a = build_forest(data, cfg);
  const Forest b = build_forest(data, cfg);
  CHECK(a == b);
  CHECK(a.tree_count() == 20);
  ForestConfig other = cfg;
  other.seed = 100;
  CHECK_FALSE(a == build_forest(data, other));

  const auto all = a.cumulative_depths(data);
  for (std::size_t i = 0; i < 300; ++i) {
    Depth sum = 0;
    for (const Tree& t : a.trees()) sum += t.nodes()[leaf_of(t, data.point(i))].depth;
    CHECK(a.cumulative_depth(data.point(i)) == sum);
    CHECK(all[i] == sum);
  }
  CHECK_THROWS_AS(a.cumulative_depths(Dataset(1, {0.0})), InvalidArgument);
  CHECK_THROWS_AS(build_forest(Dataset(2), cfg), InvalidArgument);
}

TEST_CASE("tree validation rejects malformed layouts") {
  using N = Tree::Node;
  CHECK_NOTHROW(Tree(1, {N{0, 2, 0.5, 0}, N{-1, 0, 0, 1}, N{-1, 0, 0, 1}}));
  CHECK_THROWS_AS(Tree(1, {}), InvalidArgument);
  CHECK_THROWS_AS(Tree(1, {N{0, 1, 0.5, 0}, N{-1, 0, 0, 1}, N{-1, 0, 0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(Tree(1, {N{1, 2, 0.5, 0}, N{-1, 0, 0, 1}, N{-1, 0, 0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(Tree(1, {N{0, 2, NAN, 0}, N{-1, 0, 0, 1}, N{-1, 0, 0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(Tree(1, {N{0, 2, 0.5, 0}, N{-1, 0, 0, 1}}), InvalidArgument);
}

TEST_CASE("integer key normalisation") {
  SUBCASE("keys move to ceil(key) - 0.5") {
    using N = Tree::Node;
    const Tree t(1, {N{0, 4, 3.2, 0}, N{0, 3, 1.0, 1}, N{-1, 0, 0, 2}, N{-1, 0, 0, 2}, N{-1, 0, 0, 1}});
    const Tree u = normalize_integer_keys(t);
    CHECK(u.nodes()[0].split == 3.5);
    CHECK(u.nodes()[1].split == 0.5);
  }
  SUBCASE("integer points keep their leaves") {
    // Brute force over every integer point of the box the data spans.
    Rng gen = make_rng(40);
    Dataset s(2);
    for (int i = 0; i < 256; ++i) {
      const double p[2] = {static_cast<double>(uniform_index(gen, 30)), static_cast<double>(uniform_index(gen, 30))};
      s.push_back(p);
    }
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng = make_rng(seed);
      const Tree t = build_tree(s, rng);
      const Tree u = normalize_integer_keys(t);
      for (int x = -2; x < 33; ++x)
        for (int y = -2; y < 33; ++y) {
          const double p[2] = {static_cast<double>(x), static_cast<double>(y)};
          CHECK(leaf_of(t, p) == leaf_of(u, p));
        }
      for (const auto& n : u.nodes())
        if (!n.is_leaf()) CHECK(n.split - std::floor(n.split) == 0.5);
    }
  }
  SUBCASE("forest option applies it") {
    Dataset s(1);
    for (int i = 0; i < 100; ++i) {
      const double p[1] = {static_cast<double>(i % 17)};
      s.push_back(p);
    }
    const Forest f = build_forest(s, {5, 50, 1, true});
    for (const Tree& t : f.trees())
      for (const auto& n : t.nodes())
        if (!n.is_leaf()) CHECK(n.split - std::floor(n.split) == 0.5);
  }
}
