#include "rkx/trees.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>

namespace rkx {
namespace {

TEST(Forest, CountsMatchTheKnownSequence) {
  const std::vector<std::size_t> expected = {1, 1, 2, 4, 9, 20, 48, 115, 286, 719, 1842, 4766};
  const auto& f = Forest::up_to(12);
  for (int q = 1; q <= 12; ++q) EXPECT_EQ(f.count(q), expected[static_cast<std::size_t>(q - 1)]) << q;
  EXPECT_EQ(f.cumulative_count(4), 8u);
  EXPECT_EQ(f.cumulative_count(10), 1205u);
  EXPECT_EQ(enumerate_trees(5).size(), 17u);
  EXPECT_THROW(enumerate_trees(0), std::out_of_range);
  EXPECT_THROW(enumerate_trees(13), std::out_of_range);
}

TEST(Forest, OrderFourTreesHaveTheClassicalDensities) {
  const auto& f = Forest::up_to(4);
  auto [a, b] = f.range(4);
  std::multiset<long> gammas, sigmas;
  for (auto k = a; k < b; ++k) {
    gammas.insert(f[k].gamma.convert_to<long>());
    sigmas.insert(f[k].sigma.convert_to<long>());
  }
  EXPECT_EQ(gammas, (std::multiset<long>{4, 8, 12, 24}));
  EXPECT_EQ(sigmas, (std::multiset<long>{1, 1, 2, 6}));
  // Tall tree first, bushy tree last.
  EXPECT_EQ(f[a].levels, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(f[b - 1].levels, (std::vector<int>{1, 2, 2, 2}));
}

TEST(Forest, LevelSequencesAreCanonicalAndDistinct) {
  const auto& f = Forest::up_to(12);
  std::set<std::vector<int>> seen;
  for (const auto& t : f.trees()) {
    EXPECT_EQ(static_cast<int>(t.levels.size()), t.order);
    EXPECT_TRUE(seen.insert(t.levels).second);
  }
  for (int q = 1; q <= 12; ++q) {
    auto [a, b] = f.range(q);
    for (auto k = a + 1; k < b; ++k) EXPECT_GT(f[k - 1].levels, f[k].levels);
  }
}

// Oracle: every increasing labelling of n vertices (parent[i] < i) is a
// recursive tree; each unlabelled shape t appears exactly n!/(sigma gamma)
// times. Shapes are identified by a canonical string built independently.
struct Labelled {
  std::vector<std::vector<int>> kids;
};

std::string canon(const Labelled& t, int v) {
  std::vector<std::string> parts;
  for (int c : t.kids[static_cast<std::size_t>(v)]) parts.push_back(canon(t, c));
  std::sort(parts.begin(), parts.end());
  std::string out = "(";
  for (auto& p : parts) out += p;
  return out + ")";
}

long subtree_density(const Labelled& t, int v, int& size) {
  long g = 1;
  size = 1;
  for (int c : t.kids[static_cast<std::size_t>(v)]) {
    int sz = 0;
    g *= subtree_density(t, c, sz);
    size += sz;
  }
  return g * size;
}

std::string canon_of(const RootedTree& t, const Forest& f) {
  std::vector<std::string> parts;
  for (auto c : t.children) parts.push_back(canon_of(f[c], f));
  std::sort(parts.begin(), parts.end());
  std::string out = "(";
  for (auto& p : parts) out += p;
  return out + ")";
}

TEST(Forest, MatchesBruteForceOverRecursiveTrees) {
  const auto& f = Forest::up_to(7);
  for (int n = 1; n <= 7; ++n) {
    std::map<std::string, std::pair<long, long>> shapes;  // count, gamma
    std::vector<int> parent(static_cast<std::size_t>(n), 0);
    std::function<void(int)> rec = [&](int i) {
      if (i == n) {
        Labelled t;
        t.kids.resize(static_cast<std::size_t>(n));
        for (int v = 1; v < n; ++v) t.kids[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])].push_back(v);
        int size = 0;
        const long g = subtree_density(t, 0, size);
        auto& e = shapes[canon(t, 0)];
        ++e.first;
        e.second = g;
        return;
      }
      for (int p = 0; p < i; ++p) {
        parent[static_cast<std::size_t>(i)] = p;
        rec(i + 1);
      }
    };
    rec(1);
    auto [a, b] = f.range(n);
    ASSERT_EQ(shapes.size(), b - a) << "order " << n;
    long n_fact = 1;
    for (int k = 2; k <= n; ++k) n_fact *= k;
    long alpha_sum = 0;
    for (auto k = a; k < b; ++k) {
      const auto it = shapes.find(canon_of(f[k], f));
      ASSERT_NE(it, shapes.end());
      const long gamma = f[k].gamma.convert_to<long>();
      const long sigma = f[k].sigma.convert_to<long>();
      EXPECT_EQ(gamma, it->second.second);
      EXPECT_EQ(it->second.first, n_fact / (gamma * sigma));
      alpha_sum += n_fact / (gamma * sigma);
    }
    long fact_n1 = 1;
    for (int k = 2; k < n; ++k) fact_n1 *= k;
    EXPECT_EQ(alpha_sum, fact_n1);
  }
}

TEST(Forest, AlphaSumsToFactorialThroughOrderTwelve) {
  const auto& f = Forest::up_to(12);
  for (int q = 1; q <= 12; ++q) {
    Integer q_fact = 1, sum = 0;
    for (int k = 2; k <= q; ++k) q_fact *= k;
    auto [a, b] = f.range(q);
    for (auto k = a; k < b; ++k) {
      const Integer denom = f[k].gamma * f[k].sigma;
      ASSERT_EQ(q_fact % denom, 0);
      sum += q_fact / denom;
    }
    EXPECT_EQ(sum * q, q_fact) << q;
  }
}

}  // namespace
}  // namespace rkx
