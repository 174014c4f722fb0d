#include <doctest.h>

#include <set>

#include "hrnacc/clusters.hpp"
#include "hrnacc/rng.hpp"

using namespace hrnacc;

namespace {

std::vector<Span> index_mentions(int n) {
  std::vector<Span> out;
  for (int i = 0; i < n; ++i) out.push_back({i, i});
  return out;
}

// Graph-reachability oracle: connected components by BFS over link edges.
std::vector<std::set<int>> bfs_components(int n, const std::vector<std::pair<int, int>>& links) {
  std::vector<std::vector<int>> adj;
  adj.resize(size_t(n));
  for (auto [i, j] : links) {
    adj[size_t(i)].push_back(j);
    adj[size_t(j)].push_back(i);
  }
  std::vector<bool> seen(size_t(n), false);
  std::vector<std::set<int>> components;
  for (int s = 0; s < n; ++s) {
    if (seen[size_t(s)]) continue;
    std::set<int> comp;
    std::vector<int> queue = {s};
    seen[size_t(s)] = true;
    while (!queue.empty()) {
      int v = queue.back();
      queue.pop_back();
      comp.insert(v);
      for (int w : adj[size_t(v)]) {
        if (!seen[size_t(w)]) {
          seen[size_t(w)] = true;
          queue.push_back(w);
        }
      }
    }
    if (comp.size() >= 2) components.push_back(std::move(comp));
  }
  return components;
}

std::vector<std::set<int>> as_index_sets(const ClusterSet& cs) {
  std::vector<std::set<int>> out;
  for (const auto& c : cs.clusters) {
    std::set<int> s;
    for (const Span& m : c) s.insert(m.start);
    out.push_back(std::move(s));
  }
  return out;
}

bool same_partition(std::vector<std::set<int>> a, std::vector<std::set<int>> b) {
  auto key = [](const std::set<int>& s) { return *s.begin(); };
  std::sort(a.begin(), a.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
  std::sort(b.begin(), b.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
  return a == b;
}

}  // namespace

TEST_CASE("links_to_clusters closes links transitively") {
  auto mentions = index_mentions(4);

  SUBCASE("chain becomes one cluster") {
    ClusterSet cs = links_to_clusters({{1, 0}, {2, 1}}, mentions);
    REQUIRE(cs.clusters.size() == 1);
    CHECK(cs.clusters[0] == std::vector<Span>{{0, 0}, {1, 1}, {2, 2}});
    CHECK(cs.provenance[0] == Provenance::ActorCritic);
  }

  SUBCASE("disjoint links become two clusters") {
    ClusterSet cs = links_to_clusters({{1, 0}, {3, 2}}, mentions);
    CHECK(cs.clusters.size() == 2);
  }

  SUBCASE("links must satisfy j < i") {
    CHECK_THROWS_AS(links_to_clusters({{0, 1}}, mentions), ContractViolation);
  }

  SUBCASE("random link sets match the reachability oracle") {
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
      int n = 2 + rng.uniform_int(7);
      std::vector<std::pair<int, int>> links;
      int n_links = rng.uniform_int(n + 2);
      for (int l = 0; l < n_links; ++l) {
        int i = 1 + rng.uniform_int(n - 1);
        int j = rng.uniform_int(i);
        links.push_back({i, j});
      }
      ClusterSet cs = links_to_clusters(links, index_mentions(n));
      CHECK(same_partition(as_index_sets(cs), bfs_components(n, links)));
    }
  }
}

TEST_CASE("reunion merges overlapping clusters to a fixed point") {
  auto mk = [](std::vector<std::vector<int>> groups, Provenance p) {
    ClusterSet cs;
    for (auto& g : groups) {
      std::vector<Span> spans;
      for (int m : g) spans.push_back({m, m});
      cs.clusters.push_back(std::move(spans));
      cs.provenance.push_back(p);
    }
    cs.normalize();
    return cs;
  };

  SUBCASE("shared mention merges the pair") {
    ClusterSet ac = mk({{2, 5}}, Provenance::ActorCritic);
    GroupPartition rules;
    rules.linked = mk({{5, 9}}, Provenance::Rules);
    ClusterSet merged = reunion(ac, rules);
    REQUIRE(merged.clusters.size() == 1);
    CHECK(merged.clusters[0] == std::vector<Span>{{2, 2}, {5, 5}, {9, 9}});
    CHECK(merged.provenance[0] == Provenance::Reunion);
  }

  SUBCASE("disjoint inputs pass through with their provenance") {
    ClusterSet ac = mk({{0, 1}}, Provenance::ActorCritic);
    GroupPartition rules;
    rules.linked = mk({{4, 5}}, Provenance::Rules);
    ClusterSet merged = reunion(ac, rules);
    REQUIRE(merged.clusters.size() == 2);
    CHECK(merged.provenance[0] == Provenance::ActorCritic);
    CHECK(merged.provenance[1] == Provenance::Rules);
  }

  SUBCASE("chained overlaps collapse into one cluster") {
    ClusterSet ac = mk({{0, 1}}, Provenance::ActorCritic);
    GroupPartition rules;
    rules.linked = mk({{1, 2}, {2, 3}}, Provenance::Rules);
    ClusterSet merged = reunion(ac, rules);
    REQUIRE(merged.clusters.size() == 1);
    CHECK(merged.clusters[0].size() == 4);
  }

  SUBCASE("output is a partition and reunion is idempotent") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
      int n = 4 + rng.uniform_int(8);
      auto random_clusters = [&](Provenance p) {
        std::vector<std::vector<int>> groups;
        std::vector<int> pool;
        for (int i = 0; i < n; ++i) pool.push_back(i);
        for (size_t i = pool.size(); i > 1; --i)
          std::swap(pool[i - 1], pool[size_t(rng.uniform_int(int(i)))]);
        size_t at = 0;
        while (at + 2 <= pool.size() && rng.uniform() < 0.7) {
          size_t size = 2 + size_t(rng.uniform_int(3));
          size = std::min(size, pool.size() - at);
          if (size < 2) break;
          groups.push_back(std::vector<int>(pool.begin() + long(at),
                                            pool.begin() + long(at + size)));
          at += size;
        }
        return mk(groups, p);
      };
      ClusterSet ac = random_clusters(Provenance::ActorCritic);
      GroupPartition rules;
      rules.linked = random_clusters(Provenance::Rules);
      ClusterSet merged = reunion(ac, rules);

      std::set<Span> seen;
      for (const auto& c : merged.clusters) {
        CHECK(c.size() >= 2);
        for (const Span& s : c) CHECK(seen.insert(s).second);
      }

      GroupPartition empty_rules;
      ClusterSet again = reunion(merged, empty_rules);
      CHECK(again.clusters == merged.clusters);
    }
  }
}
