#include "hrnacc/clusters.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "hrnacc/union_find.hpp"

namespace hrnacc {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Rules: return "RULES";
    case Provenance::ActorCritic: return "ACTOR_CRITIC";
    case Provenance::Reunion: return "REUNION";
  }
  return "?";
}

void ClusterSet::normalize() {
  for (auto& c : clusters) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  std::vector<int> order(clusters.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return clusters[size_t(a)] < clusters[size_t(b)]; });
  std::vector<std::vector<Span>> sorted_clusters;
  std::vector<Provenance> sorted_prov;
  for (int idx : order) {
    sorted_clusters.push_back(std::move(clusters[size_t(idx)]));
    if (size_t(idx) < provenance.size()) sorted_prov.push_back(provenance[size_t(idx)]);
  }
  clusters = std::move(sorted_clusters);
  provenance = std::move(sorted_prov);
}

ClusterSet links_to_clusters(const std::vector<std::pair<int, int>>& stored_links,
                             const std::vector<Span>& mentions) {
  UnionFind uf(int(mentions.size()));
  for (const auto& [i, j] : stored_links) {
    if (j >= i || j < 0 || i >= int(mentions.size()))
      throw ContractViolation("stored link (" + std::to_string(i) + "," + std::to_string(j) +
                              ") violates j < i within mention count");
    uf.merge(i, j);
  }
  ClusterSet out;
  for (const auto& group : uf.groups()) {
    if (group.size() < 2) continue;
    std::vector<Span> spans;
    for (int idx : group) spans.push_back(mentions[size_t(idx)]);
    out.clusters.push_back(std::move(spans));
    out.provenance.push_back(Provenance::ActorCritic);
  }
  out.normalize();
  return out;
}

ClusterSet reunion(const ClusterSet& ac_clusters, const GroupPartition& rule_partition) {
  const ClusterSet& rules = rule_partition.linked;

  std::map<Span, int> node_of;
  auto node = [&](Span s) {
    auto it = node_of.find(s);
    if (it != node_of.end()) return it->second;
    int id = int(node_of.size());
    node_of.emplace(s, id);
    return id;
  };
  for (const auto& c : ac_clusters.clusters)
    for (Span s : c) node(s);
  for (const auto& c : rules.clusters)
    for (Span s : c) node(s);

  UnionFind uf(int(node_of.size()));
  std::vector<bool> from_ac(node_of.size(), false);
  std::vector<bool> from_rules(node_of.size(), false);
  for (const auto& c : ac_clusters.clusters) {
    for (size_t k = 0; k < c.size(); ++k) {
      from_ac[size_t(node(c[k]))] = true;
      if (k) uf.merge(node(c[0]), node(c[k]));
    }
  }
  for (const auto& c : rules.clusters) {
    for (size_t k = 0; k < c.size(); ++k) {
      from_rules[size_t(node(c[k]))] = true;
      if (k) uf.merge(node(c[0]), node(c[k]));
    }
  }

  std::vector<Span> span_of(node_of.size());
  for (const auto& [s, id] : node_of) span_of[size_t(id)] = s;

  ClusterSet out;
  for (const auto& group : uf.groups()) {
    if (group.size() < 2) continue;
    std::vector<Span> spans;
    bool any_ac = false, any_rules = false;
    for (int idx : group) {
      spans.push_back(span_of[size_t(idx)]);
      any_ac = any_ac || from_ac[size_t(idx)];
      any_rules = any_rules || from_rules[size_t(idx)];
    }
    out.clusters.push_back(std::move(spans));
    out.provenance.push_back(any_ac && any_rules ? Provenance::Reunion
                             : any_rules         ? Provenance::Rules
                                                 : Provenance::ActorCritic);
  }
  out.normalize();
  return out;
}

}  // namespace hrnacc
