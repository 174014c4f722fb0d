#ifndef HRNACC_CLUSTERS_HPP
#define HRNACC_CLUSTERS_HPP

#include <utility>
#include <vector>

#include "hrnacc/types.hpp"

namespace hrnacc {

enum class Provenance { Rules, ActorCritic, Reunion };

const char* provenance_name(Provenance p);

// Disjoint mention clusters, each of size >= 2: singletons are dropped from
// outputs per the usual evaluation convention. Spans inside a cluster and
// clusters themselves are kept sorted for determinism.
struct ClusterSet {
  std::vector<std::vector<Span>> clusters;
  std::vector<Provenance> provenance;

  size_t size() const { return clusters.size(); }
  void normalize();

  friend bool operator==(const ClusterSet& a, const ClusterSet& b) {
    return a.clusters == b.clusters;
  }
};

// Rule output: clusters over the linked group plus the non-linked remainder.
struct GroupPartition {
  ClusterSet linked;
  std::vector<Span> non_linked;
};

// Transitive closure of stored antecedent links (pairs of mention indices
// with j < i) over the given mention list.
ClusterSet links_to_clusters(const std::vector<std::pair<int, int>>& stored_links,
                             const std::vector<Span>& mentions);

// Merges every actor-critic cluster with any rule cluster sharing a mention,
// iterated to a fixed point so the result is a partition again.
ClusterSet reunion(const ClusterSet& ac_clusters, const GroupPartition& rule_partition);

}  // namespace hrnacc

#endif  // HRNACC_CLUSTERS_HPP
