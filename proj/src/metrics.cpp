#include "hrnacc/metrics.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace hrnacc {

namespace {

// mention -> cluster index; the clustering must be a partition.
std::unordered_map<Span, int, SpanHash> cluster_index(const Clustering& clusters) {
  std::unordered_map<Span, int, SpanHash> index;
  for (size_t c = 0; c < clusters.size(); ++c) {
    for (const Span& m : clusters[c]) {
      auto [it, inserted] = index.emplace(m, int(c));
      if (!inserted) throw DataError("clustering is not a partition: duplicate mention");
    }
  }
  return index;
}

// MUC partition count: system clusters intersecting C plus one singleton
// partition per mention of C absent from the system.
double muc_partitions(const std::vector<Span>& cluster,
                      const std::unordered_map<Span, int, SpanHash>& other) {
  std::unordered_set<int> touched;
  int missing = 0;
  for (const Span& m : cluster) {
    auto it = other.find(m);
    if (it == other.end())
      ++missing;
    else
      touched.insert(it->second);
  }
  return double(touched.size() + missing);
}

MetricCounts muc_side(const Clustering& key, const Clustering& response) {
  auto response_index = cluster_index(response);
  MetricCounts c;
  for (const auto& cluster : key) {
    c.r_num += double(cluster.size()) - muc_partitions(cluster, response_index);
    c.r_den += double(cluster.size()) - 1.0;
  }
  return c;
}

}  // namespace

ScoreTriple make_triple(double precision, double recall) {
  ScoreTriple t;
  t.precision = precision;
  t.recall = recall;
  t.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return t;
}

ScoreTriple triple_from_counts(const MetricCounts& c) {
  if (c.r_den == 0.0 && c.p_den == 0.0) return {1.0, 1.0, 1.0};  // both sides empty
  double recall = c.r_den > 0.0 ? c.r_num / c.r_den : 0.0;
  double precision = c.p_den > 0.0 ? c.p_num / c.p_den : 0.0;
  return make_triple(precision, recall);
}

MetricCounts muc_counts(const Clustering& system, const Clustering& gold) {
  MetricCounts recall_side = muc_side(gold, system);
  MetricCounts precision_side = muc_side(system, gold);
  MetricCounts c;
  c.r_num = recall_side.r_num;
  c.r_den = recall_side.r_den;
  c.p_num = precision_side.r_num;
  c.p_den = precision_side.r_den;
  return c;
}

MetricCounts b_cubed_counts(const Clustering& system, const Clustering& gold) {
  auto sys_index = cluster_index(system);
  auto gold_index = cluster_index(gold);

  auto side = [](const Clustering& key, const std::unordered_map<Span, int, SpanHash>& key_index,
                 const Clustering& response,
                 const std::unordered_map<Span, int, SpanHash>& response_index, double& num,
                 double& den) {
    for (const auto& cluster : key) {
      for (const Span& m : cluster) {
        den += 1.0;
        auto it = response_index.find(m);
        if (it == response_index.end()) continue;
        const auto& resp_cluster = response[size_t(it->second)];
        int overlap = 0;
        for (const Span& r : resp_cluster)
          if (key_index.count(r) && key_index.at(r) == key_index.at(m)) ++overlap;
        num += double(overlap) / double(cluster.size());
      }
    }
  };

  MetricCounts c;
  side(gold, gold_index, system, sys_index, c.r_num, c.r_den);
  side(system, sys_index, gold, gold_index, c.p_num, c.p_den);
  return c;
}

MetricCounts ceaf_phi4_counts(const Clustering& system, const Clustering& gold) {
  MetricCounts c;
  c.r_den = double(gold.size());
  c.p_den = double(system.size());
  if (gold.empty() || system.empty()) return c;

  auto sys_sets = std::vector<std::unordered_set<Span, SpanHash>>();
  for (const auto& s : system) sys_sets.emplace_back(s.begin(), s.end());

  Eigen::MatrixXd phi(long(gold.size()), long(system.size()));
  for (size_t g = 0; g < gold.size(); ++g) {
    for (size_t s = 0; s < system.size(); ++s) {
      int overlap = 0;
      for (const Span& m : gold[g])
        if (sys_sets[s].count(m)) ++overlap;
      phi(long(g), long(s)) = 2.0 * double(overlap) / double(gold[g].size() + system[s].size());
    }
  }
  std::vector<int> match = max_assignment(phi);
  double total = 0.0;
  for (size_t g = 0; g < gold.size(); ++g)
    if (match[g] >= 0) total += phi(long(g), match[g]);
  c.r_num = total;
  c.p_num = total;
  return c;
}

ScoreTriple muc(const Clustering& system, const Clustering& gold) {
  return triple_from_counts(muc_counts(system, gold));
}

ScoreTriple b_cubed(const Clustering& system, const Clustering& gold) {
  return triple_from_counts(b_cubed_counts(system, gold));
}

ScoreTriple ceaf_phi4(const Clustering& system, const Clustering& gold) {
  return triple_from_counts(ceaf_phi4_counts(system, gold));
}

double average_f1(const std::vector<ScoreTriple>& triples) {
  if (triples.empty()) throw ContractViolation("average_f1 over no metrics");
  double sum = 0.0;
  for (const auto& t : triples) sum += t.f1;
  return sum / double(triples.size());
}

// Potential-based augmenting-path assignment (O(n^3)), minimizing cost;
// similarity is negated to maximize.
std::vector<int> max_assignment(const Eigen::MatrixXd& similarity) {
  long rows = similarity.rows(), cols = similarity.cols();
  if (rows == 0 || cols == 0) return std::vector<int>(size_t(rows), -1);

  bool transposed = rows > cols;
  Eigen::MatrixXd cost = transposed ? Eigen::MatrixXd(-similarity.transpose())
                                    : Eigen::MatrixXd(-similarity);
  long n = cost.rows(), m = cost.cols();

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(size_t(n) + 1, 0.0), v(size_t(m) + 1, 0.0);
  std::vector<long> p(size_t(m) + 1, 0), way(size_t(m) + 1, 0);
  for (long i = 1; i <= n; ++i) {
    p[0] = i;
    long j0 = 0;
    std::vector<double> minv(size_t(m) + 1, inf);
    std::vector<bool> used(size_t(m) + 1, false);
    do {
      used[size_t(j0)] = true;
      long i0 = p[size_t(j0)], j1 = 0;
      double delta = inf;
      for (long j = 1; j <= m; ++j) {
        if (used[size_t(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - u[size_t(i0)] - v[size_t(j)];
        if (cur < minv[size_t(j)]) {
          minv[size_t(j)] = cur;
          way[size_t(j)] = j0;
        }
        if (minv[size_t(j)] < delta) {
          delta = minv[size_t(j)];
          j1 = j;
        }
      }
      for (long j = 0; j <= m; ++j) {
        if (used[size_t(j)]) {
          u[size_t(p[size_t(j)])] += delta;
          v[size_t(j)] -= delta;
        } else {
          minv[size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[size_t(j0)] != 0);
    do {
      long j1 = way[size_t(j0)];
      p[size_t(j0)] = p[size_t(j1)];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(size_t(n), -1);
  for (long j = 1; j <= m; ++j)
    if (p[size_t(j)] > 0) row_to_col[size_t(p[size_t(j)] - 1)] = int(j - 1);

  if (!transposed) return row_to_col;
  std::vector<int> out(size_t(rows), -1);
  for (long i = 0; i < n; ++i)
    if (row_to_col[size_t(i)] >= 0) out[size_t(row_to_col[size_t(i)])] = int(i);
  return out;
}

}  // namespace hrnacc
