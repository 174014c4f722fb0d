#ifndef HRNACC_METRICS_HPP
#define HRNACC_METRICS_HPP

#include <Eigen/Core>
#include <vector>

#include "hrnacc/types.hpp"

namespace hrnacc {

struct ScoreTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ScoreTriple make_triple(double precision, double recall);

using Clustering = std::vector<std::vector<Span>>;

// Per-document numerators and denominators; corpus scores aggregate these,
// never per-document F1s.
struct MetricCounts {
  double r_num = 0.0, r_den = 0.0;
  double p_num = 0.0, p_den = 0.0;

  MetricCounts& operator+=(const MetricCounts& o) {
    r_num += o.r_num;
    r_den += o.r_den;
    p_num += o.p_num;
    p_den += o.p_den;
    return *this;
  }
};

ScoreTriple triple_from_counts(const MetricCounts& c);

MetricCounts muc_counts(const Clustering& system, const Clustering& gold);
MetricCounts b_cubed_counts(const Clustering& system, const Clustering& gold);
MetricCounts ceaf_phi4_counts(const Clustering& system, const Clustering& gold);

ScoreTriple muc(const Clustering& system, const Clustering& gold);
ScoreTriple b_cubed(const Clustering& system, const Clustering& gold);
ScoreTriple ceaf_phi4(const Clustering& system, const Clustering& gold);

// Unweighted mean of the triples' F1 values.
double average_f1(const std::vector<ScoreTriple>& triples);

// Max-sum one-to-one assignment over a similarity matrix (rows to columns);
// returns per-row column index or -1. Exact, not greedy.
std::vector<int> max_assignment(const Eigen::MatrixXd& similarity);

}  // namespace hrnacc

#endif  // HRNACC_METRICS_HPP
