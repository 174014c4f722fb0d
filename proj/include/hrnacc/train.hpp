#ifndef HRNACC_TRAIN_HPP
#define HRNACC_TRAIN_HPP

#include <functional>
#include <utility>
#include <vector>

#include "hrnacc/config.hpp"
#include "hrnacc/env.hpp"
#include "hrnacc/model.hpp"

namespace hrnacc {

struct TrainingConfig {
  double discount_gamma = 0.9;
  double lr = 1e-3;
  int epochs = 10;
  int batch_size = 8;
  std::uint64_t seed = 42;
  double detect_weight_actor = 1.0;
  double detect_weight_critic = 1.0;

  static TrainingConfig from_pipeline(const PipelineConfig& cfg);
};

struct LossReport {
  long step = 0;
  int epoch = 0;
  double l_actor = 0.0;
  double l_critic = 0.0;
  double l_detect = 0.0;
  double l_actor_aug = 0.0;
  double l_critic_aug = 0.0;
};

// Negated log-likelihood of Bernoulli mention labels; probabilities are
// clamped to [1e-7, 1-1e-7] before the log.
double detection_loss(const std::vector<double>& probs, const std::vector<int>& labels);

struct TrajectoryEval {
  std::vector<double> rewards;
  std::vector<double> log_probs;  // log pi(a_t | s_t)
  std::vector<double> values;     // V(s_t); V after the last step is 0
};

struct AcLosses {
  double l_actor = 0.0;
  double l_critic = 0.0;
};

// Advantage A_t = r_t + gamma V(s_{t+1}) - V(s_t), treated as a constant in
// the actor term.
AcLosses actor_critic_losses(const TrajectoryEval& traj, double discount_gamma,
                             std::vector<double>* advantages = nullptr);

std::pair<double, double> augmented_losses(double l_actor, double l_critic, double l_detect,
                                           double w_actor = 1.0, double w_critic = 1.0);

// Per-document working set: enumerated spans, their representations and
// detection labels, plus the ranked candidate list the rules and the
// environment operate on.
struct CandidateSet {
  std::vector<SpanRepresentation> all_reps;  // every enumerated span, scored
  std::vector<int> all_labels;               // is-gold-mention per enumerated span
  std::vector<SpanRepresentation> candidates;  // top-K, document order
  FnnTargets targets;                          // over the candidate list

  std::vector<Span> candidate_spans() const;
};

CandidateSet build_candidates(const Document& doc, const EmbeddingTable& emb,
                              const ModelParams& params, const PipelineConfig& cfg,
                              bool with_targets);

// Recurrent policy over episode state features; records step caches and
// probabilities for backprop.
class ActorPolicy : public Policy {
 public:
  ActorPolicy(const RecurrentNet& actor, bool sample, Rng rng)
      : actor_(&actor), sample_(sample), rng_(rng) {}

  void begin_episode() override;
  ActionKind choose(const EnvState& s, const std::array<bool, 3>& legal,
                    const Eigen::VectorXd& features) override;

  std::vector<GruStepCache> caches;
  std::vector<std::array<double, 3>> probs;
  std::vector<int> actions;

 private:
  const RecurrentNet* actor_;
  Eigen::VectorXd h_;
  bool sample_;
  Rng rng_;
};

class Trainer {
 public:
  Trainer(std::vector<const Document*> docs, std::vector<const EmbeddingTable*> embeddings,
          const PipelineConfig& cfg, ModelParams params);

  void train_epoch(int epoch);
  void train();

  ModelParams& params() { return params_; }
  const std::vector<LossReport>& reports() const { return reports_; }

  // Optional streaming sink, called once per batch.
  std::function<void(const LossReport&)> on_report;

 private:
  struct DocGrads {
    GradientBuffer grads;
    double l_actor = 0.0, l_critic = 0.0, l_detect = 0.0;
  };

  LossReport train_batch(const std::vector<int>& doc_ids, int epoch);
  DocGrads phase1_supervised(int doc_id, const CandidateSet& cand, int epoch);
  DocGrads phase2_actor_critic(int doc_id, const CandidateSet& cand, int epoch);
  DocGrads phase2_baseline(int doc_id, const CandidateSet& cand, int epoch);
  void add_detection_grads(int doc_id, const CandidateSet& cand, int epoch, DocGrads& out);

  std::vector<const Document*> docs_;
  std::vector<const EmbeddingTable*> embeddings_;
  PipelineConfig cfg_;
  ModelParams params_;
  AdamOptimizer opt_;
  std::vector<LossReport> reports_;
  long step_ = 0;
};

// Full training entry point; dispatches on cfg.mode ("hrnacc" runs the
// joint actor-critic loop, "baseline" the supervised pair scorer).
ModelParams train_corpus(const std::vector<const Document*>& docs,
                         const std::vector<const EmbeddingTable*>& embeddings,
                         const PipelineConfig& cfg, std::vector<LossReport>* reports = nullptr,
                         const std::function<void(const LossReport&)>& on_report = nullptr);

}  // namespace hrnacc

#endif  // HRNACC_TRAIN_HPP
