#ifndef HRNACC_ENV_HPP
#define HRNACC_ENV_HPP

#include <Eigen/Core>
#include <array>
#include <utility>
#include <vector>

#include "hrnacc/corpus.hpp"
#include "hrnacc/model.hpp"
#include "hrnacc/spans.hpp"

namespace hrnacc {

// Clustering environment over a fixed, document-ordered mention list.
// The state pairs the current mention i with a candidate antecedent j < i.
struct EnvState {
  int i = 1;
  int j = 0;
  std::vector<std::pair<int, int>> stored_links;
};

enum class ActionKind {
  LinkAndAdvance = 0,       // a1: store [m_i, m_j], move to (i+1, 0)
  AdvanceAntecedent = 1,    // a2: move to (i, j+1)
  NoAntecedentAdvance = 2,  // a3: move to (i+1, 0) without storing
};

const char* action_name(ActionKind a);

EnvState initial_state();
bool is_terminal(const EnvState& s, int mention_count);
// a1 always; a2 iff j+1 < i; a3 iff i == j+1.
std::array<bool, 3> legal_actions(const EnvState& s, int mention_count);
EnvState step(const EnvState& s, ActionKind action, int mention_count);

// Reward parameters; the f-nets are borrowed from the model.
struct RewardParams {
  double decay_gamma = 0.5;
  const Eigen::VectorXd* v_m = nullptr;
  const Eigen::VectorXd* v_bi = nullptr;
  const FeedForwardNet* f1 = nullptr;
  const FeedForwardNet* f2 = nullptr;
  const FeedForwardNet* f3 = nullptr;

  static RewardParams from_model(const ModelParams& params, double decay_gamma);
  void validate() const;
};

// v_m.f1(m_i) + v_m.f1(m_j) + f2([m_i; m_j; m_i o m_j]) + v_bi.f3(m_i)
double pair_bracket(const Eigen::VectorXd& m_i, const Eigen::VectorXd& m_j,
                    const RewardParams& params);
// exp(-gamma |i-j|) * bracket, with i, j the document-order mention indices.
double reward(int i, int j, const Eigen::VectorXd& m_i, const Eigen::VectorXd& m_j,
              const RewardParams& params);

// Eq.-style supervision targets derived from gold clusters over the
// candidate mention list.
struct FnnTargets {
  std::vector<int> gold_id;  // gold cluster id per mention, -1 outside gold
  std::vector<int> is_mention;
  std::vector<int> has_antecedent;

  bool is_antecedent_pair(int i, int j) const {
    return gold_id[size_t(i)] >= 0 && gold_id[size_t(i)] == gold_id[size_t(j)] && j < i;
  }
  int size() const { return int(gold_id.size()); }
};

FnnTargets fnn_targets(const std::vector<Span>& mentions,
                       const std::vector<GoldCluster>& gold);

// [m_i ; m_j ; distance-bucket embedding]
Eigen::VectorXd state_features(const EnvState& s, const std::vector<SpanRepresentation>& mentions,
                               const SpanFeatureEmbeddings& feats);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode() {}
  virtual ActionKind choose(const EnvState& s, const std::array<bool, 3>& legal,
                            const Eigen::VectorXd& features) = 0;
};

// Test/inspection policy driven by a callback on (state, legal).
class CallbackPolicy : public Policy {
 public:
  using Fn = std::function<ActionKind(const EnvState&, const std::array<bool, 3>&)>;
  explicit CallbackPolicy(Fn fn) : fn_(std::move(fn)) {}
  ActionKind choose(const EnvState& s, const std::array<bool, 3>& legal,
                    const Eigen::VectorXd&) override {
    return fn_(s, legal);
  }

 private:
  Fn fn_;
};

// Uniform over legal actions; deterministic given the seed.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  ActionKind choose(const EnvState&, const std::array<bool, 3>& legal,
                    const Eigen::VectorXd&) override;

 private:
  Rng rng_;
};

// Links every mention to its earliest same-gold-cluster antecedent; together
// with links_to_clusters this reproduces gold clusters exactly.
class GoldOraclePolicy : public Policy {
 public:
  explicit GoldOraclePolicy(const FnnTargets& targets) : targets_(&targets) {}
  ActionKind choose(const EnvState& s, const std::array<bool, 3>& legal,
                    const Eigen::VectorXd&) override;

 private:
  const FnnTargets* targets_;
};

struct EpisodeStep {
  EnvState state;  // before the action
  ActionKind action = ActionKind::LinkAndAdvance;
  double reward = 0.0;
  Eigen::VectorXd features;
};

struct Episode {
  std::vector<EpisodeStep> steps;
  std::vector<std::pair<int, int>> stored_links;
};

// Complete episode; a1 steps carry reward(m_i, m_j), a2/a3 steps carry 0.
Episode rollout(const std::vector<SpanRepresentation>& mentions, Policy& policy,
                const RewardParams& reward_params, const SpanFeatureEmbeddings& feats);

}  // namespace hrnacc

#endif  // HRNACC_ENV_HPP
