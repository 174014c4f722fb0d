#include "hrnacc/env.hpp"

#include <cmath>
#include <unordered_map>

namespace hrnacc {

const char* action_name(ActionKind a) {
  switch (a) {
    case ActionKind::LinkAndAdvance: return "a1";
    case ActionKind::AdvanceAntecedent: return "a2";
    case ActionKind::NoAntecedentAdvance: return "a3";
  }
  return "?";
}

EnvState initial_state() { return EnvState{}; }

bool is_terminal(const EnvState& s, int mention_count) { return s.i >= mention_count; }

std::array<bool, 3> legal_actions(const EnvState& s, int mention_count) {
  if (s.i < 1 || s.j < 0 || s.j >= s.i || s.i > mention_count)
    throw ContractViolation("invalid env state (i=" + std::to_string(s.i) +
                            ", j=" + std::to_string(s.j) + ")");
  std::array<bool, 3> legal{true, false, false};
  legal[size_t(ActionKind::AdvanceAntecedent)] = s.j + 1 < s.i;
  legal[size_t(ActionKind::NoAntecedentAdvance)] = s.i == s.j + 1;
  return legal;
}

EnvState step(const EnvState& s, ActionKind action, int mention_count) {
  auto legal = legal_actions(s, mention_count);
  if (!legal[size_t(action)])
    throw ContractViolation(std::string("illegal action ") + action_name(action) + " at (i=" +
                            std::to_string(s.i) + ", j=" + std::to_string(s.j) + ")");
  EnvState next = s;
  switch (action) {
    case ActionKind::LinkAndAdvance:
      next.stored_links.push_back({s.i, s.j});
      next.i = s.i + 1;
      next.j = 0;
      break;
    case ActionKind::AdvanceAntecedent:
      next.j = s.j + 1;
      break;
    case ActionKind::NoAntecedentAdvance:
      next.i = s.i + 1;
      next.j = 0;
      break;
  }
  return next;
}

RewardParams RewardParams::from_model(const ModelParams& params, double decay_gamma) {
  RewardParams r;
  r.decay_gamma = decay_gamma;
  r.v_m = &params.v_m;
  r.v_bi = &params.v_bi;
  r.f1 = &params.f1;
  r.f2 = &params.f2;
  r.f3 = &params.f3;
  r.validate();
  return r;
}

void RewardParams::validate() const {
  if (!(decay_gamma > 0.0 && decay_gamma < 1.0))
    throw ConfigError("decay_gamma must lie in (0,1), got " + std::to_string(decay_gamma));
  if (!v_m || !v_bi || !f1 || !f2 || !f3)
    throw ContractViolation("reward params are incomplete");
  if (v_m->size() != f1->out_dim())
    throw ConfigError("v_m length does not match f1 output dim");
  if (v_bi->size() != f3->out_dim())
    throw ConfigError("v_bi length does not match f3 output dim");
  if (f2->out_dim() != 1) throw ConfigError("f2 must have scalar output");
}

double pair_bracket(const Eigen::VectorXd& m_i, const Eigen::VectorXd& m_j,
                    const RewardParams& params) {
  params.validate();
  if (m_i.size() != params.f1->in_dim() || m_j.size() != params.f1->in_dim())
    throw ConfigError("span vector dim does not match f1 input dim");
  Eigen::VectorXd pair(m_i.size() * 3);
  pair << m_i, m_j, m_i.cwiseProduct(m_j);
  if (pair.size() != params.f2->in_dim())
    throw ConfigError("pair vector dim does not match f2 input dim");

  double mention_i = params.v_m->dot(ffn_forward(*params.f1, m_i, false));
  double mention_j = params.v_m->dot(ffn_forward(*params.f1, m_j, false));
  double compat = ffn_forward(*params.f2, pair, false)[0];
  double has_ant = params.v_bi->dot(ffn_forward(*params.f3, m_i, false));
  return mention_i + mention_j + compat + has_ant;
}

double reward(int i, int j, const Eigen::VectorXd& m_i, const Eigen::VectorXd& m_j,
              const RewardParams& params) {
  double decay = std::exp(-params.decay_gamma * std::abs(double(i - j)));
  return decay * pair_bracket(m_i, m_j, params);
}

FnnTargets fnn_targets(const std::vector<Span>& mentions,
                       const std::vector<GoldCluster>& gold) {
  std::unordered_map<Span, int, SpanHash> gold_of;
  for (const GoldCluster& c : gold)
    for (const Span& s : c.spans) gold_of[s] = c.cluster_id;

  FnnTargets t;
  t.gold_id.resize(mentions.size(), -1);
  t.is_mention.resize(mentions.size(), 0);
  t.has_antecedent.resize(mentions.size(), 0);
  std::unordered_map<int, int> seen_in_cluster;
  for (size_t i = 0; i < mentions.size(); ++i) {
    auto it = gold_of.find(mentions[i]);
    if (it == gold_of.end()) continue;
    t.gold_id[i] = it->second;
    t.is_mention[i] = 1;
    auto seen = seen_in_cluster.find(it->second);
    if (seen != seen_in_cluster.end()) t.has_antecedent[i] = 1;
    seen_in_cluster[it->second] = int(i);
  }
  return t;
}

Eigen::VectorXd state_features(const EnvState& s, const std::vector<SpanRepresentation>& mentions,
                               const SpanFeatureEmbeddings& feats) {
  if (s.i >= int(mentions.size()) || s.j >= s.i)
    throw ContractViolation("state indexes outside the mention list");
  const Eigen::VectorXd& mi = mentions[size_t(s.i)].vector;
  const Eigen::VectorXd& mj = mentions[size_t(s.j)].vector;
  int fd = feats.feature_dim();
  Eigen::VectorXd x(mi.size() + mj.size() + fd);
  x.segment(0, mi.size()) = mi;
  x.segment(mi.size(), mj.size()) = mj;
  x.segment(mi.size() + mj.size(), fd) =
      feats.distance_embeddings.row(distance_bucket(s.i - s.j));
  return x;
}

ActionKind RandomPolicy::choose(const EnvState&, const std::array<bool, 3>& legal,
                                const Eigen::VectorXd&) {
  int n_legal = 0;
  for (bool b : legal) n_legal += b ? 1 : 0;
  int pick = rng_.uniform_int(n_legal);
  for (int a = 0; a < 3; ++a) {
    if (!legal[size_t(a)]) continue;
    if (pick-- == 0) return ActionKind(a);
  }
  throw ContractViolation("no legal action");
}

ActionKind GoldOraclePolicy::choose(const EnvState& s, const std::array<bool, 3>& legal,
                                    const Eigen::VectorXd&) {
  if (targets_->is_antecedent_pair(s.i, s.j)) return ActionKind::LinkAndAdvance;
  if (legal[size_t(ActionKind::AdvanceAntecedent)]) return ActionKind::AdvanceAntecedent;
  return ActionKind::NoAntecedentAdvance;
}

Episode rollout(const std::vector<SpanRepresentation>& mentions, Policy& policy,
                const RewardParams& reward_params, const SpanFeatureEmbeddings& feats) {
  Episode episode;
  int count = int(mentions.size());
  if (count < 2) return episode;

  policy.begin_episode();
  EnvState s = initial_state();
  while (!is_terminal(s, count)) {
    auto legal = legal_actions(s, count);
    Eigen::VectorXd x = state_features(s, mentions, feats);
    ActionKind a = policy.choose(s, legal, x);
    if (!legal[size_t(a)])
      throw ContractViolation(std::string("policy chose illegal action ") + action_name(a));
    EpisodeStep st;
    st.state = s;
    st.action = a;
    st.reward = a == ActionKind::LinkAndAdvance
                    ? reward(s.i, s.j, mentions[size_t(s.i)].vector, mentions[size_t(s.j)].vector,
                             reward_params)
                    : 0.0;
    st.features = std::move(x);
    episode.steps.push_back(std::move(st));
    s = step(s, a, count);
  }
  episode.stored_links = std::move(s.stored_links);
  return episode;
}

}  // namespace hrnacc
