#include "hrnacc/train.hpp"

#include <algorithm>
#include <cmath>

#include "hrnacc/parallel.hpp"

namespace hrnacc {

namespace {

constexpr double kProbClamp = 1e-7;

double clamp_prob(double p) { return std::min(1.0 - kProbClamp, std::max(kProbClamp, p)); }

std::uint64_t doc_stream(std::uint64_t seed, int epoch, int doc_id, int phase) {
  return hash_mix(hash_mix(seed, std::uint64_t(epoch) << 20 | std::uint64_t(doc_id)),
                  std::uint64_t(phase));
}

Eigen::VectorXd scalar_vec(double v) {
  Eigen::VectorXd out(1);
  out[0] = v;
  return out;
}

}  // namespace

TrainingConfig TrainingConfig::from_pipeline(const PipelineConfig& cfg) {
  TrainingConfig t;
  t.discount_gamma = cfg.discount_gamma;
  t.lr = cfg.lr;
  t.epochs = cfg.epochs;
  t.batch_size = cfg.batch_size;
  t.seed = cfg.seed;
  t.detect_weight_actor = cfg.use_detect_loss ? cfg.detect_weight_actor : 0.0;
  t.detect_weight_critic = cfg.use_detect_loss ? cfg.detect_weight_critic : 0.0;
  return t;
}

double detection_loss(const std::vector<double>& probs, const std::vector<int>& labels) {
  if (probs.size() != labels.size())
    throw ContractViolation("detection_loss: probs/labels size mismatch");
  double loss = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    double p = clamp_prob(probs[i]);
    loss -= labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return loss;
}

AcLosses actor_critic_losses(const TrajectoryEval& traj, double discount_gamma,
                             std::vector<double>* advantages) {
  size_t steps = traj.rewards.size();
  if (traj.log_probs.size() != steps || traj.values.size() != steps)
    throw ContractViolation("actor_critic_losses: trajectory arrays must align");
  AcLosses losses;
  if (advantages) advantages->assign(steps, 0.0);
  for (size_t t = 0; t < steps; ++t) {
    double v_next = t + 1 < steps ? traj.values[t + 1] : 0.0;
    double advantage = traj.rewards[t] + discount_gamma * v_next - traj.values[t];
    losses.l_actor += -traj.log_probs[t] * advantage;
    losses.l_critic += advantage * advantage;
    if (advantages) (*advantages)[t] = advantage;
  }
  return losses;
}

std::pair<double, double> augmented_losses(double l_actor, double l_critic, double l_detect,
                                           double w_actor, double w_critic) {
  return {l_actor + w_actor * l_detect, l_critic + w_critic * l_detect};
}

std::vector<Span> CandidateSet::candidate_spans() const {
  std::vector<Span> spans;
  spans.reserve(candidates.size());
  for (const auto& rep : candidates) spans.push_back(rep.span);
  return spans;
}

CandidateSet build_candidates(const Document& doc, const EmbeddingTable& emb,
                              const ModelParams& params, const PipelineConfig& cfg,
                              bool with_targets) {
  if (emb.tokens() != int(doc.tokens.size()))
    throw DataError(doc.doc_id + ": embeddings do not align with tokens");

  CandidateSet out;
  std::vector<Span> spans = enumerate_spans(doc, cfg.max_span_width);
  out.all_reps.reserve(spans.size());
  for (Span s : spans) {
    SpanRepresentation rep = span_representation(s, emb, params.attention, params.features);
    rep.mention_prob = mention_score(rep, params.f1);
    out.all_reps.push_back(std::move(rep));
  }

  if (!out.all_reps.empty()) {
    int k = cfg.top_k(int(doc.tokens.size()));
    out.candidates = top_k_mentions(out.all_reps, k);
  }

  if (with_targets) {
    out.all_labels.reserve(out.all_reps.size());
    FnnTargets all = fnn_targets(spans, doc.gold_clusters);
    out.all_labels = all.is_mention;
    out.targets = fnn_targets(out.candidate_spans(), doc.gold_clusters);
  }
  return out;
}

void ActorPolicy::begin_episode() {
  h_ = actor_->initial_hidden();
  caches.clear();
  probs.clear();
  actions.clear();
}

ActionKind ActorPolicy::choose(const EnvState&, const std::array<bool, 3>& legal,
                               const Eigen::VectorXd& features) {
  GruStepCache cache;
  Eigen::VectorXd logits = rnn_step(*actor_, features, h_, &cache);
  h_ = cache.h;
  std::array<double, 3> pi = masked_softmax3(logits, legal);

  int choice;
  if (sample_) {
    double u = rng_.uniform();
    double acc = 0.0;
    choice = -1;
    for (int a = 0; a < 3; ++a) {
      acc += pi[size_t(a)];
      if (u < acc) {
        choice = a;
        break;
      }
    }
    if (choice < 0) {  // numeric tail
      for (int a = 2; a >= 0; --a)
        if (legal[size_t(a)]) {
          choice = a;
          break;
        }
    }
  } else {
    choice = 0;
    double best = -1.0;
    for (int a = 0; a < 3; ++a) {
      if (pi[size_t(a)] > best) {
        best = pi[size_t(a)];
        choice = a;
      }
    }
  }

  caches.push_back(std::move(cache));
  probs.push_back(pi);
  actions.push_back(choice);
  return ActionKind(choice);
}

Trainer::Trainer(std::vector<const Document*> docs,
                 std::vector<const EmbeddingTable*> embeddings, const PipelineConfig& cfg,
                 ModelParams params)
    : docs_(std::move(docs)),
      embeddings_(std::move(embeddings)),
      cfg_(cfg),
      params_(std::move(params)),
      opt_(cfg.lr, cfg.adam_beta1, cfg.adam_beta2) {
  cfg_.validate();
  if (docs_.size() != embeddings_.size())
    throw ContractViolation("document and embedding lists must align");
  if (docs_.empty()) throw DataError("training corpus is empty");
  for (const Document* d : docs_)
    if (!d->has_gold)
      throw DataError("training needs gold clusters, but document '" + d->doc_id +
                      "' has none");
}

Trainer::DocGrads Trainer::phase1_supervised(int doc_id, const CandidateSet& cand, int epoch) {
  DocGrads out;
  Rng rng(doc_stream(cfg_.seed, epoch, doc_id, 1));
  const auto& reps = cand.candidates;
  const FnnTargets& targets = cand.targets;

  for (size_t i = 0; i < reps.size(); ++i) {
    const Eigen::VectorXd& m = reps[i].vector;
    FfnCache c1;
    double z1 = ffn_forward(params_.f1, m, true, &rng, &c1)[0];
    double g1 = sigmoid(z1) - double(targets.is_mention[i]);
    out.grads.add(ffn_backward(params_.f1, c1, scalar_vec(g1)), "f1");

    FfnCache c3;
    Eigen::VectorXd z3v = ffn_forward(params_.f3, m, true, &rng, &c3);
    double g3 = sigmoid(params_.v_bi.dot(z3v)) - double(targets.has_antecedent[i]);
    out.grads.add("v_bi", Eigen::VectorXd(g3 * z3v));
    out.grads.add(ffn_backward(params_.f3, c3, Eigen::VectorXd(g3 * params_.v_bi)), "f3");
  }

  for (size_t i = 1; i < reps.size(); ++i) {
    size_t j_lo = i > size_t(cfg_.max_antecedents) ? i - size_t(cfg_.max_antecedents) : 0;
    for (size_t j = j_lo; j < i; ++j) {
      const Eigen::VectorXd& mi = reps[i].vector;
      const Eigen::VectorXd& mj = reps[j].vector;
      Eigen::VectorXd pair(mi.size() * 3);
      pair << mi, mj, mi.cwiseProduct(mj);
      FfnCache c2;
      double z2 = ffn_forward(params_.f2, pair, true, &rng, &c2)[0];
      double g2 = sigmoid(z2) - double(targets.is_antecedent_pair(int(i), int(j)));
      out.grads.add(ffn_backward(params_.f2, c2, scalar_vec(g2)), "f2");
    }
  }
  return out;
}

void Trainer::add_detection_grads(int doc_id, const CandidateSet& cand, int epoch,
                                  DocGrads& out) {
  Rng rng(doc_stream(cfg_.seed, epoch, doc_id, 3));
  const EmbeddingTable& emb = *embeddings_[size_t(doc_id)];
  double grad_scale =
      cfg_.use_detect_loss ? 0.5 * (cfg_.detect_weight_actor + cfg_.detect_weight_critic) : 0.0;

  Eigen::MatrixXd width_grad = Eigen::MatrixXd::Zero(params_.features.width_embeddings.rows(),
                                                     params_.features.width_embeddings.cols());
  Eigen::VectorXd vo_grad = Eigen::VectorXd::Zero(params_.attention.v_o.size());

  std::vector<double> probs;
  probs.reserve(cand.all_reps.size());
  for (size_t s = 0; s < cand.all_reps.size(); ++s) {
    const SpanRepresentation& rep = cand.all_reps[s];
    FfnCache c;
    double z = ffn_forward(params_.f1, rep.vector, true, &rng, &c)[0];
    double p = sigmoid(z);
    probs.push_back(p);
    if (grad_scale > 0.0) {
      double g = grad_scale * (p - double(cand.all_labels[s]));
      FfnGrads fg = ffn_backward(params_.f1, c, scalar_vec(g));
      out.grads.add(fg, "f1");
      SpanRepGrads sg = span_representation_backward(rep.span, emb, params_.attention,
                                                     params_.features, fg.input);
      vo_grad += sg.v_o;
      width_grad.row(sg.width_bucket) += sg.width_row;
    }
  }
  out.l_detect = detection_loss(probs, cand.all_labels);
  if (grad_scale > 0.0) {
    out.grads.add("attention.v_o", vo_grad);
    out.grads.add("features.width", width_grad);
  }
}

Trainer::DocGrads Trainer::phase2_actor_critic(int doc_id, const CandidateSet& cand, int epoch) {
  DocGrads out;
  add_detection_grads(doc_id, cand, epoch, out);

  const auto& reps = cand.candidates;
  if (reps.size() < 2) return out;

  Rng rng(doc_stream(cfg_.seed, epoch, doc_id, 2));
  ActorPolicy policy(params_.actor, /*sample=*/true, rng);
  RewardParams rp = RewardParams::from_model(params_, cfg_.decay_gamma);
  Episode episode = rollout(reps, policy, rp, params_.features);
  size_t steps = episode.steps.size();
  if (steps == 0) return out;

  // Critic value chain over the same feature sequence.
  std::vector<GruStepCache> critic_caches(steps);
  TrajectoryEval traj;
  traj.rewards.resize(steps);
  traj.log_probs.resize(steps);
  traj.values.resize(steps);
  Eigen::VectorXd h = params_.critic.initial_hidden();
  for (size_t t = 0; t < steps; ++t) {
    traj.rewards[t] = episode.steps[t].reward;
    traj.log_probs[t] =
        std::log(std::max(kProbClamp, policy.probs[t][size_t(policy.actions[t])]));
    traj.values[t] = rnn_step(params_.critic, episode.steps[t].features, h, &critic_caches[t])[0];
    h = critic_caches[t].h;
  }

  std::vector<double> advantages;
  AcLosses losses = actor_critic_losses(traj, cfg_.discount_gamma, &advantages);
  out.l_actor = losses.l_actor;
  out.l_critic = losses.l_critic;

  std::vector<double> actor_adv = advantages;
  if (cfg_.advantage_norm && steps > 1) {
    double mean = 0.0, var = 0.0;
    for (double a : actor_adv) mean += a;
    mean /= double(steps);
    for (double a : actor_adv) var += (a - mean) * (a - mean);
    double sd = std::sqrt(var / double(steps));
    if (sd > 1e-8)
      for (double& a : actor_adv) a = (a - mean) / sd;
  }

  // Actor: d(-log pi(a) * A)/dlogits = A * (pi - onehot(a)); illegal actions
  // hold probability 0 and receive no gradient.
  std::vector<Eigen::VectorXd> actor_out(steps);
  for (size_t t = 0; t < steps; ++t) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(3);
    const auto& pi = policy.probs[t];
    for (int a = 0; a < 3; ++a) {
      double onehot = a == policy.actions[t] ? 1.0 : 0.0;
      g[a] = actor_adv[t] * (pi[size_t(a)] - onehot);
    }
    if (cfg_.entropy_coef > 0.0) {
      double entropy = 0.0;
      for (double p : pi)
        if (p > 0.0) entropy -= p * std::log(p);
      for (int a = 0; a < 3; ++a) {
        double p = pi[size_t(a)];
        if (p > 0.0) g[a] += cfg_.entropy_coef * p * (std::log(p) + entropy);
      }
    }
    actor_out[t] = std::move(g);
  }
  RnnGrads actor_grads = rnn_backward(params_.actor, policy.caches, actor_out);
  out.grads.add(actor_grads, "actor");

  // Critic: semi-gradient of (target - V)^2 with the bootstrapped target
  // frozen, so dL/dV_t = -2 A_t.
  std::vector<Eigen::VectorXd> critic_out(steps);
  for (size_t t = 0; t < steps; ++t) critic_out[t] = scalar_vec(-2.0 * advantages[t]);
  RnnGrads critic_grads = rnn_backward(params_.critic, critic_caches, critic_out);
  out.grads.add(critic_grads, "critic");

  // Distance-feature rows receive the tail of both nets' input gradients.
  int fd = params_.features.feature_dim();
  Eigen::MatrixXd dist_grad = Eigen::MatrixXd::Zero(params_.features.distance_embeddings.rows(),
                                                    params_.features.distance_embeddings.cols());
  for (size_t t = 0; t < steps; ++t) {
    const EnvState& s = episode.steps[t].state;
    int bucket = distance_bucket(s.i - s.j);
    dist_grad.row(bucket) += actor_grads.inputs[t].tail(fd);
    dist_grad.row(bucket) += critic_grads.inputs[t].tail(fd);
  }
  out.grads.add("features.distance", dist_grad);
  return out;
}

Trainer::DocGrads Trainer::phase2_baseline(int doc_id, const CandidateSet& cand, int epoch) {
  DocGrads out;
  add_detection_grads(doc_id, cand, epoch, out);

  const auto& reps = cand.candidates;
  int count = int(reps.size());
  if (count < 2) return out;

  RewardParams rp = RewardParams::from_model(params_, cfg_.decay_gamma);

  // Deterministic pair sweep in environment order; the scorer regresses the
  // reward as its coreference score.
  std::vector<GruStepCache> caches;
  std::vector<Eigen::VectorXd> out_grads;
  std::vector<std::pair<int, int>> buckets;
  Eigen::VectorXd h = params_.critic.initial_hidden();
  for (int i = 1; i < count; ++i) {
    int j_lo = std::max(0, i - cfg_.max_antecedents);
    for (int j = j_lo; j < i; ++j) {
      EnvState s;
      s.i = i;
      s.j = j;
      Eigen::VectorXd x = state_features(s, reps, params_.features);
      GruStepCache cache;
      double score = rnn_step(params_.critic, x, h, &cache)[0];
      h = cache.h;
      double target = reward(i, j, reps[size_t(i)].vector, reps[size_t(j)].vector, rp);
      double diff = score - target;
      out.l_actor += diff * diff;  // pair-scorer loss reported in the actor slot
      caches.push_back(std::move(cache));
      out_grads.push_back(scalar_vec(2.0 * diff));
      buckets.push_back({distance_bucket(i - j), 0});
    }
  }
  RnnGrads grads = rnn_backward(params_.critic, caches, out_grads);
  out.grads.add(grads, "critic");

  int fd = params_.features.feature_dim();
  Eigen::MatrixXd dist_grad = Eigen::MatrixXd::Zero(params_.features.distance_embeddings.rows(),
                                                    params_.features.distance_embeddings.cols());
  for (size_t t = 0; t < caches.size(); ++t)
    dist_grad.row(buckets[t].first) += grads.inputs[t].tail(fd);
  out.grads.add("features.distance", dist_grad);
  return out;
}

LossReport Trainer::train_batch(const std::vector<int>& doc_ids, int epoch) {
  int n = int(doc_ids.size());

  std::vector<CandidateSet> cands;
  cands.resize(size_t(n));
  parallel_for(n, cfg_.jobs, [&](int b) {
    int d = doc_ids[size_t(b)];
    cands[size_t(b)] =
        build_candidates(*docs_[size_t(d)], *embeddings_[size_t(d)], params_, cfg_, true);
  });

  // Train the reward networks on the batch first, then the actor-critic.
  {
    std::vector<DocGrads> results;
    results.resize(size_t(n));
    parallel_for(n, cfg_.jobs, [&](int b) {
      results[size_t(b)] = phase1_supervised(doc_ids[size_t(b)], cands[size_t(b)], epoch);
    });
    GradientBuffer merged;
    for (const auto& r : results) merged.merge(r.grads);
    opt_.apply(params_.fnn_refs(), merged);
  }

  LossReport row;
  row.step = ++step_;
  row.epoch = epoch;
  {
    bool baseline = cfg_.mode == "baseline";
    std::vector<DocGrads> results;
    results.resize(size_t(n));
    parallel_for(n, cfg_.jobs, [&](int b) {
      results[size_t(b)] = baseline
                               ? phase2_baseline(doc_ids[size_t(b)], cands[size_t(b)], epoch)
                               : phase2_actor_critic(doc_ids[size_t(b)], cands[size_t(b)], epoch);
    });
    GradientBuffer merged;
    for (const auto& r : results) {
      merged.merge(r.grads);
      row.l_actor += r.l_actor;
      row.l_critic += r.l_critic;
      row.l_detect += r.l_detect;
    }
    TrainingConfig tc = TrainingConfig::from_pipeline(cfg_);
    std::tie(row.l_actor_aug, row.l_critic_aug) = augmented_losses(
        row.l_actor, row.l_critic, row.l_detect, tc.detect_weight_actor, tc.detect_weight_critic);

    std::vector<TensorRef> refs = params_.ac_refs();
    if (cfg_.use_detect_loss)
      for (auto& r : params_.detection_refs()) refs.push_back(r);
    opt_.apply(refs, merged);
  }
  return row;
}

void Trainer::train_epoch(int epoch) {
  std::vector<int> order(docs_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  Rng shuffle_rng(hash_mix(cfg_.seed, 0x65706f6368ULL + std::uint64_t(epoch)));
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[size_t(shuffle_rng.uniform_int(int(i)))]);

  for (size_t begin = 0; begin < order.size(); begin += size_t(cfg_.batch_size)) {
    size_t end = std::min(order.size(), begin + size_t(cfg_.batch_size));
    std::vector<int> batch(order.begin() + long(begin), order.begin() + long(end));
    LossReport row = train_batch(batch, epoch);
    reports_.push_back(row);
    if (on_report) on_report(row);
  }
}

void Trainer::train() {
  for (int e = 0; e < cfg_.epochs; ++e) train_epoch(e);
}

ModelParams train_corpus(const std::vector<const Document*>& docs,
                         const std::vector<const EmbeddingTable*>& embeddings,
                         const PipelineConfig& cfg, std::vector<LossReport>* reports,
                         const std::function<void(const LossReport&)>& on_report) {
  PipelineConfig effective = cfg;
  if (effective.emb_dim == 0 && !embeddings.empty()) effective.emb_dim = embeddings[0]->dim;
  for (const EmbeddingTable* e : embeddings)
    if (e->dim != effective.emb_dim)
      throw DataError("embedding dim varies across the corpus (" + std::to_string(e->dim) +
                      " vs " + std::to_string(effective.emb_dim) + ")");

  ModelParams params =
      ModelParams::init(effective.model_dims(), effective.seed, effective.v_m_init);
  Trainer trainer(docs, embeddings, effective, std::move(params));
  trainer.on_report = on_report;
  trainer.train();
  if (reports) *reports = trainer.reports();
  return std::move(trainer.params());
}

}  // namespace hrnacc
