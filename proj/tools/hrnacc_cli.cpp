#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "hrnacc/corpus.hpp"
#include "hrnacc/pipeline.hpp"

using json = nlohmann::json;
using namespace hrnacc;

namespace {

Lexicons load_lexicons(const std::string& path) {
  if (path.empty()) return Lexicons::defaults();
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file '" + path + "'");
  return Lexicons::from_stream(in);
}

PipelineConfig assemble_config(const std::string& config_path,
                               const std::vector<std::string>& sets) {
  PipelineConfig cfg;
  if (!config_path.empty()) cfg = PipelineConfig::from_file(config_path);
  for (const std::string& kv : sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void write_config_header(std::ostream& out, const PipelineConfig& cfg) {
  std::istringstream lines(cfg.to_string());
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << "\n";
}

json loss_record(const LossReport& r) {
  return json{{"type", "loss"},          {"step", r.step},
              {"epoch", r.epoch},        {"l_actor", r.l_actor},
              {"l_critic", r.l_critic},  {"l_detect", r.l_detect},
              {"l_actor_aug", r.l_actor_aug}, {"l_critic_aug", r.l_critic_aug}};
}

struct AblationFlags {
  bool no_rules = false;
  bool no_ac = false;
  bool no_detect_loss = false;
  bool supervised_baseline = false;
  std::string rules;

  void apply(PipelineConfig& cfg) const {
    if (no_rules) cfg.use_rules = false;
    if (no_ac) cfg.use_ac = false;
    if (no_detect_loss) cfg.use_detect_loss = false;
    if (supervised_baseline) cfg.mode = "baseline";
    if (!rules.empty()) cfg.rules = rules;
  }
};

void add_ablation_flags(CLI::App* cmd, AblationFlags& flags) {
  cmd->add_flag("--no-rules", flags.no_rules, "disable the deterministic rule sieve");
  cmd->add_flag("--no-ac", flags.no_ac, "disable actor-critic clustering");
  cmd->add_flag("--no-detect-loss", flags.no_detect_loss,
                "drop the mention-detection term from the augmented losses");
  cmd->add_flag("--supervised-baseline", flags.supervised_baseline,
                "replace actor-critic training with the supervised pair scorer");
  cmd->add_option("--rules", flags.rules, "rule subset to apply, e.g. 1,2,4");
}

int cmd_ingest(const std::string& corpus_path, const std::string& embeddings_path,
               int synthetic_dim, std::uint64_t seed, const std::string& out_embeddings,
               const std::string& out_corpus, bool binary) {
  auto docs = read_corpus_file(corpus_path);
  size_t tokens = 0, clusters = 0;
  for (const auto& d : docs) {
    tokens += d.tokens.size();
    clusters += d.gold_clusters.size();
  }
  std::cout << "documents: " << docs.size() << "\ntokens: " << tokens
            << "\ngold clusters: " << clusters << "\n";

  if (!embeddings_path.empty()) {
    auto tables = read_embedding_file(embeddings_path);
    auto index = index_embeddings(tables);
    int dim = tables.empty() ? 0 : tables[0].dim;
    for (const auto& d : docs) {
      const EmbeddingTable& t = embeddings_for(d, index);
      if (t.dim != dim)
        throw DataError("embedding dim varies across the corpus ('" + d.doc_id + "')");
    }
    std::cout << "embeddings: aligned, dim " << dim << "\n";
  }

  if (synthetic_dim > 0 || !out_embeddings.empty()) {
    if (out_embeddings.empty())
      throw ConfigError("--synthetic-dim needs --out-embeddings");
    std::ofstream out(out_embeddings, std::ios::binary);
    if (!out) throw DataError("cannot write '" + out_embeddings + "'");
    for (const auto& d : docs) {
      EmbeddingTable t = synthetic_embeddings(d, synthetic_dim, seed);
      save_embeddings(out, t, binary ? EmbeddingFormat::Binary : EmbeddingFormat::Text);
    }
    std::cout << "synthetic embeddings: dim " << synthetic_dim << " -> " << out_embeddings
              << "\n";
  }

  if (!out_corpus.empty()) {
    std::ofstream out(out_corpus);
    if (!out) throw DataError("cannot write '" + out_corpus + "'");
    for (const auto& d : docs) serialize_document(out, d);
  }
  return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& embeddings_path,
              const std::string& config_path, const std::vector<std::string>& sets,
              const AblationFlags& flags, const std::string& out_path,
              const std::string& loss_log) {
  PipelineConfig cfg = assemble_config(config_path, sets);
  flags.apply(cfg);
  cfg.validate();

  auto docs = read_corpus_file(corpus_path);
  auto tables = read_embedding_file(embeddings_path);
  auto index = index_embeddings(tables);
  std::vector<const Document*> doc_ptrs;
  std::vector<const EmbeddingTable*> emb_ptrs;
  for (const auto& d : docs) {
    doc_ptrs.push_back(&d);
    emb_ptrs.push_back(&embeddings_for(d, index));
  }
  cfg.emb_dim = emb_ptrs.empty() ? 0 : emb_ptrs[0]->dim;

  std::ofstream log_file;
  if (!loss_log.empty()) {
    log_file.open(loss_log);
    if (!log_file) throw DataError("cannot write '" + loss_log + "'");
    log_file << json{{"type", "config"}, {"text", cfg.to_string()}}.dump() << "\n";
  }
  auto sink = [&](const LossReport& r) {
    json rec = loss_record(r);
    std::cout << rec.dump() << "\n";
    if (log_file) log_file << rec.dump() << "\n";
  };

  ModelParams params = train_corpus(doc_ptrs, emb_ptrs, cfg, nullptr, sink);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + out_path + "'");
  save_checkpoint(out, params, cfg.to_string());
  std::cout << "checkpoint: " << out_path << "\n";
  return 0;
}

int cmd_resolve(const std::string& corpus_path, const std::string& embeddings_path,
                const std::string& checkpoint_path, const std::string& out_path,
                const AblationFlags& flags, std::optional<std::uint64_t> seed, int jobs,
                const std::string& lexicon_path) {
  std::ifstream ck(checkpoint_path, std::ios::binary);
  if (!ck) throw DataError("cannot open checkpoint '" + checkpoint_path + "'");
  PipelineConfig cfg = PipelineConfig::from_string(read_checkpoint_config(ck));
  flags.apply(cfg);
  if (seed) cfg.seed = *seed;
  if (jobs > 0) cfg.jobs = jobs;
  cfg.validate();

  ModelParams params = ModelParams::init(cfg.model_dims(), cfg.seed, cfg.v_m_init);
  ck.seekg(0);
  load_checkpoint(ck, params);

  auto docs = read_corpus_file(corpus_path);
  auto tables = read_embedding_file(embeddings_path);
  auto index = index_embeddings(tables);
  std::vector<const Document*> doc_ptrs;
  std::vector<const EmbeddingTable*> emb_ptrs;
  for (const auto& d : docs) {
    doc_ptrs.push_back(&d);
    const EmbeddingTable& t = embeddings_for(d, index);
    if (t.dim != cfg.emb_dim)
      throw ConfigError("checkpoint expects embedding dim " + std::to_string(cfg.emb_dim) +
                        ", file has " + std::to_string(t.dim));
    emb_ptrs.push_back(&t);
  }

  PolicyMode mode = cfg.mode == "baseline" ? PolicyMode::Baseline : PolicyMode::Greedy;
  auto results = resolve_corpus(doc_ptrs, emb_ptrs, params, cfg, load_lexicons(lexicon_path),
                                mode);

  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write '" + out_path + "'");
  write_config_header(out, cfg);
  for (size_t i = 0; i < docs.size(); ++i)
    serialize_document(out, docs[i], results[i].final_clusters.clusters);
  std::cout << "resolved " << docs.size() << " documents -> " << out_path << "\n";
  return 0;
}

int cmd_score(const std::string& gold_path, const std::string& system_path,
              const std::string& json_path) {
  auto gold = read_corpus_file(gold_path);
  auto system = read_corpus_file(system_path);
  CorpusScore score = score_corpora(gold, system);

  auto row = [](const char* name, const ScoreTriple& t) {
    std::ostringstream out;
    out << name << "  P=" << t.precision << " R=" << t.recall << " F1=" << t.f1;
    return out.str();
  };
  std::cout << row("MUC      ", score.muc) << "\n"
            << row("B3       ", score.b_cubed) << "\n"
            << row("CEAF_phi4", score.ceaf_phi4) << "\n"
            << "Avg. F1   " << score.avg_f1 << "\n";

  auto record = [](const char* name, const ScoreTriple& t) {
    return json{{"type", "score"},
                {"metric", name},
                {"precision", t.precision},
                {"recall", t.recall},
                {"f1", t.f1}};
  };
  std::vector<json> records = {record("muc", score.muc), record("b_cubed", score.b_cubed),
                               record("ceaf_phi4", score.ceaf_phi4),
                               json{{"type", "score"}, {"metric", "avg_f1"}, {"f1", score.avg_f1}}};
  for (const auto& r : records) std::cout << r.dump() << "\n";
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw DataError("cannot write '" + json_path + "'");
    for (const auto& r : records) out << r.dump() << "\n";
  }
  return 0;
}

int cmd_inspect(const std::string& corpus_path, const std::string& embeddings_path,
                const std::string& checkpoint_path, const std::string& config_path,
                const std::vector<std::string>& sets, const AblationFlags& flags,
                const std::string& doc_id, bool oracle, int synthetic_dim,
                const std::string& lexicon_path) {
  PipelineConfig cfg;
  ModelParams params;
  bool have_params = false;
  if (!checkpoint_path.empty()) {
    std::ifstream ck(checkpoint_path, std::ios::binary);
    if (!ck) throw DataError("cannot open checkpoint '" + checkpoint_path + "'");
    cfg = PipelineConfig::from_string(read_checkpoint_config(ck));
    params = ModelParams::init(cfg.model_dims(), cfg.seed, cfg.v_m_init);
    ck.seekg(0);
    load_checkpoint(ck, params);
    have_params = true;
  } else {
    cfg = assemble_config(config_path, sets);
  }
  flags.apply(cfg);
  cfg.validate();

  auto docs = read_corpus_file(corpus_path);
  std::vector<EmbeddingTable> tables;
  if (!embeddings_path.empty()) {
    tables = read_embedding_file(embeddings_path);
  } else {
    for (const auto& d : docs) tables.push_back(synthetic_embeddings(d, synthetic_dim, cfg.seed));
  }
  auto index = index_embeddings(tables);

  Lexicons lex = load_lexicons(lexicon_path);
  for (const auto& d : docs) {
    if (!doc_id.empty() && d.doc_id != doc_id) continue;
    const EmbeddingTable& emb = embeddings_for(d, index);
    if (!have_params) {
      cfg.emb_dim = emb.dim;
      params = ModelParams::init(cfg.model_dims(), cfg.seed, cfg.v_m_init);
      have_params = true;
    }
    PolicyMode mode = oracle ? PolicyMode::GoldOracle
                      : cfg.mode == "baseline" ? PolicyMode::Baseline
                                               : PolicyMode::Greedy;
    DocumentResult result = resolve_document(d, emb, params, cfg, lex, mode);
    std::cout << inspect_report(d, result);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid rule-neural actor-critic coreference resolver"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse and validate a corpus and its embeddings");
  std::string in_corpus, in_embeddings, in_out_emb, in_out_corpus;
  int in_synthetic_dim = 0;
  std::uint64_t in_seed = 42;
  bool in_binary = false;
  ingest->add_option("--corpus", in_corpus)->required();
  ingest->add_option("--embeddings", in_embeddings);
  ingest->add_option("--synthetic-dim", in_synthetic_dim);
  ingest->add_option("--seed", in_seed);
  ingest->add_option("--out-embeddings", in_out_emb);
  ingest->add_option("--out", in_out_corpus);
  ingest->add_flag("--binary", in_binary, "write synthetic embeddings in the binary format");

  // train
  auto* train = app.add_subcommand("train", "train a model on a gold-annotated corpus");
  std::string tr_corpus, tr_embeddings, tr_config, tr_out, tr_loss_log;
  std::vector<std::string> tr_sets;
  AblationFlags tr_flags;
  train->add_option("--corpus", tr_corpus)->required();
  train->add_option("--embeddings", tr_embeddings)->required();
  train->add_option("--config", tr_config);
  train->add_option("--set", tr_sets, "override a config key, key=value");
  train->add_option("--out", tr_out)->required();
  train->add_option("--loss-log", tr_loss_log);
  add_ablation_flags(train, tr_flags);

  // resolve
  auto* resolve = app.add_subcommand("resolve", "annotate a corpus with system coreference");
  std::string rs_corpus, rs_embeddings, rs_checkpoint, rs_out, rs_lexicons;
  AblationFlags rs_flags;
  std::uint64_t rs_seed = 0;
  bool rs_seed_set = false;
  int rs_jobs = 0;
  resolve->add_option("--corpus", rs_corpus)->required();
  resolve->add_option("--embeddings", rs_embeddings)->required();
  resolve->add_option("--checkpoint", rs_checkpoint)->required();
  resolve->add_option("--out", rs_out)->required();
  resolve->add_option("--lexicons", rs_lexicons);
  resolve->add_option("--jobs", rs_jobs);
  resolve->add_option("--seed", rs_seed)->each([&](const std::string&) { rs_seed_set = true; });
  add_ablation_flags(resolve, rs_flags);

  // score
  auto* score = app.add_subcommand("score", "score a system corpus against gold");
  std::string sc_gold, sc_system, sc_json;
  score->add_option("--gold", sc_gold)->required();
  score->add_option("--system", sc_system)->required();
  score->add_option("--json", sc_json);

  // inspect
  auto* inspect = app.add_subcommand("inspect", "trace the pipeline over a corpus");
  std::string is_corpus, is_embeddings, is_checkpoint, is_config, is_doc, is_lexicons;
  std::vector<std::string> is_sets;
  AblationFlags is_flags;
  bool is_oracle = false;
  int is_synthetic_dim = 16;
  inspect->add_option("--corpus", is_corpus)->required();
  inspect->add_option("--embeddings", is_embeddings);
  inspect->add_option("--checkpoint", is_checkpoint);
  inspect->add_option("--config", is_config);
  inspect->add_option("--set", is_sets);
  inspect->add_option("--doc", is_doc);
  inspect->add_option("--synthetic-dim", is_synthetic_dim);
  inspect->add_option("--lexicons", is_lexicons);
  inspect->add_flag("--oracle", is_oracle, "trace the gold-forced oracle policy");
  add_ablation_flags(inspect, is_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (*ingest)
      return cmd_ingest(in_corpus, in_embeddings, in_synthetic_dim, in_seed, in_out_emb,
                        in_out_corpus, in_binary);
    if (*train)
      return cmd_train(tr_corpus, tr_embeddings, tr_config, tr_sets, tr_flags, tr_out,
                       tr_loss_log);
    if (*resolve)
      return cmd_resolve(rs_corpus, rs_embeddings, rs_checkpoint, rs_out, rs_flags,
                         rs_seed_set ? std::optional<std::uint64_t>(rs_seed) : std::nullopt,
                         rs_jobs, rs_lexicons);
    if (*score) return cmd_score(sc_gold, sc_system, sc_json);
    if (*inspect)
      return cmd_inspect(is_corpus, is_embeddings, is_checkpoint, is_config, is_sets, is_flags,
                         is_doc, is_oracle, is_synthetic_dim, is_lexicons);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const ContractViolation& e) {
    std::cerr << "internal contract violation: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
