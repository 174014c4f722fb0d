#include "hrnacc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hrnacc/rng.hpp"

namespace hrnacc {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string genre_of(const std::string& doc_id) {
  auto slash = doc_id.find('/');
  if (slash == std::string::npos || slash == 0) return kUnknownCategory;
  return doc_id.substr(0, slash);
}

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

int Document::sentence_of(int token_index) const {
  if (token_index < 0 || token_index >= int(tokens.size()))
    throw ContractViolation("token index " + std::to_string(token_index) + " out of range");
  return tokens[token_index].sent_index;
}

std::string Document::text_of(Span s) const {
  std::string out;
  for (int t = s.start; t <= s.end; ++t) {
    if (t != s.start) out += ' ';
    out += tokens[t].word;
  }
  return out;
}

std::string Document::speaker_of(Span s) const {
  const std::string& sp = tokens[s.start].speaker;
  return sp.empty() ? kUnknownCategory : sp;
}

std::vector<Document> parse_corpus(std::istream& in) {
  std::vector<Document> docs;

  Document doc;
  bool in_doc = false;
  bool sentence_open = false;
  int sent_begin = 0;
  int line_no = 0;
  // cluster id -> stack of open start positions
  std::map<int, std::vector<int>> open_spans;
  std::map<int, std::vector<Span>> cluster_spans;

  auto close_sentence = [&]() {
    if (sentence_open) {
      doc.sentences.push_back({sent_begin, int(doc.tokens.size()) - 1});
      sentence_open = false;
    }
  };

  auto finish_document = [&]() {
    close_sentence();
    for (const auto& [cid, stack] : open_spans) {
      if (!stack.empty())
        throw AnnotationError(doc.doc_id + ": unbalanced coref parenthesis for cluster " +
                              std::to_string(cid));
    }
    std::unordered_map<Span, int, SpanHash> seen;
    for (auto& [cid, spans] : cluster_spans) {
      std::sort(spans.begin(), spans.end());
      spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
      for (const Span& s : spans) {
        auto [it, inserted] = seen.emplace(s, cid);
        if (!inserted)
          throw AnnotationError(doc.doc_id + ": span (" + std::to_string(s.start) + "," +
                                std::to_string(s.end) + ") appears in clusters " +
                                std::to_string(it->second) + " and " + std::to_string(cid));
      }
      doc.gold_clusters.push_back({cid, spans});
      doc.has_gold = true;
    }
    doc.genre = genre_of(doc.doc_id);
    docs.push_back(std::move(doc));
    doc = Document{};
    open_spans.clear();
    cluster_spans.clear();
  };

  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = strip_cr(raw);

    if (line.rfind("#begin document", 0) == 0) {
      if (in_doc) parse_fail(line_no, "nested #begin document");
      auto fields = split_ws(line);
      if (fields.size() < 3) parse_fail(line_no, "#begin document without an id");
      doc.doc_id = fields[2];
      in_doc = true;
      continue;
    }
    if (line.rfind("#end document", 0) == 0) {
      if (!in_doc) parse_fail(line_no, "#end document outside a document");
      finish_document();
      in_doc = false;
      continue;
    }
    if (!line.empty() && line[0] == '#') continue;  // comment
    if (is_blank(line)) {
      close_sentence();
      continue;
    }
    if (!in_doc) parse_fail(line_no, "token line outside #begin/#end document");

    auto fields = split_ws(line);
    if (fields.size() != 7)
      parse_fail(line_no, "expected 7 columns, found " + std::to_string(fields.size()));
    if (fields[0] != doc.doc_id)
      parse_fail(line_no, "doc_id column '" + fields[0] + "' does not match document '" +
                              doc.doc_id + "'");

    int sent_index = 0, tok_index = 0;
    try {
      sent_index = std::stoi(fields[1]);
      tok_index = std::stoi(fields[2]);
    } catch (const std::exception&) {
      parse_fail(line_no, "non-numeric sentence or token index");
    }
    if (tok_index != int(doc.tokens.size()))
      parse_fail(line_no, "token_index " + std::to_string(tok_index) + " is not dense (expected " +
                              std::to_string(doc.tokens.size()) + ")");
    if (!sentence_open) {
      sent_begin = int(doc.tokens.size());
      sentence_open = true;
    }
    int expected_sent = int(doc.sentences.size());
    if (sent_index != expected_sent)
      parse_fail(line_no, "sent_index " + std::to_string(sent_index) + " does not match sentence " +
                              std::to_string(expected_sent));

    Token tok;
    tok.doc_index = tok_index;
    tok.sent_index = sent_index;
    tok.word = fields[3];
    tok.pos_tag = fields[4] == "-" ? std::string() : fields[4];
    tok.speaker = fields[5] == "-" ? std::string() : fields[5];
    doc.tokens.push_back(std::move(tok));

    const std::string& coref = fields[6];
    if (coref != "-") {
      std::istringstream cs(coref);
      std::string item;
      while (std::getline(cs, item, '|')) {
        if (item.empty()) parse_fail(line_no, "empty coref item");
        bool opens = item.front() == '(';
        bool closes = item.back() == ')';
        std::string id_text = item.substr(opens ? 1 : 0,
                                          item.size() - (opens ? 1 : 0) - (closes ? 1 : 0));
        int cid = 0;
        try {
          cid = std::stoi(id_text);
        } catch (const std::exception&) {
          parse_fail(line_no, "bad coref item '" + item + "'");
        }
        if (opens && closes) {
          cluster_spans[cid].push_back({tok_index, tok_index});
        } else if (opens) {
          open_spans[cid].push_back(tok_index);
        } else if (closes) {
          auto& stack = open_spans[cid];
          if (stack.empty())
            throw AnnotationError(doc.doc_id + ": unbalanced coref parenthesis for cluster " +
                                  std::to_string(cid));
          cluster_spans[cid].push_back({stack.back(), tok_index});
          stack.pop_back();
        } else {
          parse_fail(line_no, "coref item '" + item + "' has no parenthesis");
        }
      }
    }
  }
  if (in_doc) throw ParseError("missing #end document for '" + doc.doc_id + "'");
  return docs;
}

std::vector<Document> parse_corpus(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

Document parse_document(const std::string& text) {
  auto docs = parse_corpus(text);
  if (docs.empty()) throw ParseError("no document found");
  return std::move(docs.front());
}

namespace {

void write_document(std::ostream& out, const Document& doc,
                    const std::vector<GoldCluster>& clusters) {
  // opens[t] lists cluster ids by span end descending so that the matching
  // close pops in stack order; closes[t] lists ids of spans ending at t.
  std::vector<std::vector<std::pair<Span, int>>> opens(doc.tokens.size());
  std::vector<std::vector<std::pair<Span, int>>> closes(doc.tokens.size());
  for (const auto& c : clusters) {
    for (const Span& s : c.spans) {
      if (s.start < 0 || s.end >= int(doc.tokens.size()) || s.start > s.end)
        throw DataError(doc.doc_id + ": cluster span out of bounds");
      if (s.width() == 1) {
        opens[s.start].push_back({s, c.cluster_id});
      } else {
        opens[s.start].push_back({s, c.cluster_id});
        closes[s.end].push_back({s, c.cluster_id});
      }
    }
  }
  for (auto& v : opens)
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      if (a.first.end != b.first.end) return a.first.end > b.first.end;
      return a.second < b.second;
    });
  for (auto& v : closes)
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      if (a.first.start != b.first.start) return a.first.start > b.first.start;
      return a.second < b.second;
    });

  out << "#begin document " << doc.doc_id << "\n";
  for (size_t si = 0; si < doc.sentences.size(); ++si) {
    const Span sent = doc.sentences[si];
    for (int t = sent.start; t <= sent.end; ++t) {
      const Token& tok = doc.tokens[t];
      std::string coref;
      for (const auto& [s, cid] : opens[t]) {
        if (!coref.empty()) coref += '|';
        coref += '(' + std::to_string(cid);
        if (s.width() == 1) coref += ')';
      }
      for (const auto& [s, cid] : closes[t]) {
        if (!coref.empty()) coref += '|';
        coref += std::to_string(cid) + ')';
      }
      if (coref.empty()) coref = "-";
      out << doc.doc_id << ' ' << tok.sent_index << ' ' << tok.doc_index << ' ' << tok.word << ' '
          << (tok.pos_tag.empty() ? "-" : tok.pos_tag) << ' '
          << (tok.speaker.empty() ? "-" : tok.speaker) << ' ' << coref << "\n";
    }
    if (si + 1 < doc.sentences.size()) out << "\n";
  }
  out << "#end document\n";
}

}  // namespace

void serialize_document(std::ostream& out, const Document& doc) {
  write_document(out, doc, doc.gold_clusters);
}

void serialize_document(std::ostream& out, const Document& doc,
                        const std::vector<std::vector<Span>>& clusters) {
  std::vector<GoldCluster> numbered;
  for (size_t i = 0; i < clusters.size(); ++i) {
    auto spans = clusters[i];
    std::sort(spans.begin(), spans.end());
    spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
    numbered.push_back({int(i), std::move(spans)});
  }
  write_document(out, doc, numbered);
}

std::string document_to_string(const Document& doc) {
  std::ostringstream out;
  serialize_document(out, doc);
  return out.str();
}

namespace {

// A text block's payload opens with a line of exactly `dim` floats; binary
// f32 data essentially never does.
bool payload_is_text(std::string_view payload, int dim) {
  size_t nl = payload.find('\n');
  size_t len = std::min(nl == std::string_view::npos ? payload.size() : nl, size_t(1) << 16);
  std::string first(payload.substr(0, len));
  if (!first.empty() && first.back() == '\r') first.pop_back();
  if (first.empty()) return false;
  std::istringstream ss(first);
  float v;
  for (int d = 0; d < dim; ++d)
    if (!(ss >> v)) return false;
  return !(ss >> v);
}

struct BlockReader {
  std::string_view data;
  size_t pos = 0;

  bool eof() {
    while (pos < data.size() && (data[pos] == '\n' || data[pos] == '\r')) ++pos;
    return pos >= data.size();
  }

  std::string_view line() {
    size_t nl = data.find('\n', pos);
    std::string_view out = data.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? data.size() : nl + 1;
    while (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    return out;
  }
};

EmbeddingTable read_block(BlockReader& r) {
  std::string header(r.line());
  std::istringstream hs(header);
  EmbeddingTable table;
  long n_tokens = -1;
  if (!(hs >> table.doc_id >> table.dim >> n_tokens))
    throw ParseError("bad embedding header '" + header + "'");
  if (table.dim < 1) throw DataError(table.doc_id + ": embedding dim must be >= 1");
  if (n_tokens < 0) throw DataError(table.doc_id + ": negative token count");
  table.vectors.resize(n_tokens, table.dim);
  if (n_tokens == 0) return table;

  std::string_view payload = r.data.substr(r.pos);
  size_t binary_size = size_t(n_tokens) * size_t(table.dim) * 4;
  if (!payload_is_text(payload, table.dim)) {
    if (payload.size() < binary_size)
      throw DataError(table.doc_id + ": binary embedding block truncated");
    static_assert(sizeof(float) == 4);
    for (long t = 0; t < n_tokens; ++t) {
      for (int d = 0; d < table.dim; ++d) {
        float v;
        std::memcpy(&v, payload.data() + (size_t(t) * table.dim + d) * 4, 4);
        table.vectors(t, d) = v;
      }
    }
    r.pos += binary_size;
  } else {
    for (long t = 0; t < n_tokens; ++t) {
      if (r.eof()) throw DataError(table.doc_id + ": embedding block ends after " +
                                   std::to_string(t) + " of " + std::to_string(n_tokens) +
                                   " vectors");
      std::string row(r.line());
      std::istringstream rs(row);
      for (int d = 0; d < table.dim; ++d) {
        float v;
        if (!(rs >> v))
          throw DataError(table.doc_id + ": token " + std::to_string(t) + " has fewer than " +
                          std::to_string(table.dim) + " values");
        table.vectors(t, d) = v;
      }
      float extra;
      if (rs >> extra)
        throw DataError(table.doc_id + ": token " + std::to_string(t) + " has more than " +
                        std::to_string(table.dim) + " values");
    }
  }
  for (long t = 0; t < n_tokens; ++t)
    for (int d = 0; d < table.dim; ++d)
      if (!std::isfinite(table.vectors(t, d)))
        throw DataError(table.doc_id + ": non-finite embedding value at token " +
                        std::to_string(t));
  return table;
}

std::string slurp(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<EmbeddingTable> load_embedding_file(std::istream& in) {
  std::string data = slurp(in);
  BlockReader r{data};
  std::vector<EmbeddingTable> tables;
  while (!r.eof()) tables.push_back(read_block(r));
  return tables;
}

EmbeddingTable load_embeddings(std::istream& in, const Document& doc) {
  std::string data = slurp(in);
  BlockReader r{data};
  if (r.eof()) throw ParseError("empty embedding stream");
  EmbeddingTable table = read_block(r);
  if (table.doc_id != doc.doc_id)
    throw DataError("embedding block is for '" + table.doc_id + "', expected '" + doc.doc_id +
                    "'");
  if (table.tokens() != int(doc.tokens.size()))
    throw DataError(doc.doc_id + ": alignment error: " + std::to_string(table.tokens()) +
                    " vectors for " + std::to_string(doc.tokens.size()) + " tokens");
  return table;
}

void save_embeddings(std::ostream& out, const EmbeddingTable& table, EmbeddingFormat format) {
  out << table.doc_id << ' ' << table.dim << ' ' << table.tokens() << "\n";
  if (format == EmbeddingFormat::Text) {
    char buf[64];
    for (int t = 0; t < table.tokens(); ++t) {
      for (int d = 0; d < table.dim; ++d) {
        std::snprintf(buf, sizeof buf, "%.9g", double(table.vectors(t, d)));
        if (d) out << ' ';
        out << buf;
      }
      out << "\n";
    }
  } else {
    for (int t = 0; t < table.tokens(); ++t) {
      for (int d = 0; d < table.dim; ++d) {
        float v = table.vectors(t, d);
        char bytes[4];
        std::memcpy(bytes, &v, 4);
        out.write(bytes, 4);
      }
    }
  }
}

EmbeddingTable synthetic_embeddings(const Document& doc, int dim, std::uint64_t seed) {
  if (dim < 1) throw ConfigError("synthetic embedding dim must be >= 1, got " +
                                 std::to_string(dim));
  EmbeddingTable table;
  table.doc_id = doc.doc_id;
  table.dim = dim;
  table.vectors.resize(long(doc.tokens.size()), dim);

  const double kPerturbation = 0.05;
  for (size_t t = 0; t < doc.tokens.size(); ++t) {
    const std::string& word = doc.tokens[t].word;
    Rng base_rng(hash_mix(seed, fnv1a(word)));
    Eigen::VectorXd base(dim);
    for (int d = 0; d < dim; ++d) base[d] = base_rng.normal();
    base.normalize();

    // Context perturbation keyed on the neighbouring words.
    std::uint64_t ctx = hash_mix(seed, fnv1a(word));
    ctx = hash_mix(ctx, t > 0 ? fnv1a(doc.tokens[t - 1].word) : 0x517cc1b727220a95ULL);
    ctx = hash_mix(ctx, t + 1 < doc.tokens.size() ? fnv1a(doc.tokens[t + 1].word)
                                                  : 0x2545f4914f6cdd1dULL);
    ctx = hash_mix(ctx, std::uint64_t(t));
    Rng ctx_rng(ctx);
    Eigen::VectorXd noise(dim);
    for (int d = 0; d < dim; ++d) noise[d] = ctx_rng.normal();
    if (noise.norm() > 0) noise *= kPerturbation / noise.norm();

    table.vectors.row(long(t)) = (base + noise).cast<float>();
  }
  return table;
}

}  // namespace hrnacc
