#ifndef HRNACC_CORPUS_HPP
#define HRNACC_CORPUS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hrnacc/types.hpp"

namespace hrnacc {

inline constexpr const char* kUnknownCategory = "unknown";

struct Token {
  int doc_index = 0;
  int sent_index = 0;
  std::string word;
  std::string pos_tag;  // empty when the column was "-"
  std::string speaker;  // empty when the column was "-"

  friend bool operator==(const Token&, const Token&) = default;
};

struct GoldCluster {
  int cluster_id = 0;
  std::vector<Span> spans;  // sorted, unique

  friend bool operator==(const GoldCluster&, const GoldCluster&) = default;
};

struct Document {
  std::string doc_id;
  std::string genre;  // doc_id prefix before the first '/', else "unknown"
  std::vector<Token> tokens;
  std::vector<Span> sentences;  // token ranges, tiling the document
  std::vector<GoldCluster> gold_clusters;
  bool has_gold = false;

  int sentence_of(int token_index) const;
  std::string text_of(Span s) const;
  // Speaker of the span's first token; "unknown" when unannotated.
  std::string speaker_of(Span s) const;

  friend bool operator==(const Document&, const Document&) = default;
};

// Column format, one token per line:
//   doc_id sent_index token_index word pos_tag speaker coref
// with "#begin document <id>" / "#end document" sentinels, a blank line
// between sentences, and "-" for absent pos/speaker/coref. Other '#' lines
// are comments. The coref column is pipe-separated "(k", "k)", "(k)".
std::vector<Document> parse_corpus(std::istream& in);
std::vector<Document> parse_corpus(const std::string& text);

// First document of the input; throws ParseError("no document found") when
// the input holds none.
Document parse_document(const std::string& text);

void serialize_document(std::ostream& out, const Document& doc);
// Writes `clusters` into the coref column instead of the document's gold.
void serialize_document(std::ostream& out, const Document& doc,
                        const std::vector<std::vector<Span>>& clusters);
std::string document_to_string(const Document& doc);

struct EmbeddingTable {
  std::string doc_id;
  int dim = 0;
  Eigen::MatrixXf vectors;  // tokens x dim

  int tokens() const { return int(vectors.rows()); }
  Eigen::VectorXd token_vector(int t) const { return vectors.row(t).cast<double>(); }

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.doc_id == b.doc_id && a.dim == b.dim && a.vectors.rows() == b.vectors.rows() &&
           a.vectors == b.vectors;
  }
};

enum class EmbeddingFormat { Text, Binary };

// Block format: header line "doc_id dim n_tokens", then either n_tokens text
// lines of dim floats or dim*n_tokens little-endian 32-bit floats. The
// payload kind is sniffed per block.
EmbeddingTable load_embeddings(std::istream& in, const Document& doc);
std::vector<EmbeddingTable> load_embedding_file(std::istream& in);
void save_embeddings(std::ostream& out, const EmbeddingTable& table, EmbeddingFormat format);

// Deterministic stand-in for contextual embeddings: unit base vector per
// word string plus a small context perturbation, so identical words map to
// nearby vectors.
EmbeddingTable synthetic_embeddings(const Document& doc, int dim, std::uint64_t seed);

}  // namespace hrnacc

#endif  // HRNACC_CORPUS_HPP
