#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hrnacc/corpus.hpp"
#include "hrnacc/rng.hpp"
#include "support/synthetic_corpus.hpp"
#include "support/test_helpers.hpp"

using namespace hrnacc;

namespace {

const char* kTwoSentenceDoc =
    "#begin document test/d0\n"
    "test/d0 0 0 the - - -\n"
    "test/d0 0 1 quick - - -\n"
    "test/d0 0 2 brown - - (0\n"
    "test/d0 0 3 fox - - 0)\n"
    "test/d0 0 4 jumps - - -\n"
    "\n"
    "test/d0 1 5 over - - -\n"
    "test/d0 1 6 the - - -\n"
    "test/d0 1 7 lazy - - -\n"
    "test/d0 1 8 dog - - -\n"
    "test/d0 1 9 today - - -\n"
    "#end document\n";

EmbeddingTable small_table(const std::string& id, int tokens, int dim) {
  EmbeddingTable t;
  t.doc_id = id;
  t.dim = dim;
  t.vectors.resize(tokens, dim);
  Rng rng(99);
  for (int r = 0; r < tokens; ++r)
    for (int c = 0; c < dim; ++c) t.vectors(r, c) = float(rng.normal());
  return t;
}

std::string embeddings_text(const EmbeddingTable& t, EmbeddingFormat f) {
  std::ostringstream out;
  save_embeddings(out, t, f);
  return out.str();
}

}  // namespace

TEST_CASE("parse_document reads sentences, tokens, and cluster markup") {
  Document doc = parse_document(kTwoSentenceDoc);
  CHECK(doc.doc_id == "test/d0");
  CHECK(doc.genre == "test");
  CHECK(doc.tokens.size() == 10);
  REQUIRE(doc.sentences.size() == 2);
  CHECK(doc.sentences[0] == Span{0, 4});
  CHECK(doc.sentences[1] == Span{5, 9});
  REQUIRE(doc.gold_clusters.size() == 1);
  CHECK(doc.gold_clusters[0].cluster_id == 0);
  CHECK(doc.gold_clusters[0].spans == std::vector<Span>{{2, 3}});
  CHECK(doc.sentence_of(7) == 1);
  CHECK(doc.text_of({2, 3}) == "brown fox");
}

TEST_CASE("parse_document rejects empty input") {
  CHECK_THROWS_WITH_AS(parse_document(""), doctest::Contains("no document found"), ParseError);
  CHECK_THROWS_AS(parse_document("   \n\n"), ParseError);
}

TEST_CASE("a span shared by two clusters is an annotation error") {
  const char* text =
      "#begin document t/x\n"
      "t/x 0 0 a - - (0|(1\n"
      "t/x 0 1 b - - 0)|1)\n"
      "#end document\n";
  CHECK_THROWS_AS(parse_document(text), AnnotationError);
}

TEST_CASE("unbalanced coref parenthesis names the cluster") {
  const char* text =
      "#begin document t/x\n"
      "t/x 0 0 a - - (7\n"
      "t/x 0 1 b - - -\n"
      "#end document\n";
  CHECK_THROWS_WITH_AS(parse_document(text), doctest::Contains("cluster 7"), AnnotationError);
}

TEST_CASE("malformed lines carry line numbers") {
  const char* text =
      "#begin document t/x\n"
      "t/x 0 0 a -\n"
      "#end document\n";
  CHECK_THROWS_WITH_AS(parse_document(text), doctest::Contains("line 2"), ParseError);

  const char* sparse =
      "#begin document t/x\n"
      "t/x 0 5 a - - -\n"
      "#end document\n";
  CHECK_THROWS_WITH_AS(parse_document(sparse), doctest::Contains("line 2"), ParseError);
}

TEST_CASE("comment lines are skipped") {
  std::string text = std::string("# config seed=1\n") + kTwoSentenceDoc;
  CHECK(parse_document(text).tokens.size() == 10);
}

TEST_CASE("parse -> serialize -> parse is a fixed point") {
  const char* text =
      "#begin document bc/talk\n"
      "bc/talk 0 0 Alice NNP spk1 (0)\n"
      "bc/talk 0 1 saw VBD spk1 -\n"
      "bc/talk 0 2 the DT spk1 (1\n"
      "bc/talk 0 3 old JJ spk1 -\n"
      "bc/talk 0 4 bridge NN spk1 1)\n"
      "\n"
      "bc/talk 1 5 she PRP spk2 (0)\n"
      "bc/talk 1 6 liked VBD spk2 -\n"
      "bc/talk 1 7 it PRP spk2 (1)\n"
      "#end document\n";
  Document first = parse_document(text);
  Document second = parse_document(document_to_string(first));
  CHECK(first == second);
  CHECK(document_to_string(first) == document_to_string(second));
}

TEST_CASE("nested and shared-boundary spans round-trip") {
  Document doc = testsupport::build_doc("t/n", {"a b c d e"});
  doc.gold_clusters.push_back({0, {{0, 4}, {1, 2}}});
  doc.gold_clusters.push_back({3, {{1, 4}, {3, 3}}});
  doc.has_gold = true;
  Document reparsed = parse_document(document_to_string(doc));
  CHECK(reparsed.gold_clusters == doc.gold_clusters);
}

TEST_CASE("synthetic corpus documents round-trip through the column format") {
  testsupport::SyntheticConfig cfg;
  cfg.n_docs = 5;
  auto docs = testsupport::generate_corpus(cfg);
  for (const auto& doc : docs) {
    CAPTURE(doc.doc_id);
    Document reparsed = parse_document(document_to_string(doc));
    CHECK(reparsed == doc);
  }
}

TEST_CASE("load_embeddings aligns with the document") {
  Document doc = parse_document(kTwoSentenceDoc);
  EmbeddingTable t = small_table("test/d0", 10, 16);

  SUBCASE("text and binary payloads load identically") {
    for (auto format : {EmbeddingFormat::Text, EmbeddingFormat::Binary}) {
      std::istringstream in(embeddings_text(t, format));
      EmbeddingTable loaded = load_embeddings(in, doc);
      CHECK(loaded.dim == 16);
      CHECK(loaded.tokens() == 10);
    }
  }

  SUBCASE("token-count mismatch is an alignment error") {
    EmbeddingTable bad = small_table("test/d0", 9, 16);
    std::istringstream in(embeddings_text(bad, EmbeddingFormat::Text));
    CHECK_THROWS_WITH_AS(load_embeddings(in, doc), doctest::Contains("alignment"), DataError);
  }

  SUBCASE("NaN names the token index") {
    EmbeddingTable bad = t;
    bad.vectors(3, 5) = std::nanf("");
    std::istringstream in(embeddings_text(bad, EmbeddingFormat::Binary));
    CHECK_THROWS_WITH_AS(load_embeddings(in, doc), doctest::Contains("token 3"), DataError);
  }

  SUBCASE("doc_id mismatch is rejected") {
    EmbeddingTable bad = small_table("other/doc", 10, 16);
    std::istringstream in(embeddings_text(bad, EmbeddingFormat::Text));
    CHECK_THROWS_AS(load_embeddings(in, doc), DataError);
  }
}

TEST_CASE("save/load embeddings round-trips bit-exact in both formats") {
  EmbeddingTable t = small_table("r/t", 7, 5);
  Document doc = testsupport::build_doc("r/t", {"a b c d", "e f g"});
  for (auto format : {EmbeddingFormat::Text, EmbeddingFormat::Binary}) {
    std::istringstream in(embeddings_text(t, format));
    EmbeddingTable loaded = load_embeddings(in, doc);
    CHECK(loaded == t);
    CHECK(embeddings_text(loaded, format) == embeddings_text(t, format));
  }
}

TEST_CASE("multi-block embedding files load per document") {
  EmbeddingTable a = small_table("d/a", 4, 3);
  EmbeddingTable b = small_table("d/b", 2, 3);
  for (auto fa : {EmbeddingFormat::Text, EmbeddingFormat::Binary}) {
    std::ostringstream out;
    save_embeddings(out, a, fa);
    save_embeddings(out, b, fa);
    std::istringstream in(out.str());
    auto tables = load_embedding_file(in);
    REQUIRE(tables.size() == 2);
    CHECK(tables[0] == a);
    CHECK(tables[1] == b);
  }
}

TEST_CASE("synthetic embeddings are deterministic and word-stable") {
  Document doc = testsupport::build_doc("s/x", {"hotel stay", "hotel visit"});
  EmbeddingTable t = synthetic_embeddings(doc, 24, 11);

  SUBCASE("same word occurrences stay close") {
    Eigen::VectorXd v0 = t.token_vector(0);
    Eigen::VectorXd v2 = t.token_vector(2);
    double cosine = v0.dot(v2) / (v0.norm() * v2.norm());
    CHECK(cosine >= 0.9);
  }

  SUBCASE("same seed reproduces the table, different seeds do not") {
    CHECK(synthetic_embeddings(doc, 24, 11) == t);
    CHECK_FALSE(synthetic_embeddings(doc, 24, 12) == t);
  }

  SUBCASE("dim 0 violates the precondition") {
    CHECK_THROWS_AS(synthetic_embeddings(doc, 0, 11), ConfigError);
  }
}

TEST_CASE("speaker and genre fall back to the unknown category") {
  Document doc = parse_document(kTwoSentenceDoc);
  CHECK(doc.speaker_of({0, 0}) == kUnknownCategory);
  Document no_slash = testsupport::build_doc("plainid", {"a"});
  CHECK(parse_document(document_to_string(no_slash)).genre == kUnknownCategory);
}
