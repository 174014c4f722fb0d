#ifndef HRNACC_TESTS_TEST_HELPERS_HPP
#define HRNACC_TESTS_TEST_HELPERS_HPP

#include <sstream>
#include <string>
#include <vector>

#include "hrnacc/corpus.hpp"

namespace hrnacc::testsupport {

// Builds a document from sentences given as space-separated word strings.
// speakers[i] applies to every token of sentence i ("" means unannotated).
inline Document build_doc(const std::string& doc_id,
                          const std::vector<std::string>& sentence_texts,
                          const std::vector<std::string>& speakers = {}) {
  Document doc;
  doc.doc_id = doc_id;
  doc.genre = kUnknownCategory;
  for (size_t s = 0; s < sentence_texts.size(); ++s) {
    int begin = int(doc.tokens.size());
    std::istringstream words(sentence_texts[s]);
    std::string w;
    while (words >> w) {
      Token t;
      t.doc_index = int(doc.tokens.size());
      t.sent_index = int(s);
      t.word = w;
      if (s < speakers.size()) t.speaker = speakers[s];
      doc.tokens.push_back(std::move(t));
    }
    doc.sentences.push_back({begin, int(doc.tokens.size()) - 1});
  }
  return doc;
}

// Finds the span of a phrase inside the document (first occurrence).
inline Span find_span(const Document& doc, const std::string& phrase) {
  std::vector<std::string> words;
  std::istringstream ss(phrase);
  std::string w;
  while (ss >> w) words.push_back(w);
  for (size_t start = 0; start + words.size() <= doc.tokens.size(); ++start) {
    bool match = true;
    for (size_t k = 0; k < words.size(); ++k) {
      if (doc.tokens[start + k].word != words[k]) {
        match = false;
        break;
      }
    }
    if (match) return {int(start), int(start + words.size()) - 1};
  }
  throw std::runtime_error("phrase not found: " + phrase);
}

}  // namespace hrnacc::testsupport

#endif  // HRNACC_TESTS_TEST_HELPERS_HPP
