#ifndef HRNACC_RULES_HPP
#define HRNACC_RULES_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <vector>

#include "hrnacc/clusters.hpp"
#include "hrnacc/corpus.hpp"
#include "hrnacc/types.hpp"

namespace hrnacc {

// Word lists backing the deterministic rules. All sets hold lowercase
// entries; lookups are case-insensitive.
struct Lexicons {
  std::unordered_set<std::string> first_person_pronouns;  // singular and plural
  std::unordered_set<std::string> second_person_pronouns;
  std::unordered_set<std::string> third_person_pronouns;
  std::unordered_set<std::string> reporting_verbs;
  std::unordered_set<std::string> stop_words;
  std::unordered_set<std::string> relative_pronouns;
  std::unordered_set<std::string> copular_verbs;
  std::unordered_set<std::string> prepositions;  // post-modifier triggers for head finding

  static Lexicons defaults();
  // Plain-text sections: "[section_name]" then one term per line; '#' comments.
  static Lexicons from_stream(std::istream& in);

  bool is_pronoun(const std::string& word) const;
};

std::string lowercase(const std::string& s);

enum class RuleId {
  R1_PRONOUN,
  R2_EXACT,
  R2_RELAXED,
  R3_INCLUSION,
  R4_PREDICATE_NOM,
  R4_RELATIVE_PRON,
};

const char* rule_name(RuleId id);

struct RuleLink {
  Span mention_a;  // precedes mention_b in document order
  Span mention_b;
  RuleId rule_id;

  friend bool operator==(const RuleLink&, const RuleLink&) = default;
};

// Enabled rule families, index 0 unused; defaults to all four.
struct RuleMask {
  std::array<bool, 5> enabled{false, true, true, true, true};

  static RuleMask all() { return {}; }
  static RuleMask none() { return {{false, false, false, false, false}}; }
  static RuleMask parse(const std::string& csv);  // e.g. "1,2,4"
  bool any() const { return enabled[1] || enabled[2] || enabled[3] || enabled[4]; }
  std::string to_string() const;
};

// Head-word heuristic: the token just before the first post-modifier trigger
// (comma, preposition, relative pronoun), else the rightmost non-stop token,
// else the last token. Returns a token index.
int head_word_index(const Document& doc, Span mention, const Lexicons& lex);

// Rule 1: same-sentence pronoun pairs of the same person subclass; across
// sentences only with a matching speaker.
std::vector<RuleLink> rule1_pronoun_links(const Document& doc, const std::vector<Span>& mentions,
                                          const Lexicons& lex);

// Rule 2: exact extent match, else match after truncating both at the head
// word; pronouns excluded from both sub-rules.
std::vector<RuleLink> rule2_string_match(const Document& doc, const std::vector<Span>& mentions,
                                         const Lexicons& lex);

// Rule 3: head-word match plus non-stop word containment in either
// direction against some mention of the antecedent cluster.
bool rule3_word_inclusion(const Document& doc, Span mention,
                          const std::vector<Span>& antecedent_cluster, const Lexicons& lex);

// Rule 4: predicate nominative (mention copula mention) and relative
// pronouns attached to their antecedent noun phrase.
std::vector<RuleLink> rule4_precise_links(const Document& doc, const std::vector<Span>& mentions,
                                          const Lexicons& lex);

// Blocking sub-rules, enforced as hard vetoes at union time.
bool blocking_veto(const Document& doc, Span a, Span b, const Lexicons& lex);

// Sieve pass R1 -> R2 -> R3 -> R4 with union-find transitivity and veto
// checks; mentions linked by no rule form the non-linked group.
GroupPartition apply_rules(const Document& doc, const std::vector<Span>& mentions,
                           const Lexicons& lex, RuleMask rules = RuleMask::all(),
                           std::vector<RuleLink>* links_out = nullptr);

}  // namespace hrnacc

#endif  // HRNACC_RULES_HPP
