#include "hrnacc/rules.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <sstream>

#include "hrnacc/union_find.hpp"

namespace hrnacc {

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

Lexicons Lexicons::defaults() {
  Lexicons lex;
  lex.first_person_pronouns = {"i", "my", "me", "mine", "we", "us", "our", "ours"};
  lex.second_person_pronouns = {"you", "your", "yours"};
  lex.third_person_pronouns = {"he",  "him",   "his", "she",  "her",   "hers",
                               "it",  "its",   "they", "them", "their", "theirs"};
  lex.reporting_verbs = {"say",  "says",  "said",  "tell", "tells", "told",
                         "report", "reports", "reported", "ask", "asks", "asked",
                         "claim", "claims", "claimed", "state", "states", "stated"};
  lex.relative_pronouns = {"who", "which", "that", "whom", "whose"};
  lex.copular_verbs = {"is", "are", "was", "were", "be", "been", "being", "am"};
  lex.prepositions = {"of", "to", "in", "on", "at",   "by",   "for",  "with", "from",
                      "about", "as", "into", "over", "after", "under", "near", "between"};
  lex.stop_words = {"a",    "an",   "the",  "this", "these", "those",
                    "and",  "or",   "but",  "not",  "no",    "so",
                    "of",   "to",   "in",   "on",   "at",    "by",
                    "for",  "with", "from", "about", "as",   "into",
                    "over", "after", "under", "near", "between",
                    "is",   "are",  "was",  "were", "be",    "been",
                    "being", "am",  ",",    ".",    "'s"};
  return lex;
}

Lexicons Lexicons::from_stream(std::istream& in) {
  Lexicons lex;  // start empty; the file is the full definition
  std::map<std::string, std::unordered_set<std::string>*> sections = {
      {"first_person_pronouns", &lex.first_person_pronouns},
      {"second_person_pronouns", &lex.second_person_pronouns},
      {"third_person_pronouns", &lex.third_person_pronouns},
      {"reporting_verbs", &lex.reporting_verbs},
      {"stop_words", &lex.stop_words},
      {"relative_pronouns", &lex.relative_pronouns},
      {"copular_verbs", &lex.copular_verbs},
      {"prepositions", &lex.prepositions},
  };
  std::unordered_set<std::string>* current = nullptr;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    size_t last = line.find_last_not_of(" \t");
    std::string term = line.substr(begin, last - begin + 1);
    if (term[0] == '#') continue;
    if (term.front() == '[' && term.back() == ']') {
      std::string name = term.substr(1, term.size() - 2);
      auto it = sections.find(name);
      if (it == sections.end())
        throw ConfigError("lexicon line " + std::to_string(line_no) + ": unknown section [" +
                          name + "]");
      current = it->second;
      continue;
    }
    if (!current)
      throw ConfigError("lexicon line " + std::to_string(line_no) + ": term before any section");
    current->insert(lowercase(term));
  }
  return lex;
}

bool Lexicons::is_pronoun(const std::string& word) const {
  std::string w = lowercase(word);
  return first_person_pronouns.count(w) || second_person_pronouns.count(w) ||
         third_person_pronouns.count(w) || relative_pronouns.count(w);
}

const char* rule_name(RuleId id) {
  switch (id) {
    case RuleId::R1_PRONOUN: return "R1_PRONOUN";
    case RuleId::R2_EXACT: return "R2_EXACT";
    case RuleId::R2_RELAXED: return "R2_RELAXED";
    case RuleId::R3_INCLUSION: return "R3_INCLUSION";
    case RuleId::R4_PREDICATE_NOM: return "R4_PREDICATE_NOM";
    case RuleId::R4_RELATIVE_PRON: return "R4_RELATIVE_PRON";
  }
  return "?";
}

RuleMask RuleMask::parse(const std::string& csv) {
  RuleMask mask = RuleMask::none();
  std::istringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    size_t e = item.find_last_not_of(" \t");
    std::string t = item.substr(b, e - b + 1);
    if (t.size() != 1 || t[0] < '1' || t[0] > '4')
      throw ConfigError("bad rule id '" + t + "' in --rules (expected 1..4)");
    mask.enabled[size_t(t[0] - '0')] = true;
  }
  return mask;
}

std::string RuleMask::to_string() const {
  std::string out;
  for (int r = 1; r <= 4; ++r) {
    if (!enabled[size_t(r)]) continue;
    if (!out.empty()) out += ',';
    out += char('0' + r);
  }
  return out;
}

namespace {

// Person subclasses used by rule 1 and the blocking vetoes.
enum class PronounClass { None, FirstSingular, FirstPlural, Second, Third };

PronounClass pronoun_class(const std::string& lower) {
  static const std::unordered_set<std::string> first_sg = {"i", "my", "me", "mine"};
  static const std::unordered_set<std::string> first_pl = {"we", "us", "our", "ours"};
  if (first_sg.count(lower)) return PronounClass::FirstSingular;
  if (first_pl.count(lower)) return PronounClass::FirstPlural;
  return PronounClass::None;
}

struct MentionInfo {
  Span span;
  bool is_pronoun = false;
  PronounClass pclass = PronounClass::None;
  int person = 0;  // grammatical person 1/2/3, 0 for nominals
  int sentence = 0;
};

MentionInfo classify(const Document& doc, Span span, const Lexicons& lex) {
  MentionInfo info;
  info.span = span;
  info.sentence = doc.tokens[size_t(span.start)].sent_index;
  if (span.width() == 1) {
    std::string w = lowercase(doc.tokens[size_t(span.start)].word);
    if (lex.first_person_pronouns.count(w)) {
      info.is_pronoun = true;
      info.person = 1;
      info.pclass = pronoun_class(w);
      if (info.pclass == PronounClass::None) info.pclass = PronounClass::FirstSingular;
    } else if (lex.second_person_pronouns.count(w)) {
      info.is_pronoun = true;
      info.person = 2;
      info.pclass = PronounClass::Second;
    } else if (lex.third_person_pronouns.count(w)) {
      info.is_pronoun = true;
      info.person = 3;
      info.pclass = PronounClass::Third;
    } else if (lex.relative_pronouns.count(w)) {
      info.is_pronoun = true;
      info.person = 3;
      info.pclass = PronounClass::Third;
    }
  }
  return info;
}

bool same_sentence(const Document& doc, Span a, Span b) {
  return doc.tokens[size_t(a.start)].sent_index == doc.tokens[size_t(b.start)].sent_index;
}

bool is_trigger(const std::string& lower, const Lexicons& lex) {
  return lower == "," || lex.prepositions.count(lower) || lex.relative_pronouns.count(lower);
}

std::unordered_set<std::string> non_stop_words(const Document& doc, Span span,
                                               const Lexicons& lex) {
  std::unordered_set<std::string> words;
  for (int t = span.start; t <= span.end; ++t) {
    std::string w = lowercase(doc.tokens[size_t(t)].word);
    if (!lex.stop_words.count(w)) words.insert(w);
  }
  return words;
}

bool subset_of(const std::unordered_set<std::string>& a,
               const std::unordered_set<std::string>& b) {
  for (const auto& w : a)
    if (!b.count(w)) return false;
  return true;
}

std::string truncated_at_head(const Document& doc, Span span, const Lexicons& lex) {
  int head = head_word_index(doc, span, lex);
  std::string out;
  for (int t = span.start; t <= head; ++t) {
    if (t != span.start) out += ' ';
    out += lowercase(doc.tokens[size_t(t)].word);
  }
  return out;
}

}  // namespace

int head_word_index(const Document& doc, Span mention, const Lexicons& lex) {
  if (mention.start < 0 || mention.end >= int(doc.tokens.size()))
    throw ContractViolation("mention span out of document bounds");
  for (int t = mention.start + 1; t <= mention.end; ++t) {
    if (is_trigger(lowercase(doc.tokens[size_t(t)].word), lex)) return t - 1;
  }
  for (int t = mention.end; t >= mention.start; --t) {
    if (!lex.stop_words.count(lowercase(doc.tokens[size_t(t)].word))) return t;
  }
  return mention.end;
}

std::vector<RuleLink> rule1_pronoun_links(const Document& doc, const std::vector<Span>& mentions,
                                          const Lexicons& lex) {
  std::vector<MentionInfo> infos;
  for (Span m : mentions) infos.push_back(classify(doc, m, lex));

  std::vector<RuleLink> links;
  for (size_t b = 0; b < infos.size(); ++b) {
    if (!infos[b].is_pronoun || infos[b].person == 3) continue;
    for (size_t a = 0; a < b; ++a) {
      if (!infos[a].is_pronoun || infos[a].pclass != infos[b].pclass) continue;
      bool linked = same_sentence(doc, infos[a].span, infos[b].span) ||
                    doc.speaker_of(infos[a].span) == doc.speaker_of(infos[b].span);
      if (linked) links.push_back({infos[a].span, infos[b].span, RuleId::R1_PRONOUN});
    }
  }
  return links;
}

std::vector<RuleLink> rule2_string_match(const Document& doc, const std::vector<Span>& mentions,
                                         const Lexicons& lex) {
  std::vector<RuleLink> links;
  std::vector<std::string> extent(mentions.size()), relaxed(mentions.size());
  std::vector<bool> pronoun(mentions.size());
  for (size_t i = 0; i < mentions.size(); ++i) {
    pronoun[i] = classify(doc, mentions[i], lex).is_pronoun;
    if (pronoun[i]) continue;
    extent[i] = lowercase(doc.text_of(mentions[i]));
    relaxed[i] = truncated_at_head(doc, mentions[i], lex);
  }
  for (size_t b = 0; b < mentions.size(); ++b) {
    if (pronoun[b]) continue;
    for (size_t a = 0; a < b; ++a) {
      if (pronoun[a]) continue;
      if (extent[a] == extent[b]) {
        links.push_back({mentions[a], mentions[b], RuleId::R2_EXACT});
      } else if (relaxed[a] == relaxed[b]) {
        links.push_back({mentions[a], mentions[b], RuleId::R2_RELAXED});
      }
    }
  }
  return links;
}

bool rule3_word_inclusion(const Document& doc, Span mention,
                          const std::vector<Span>& antecedent_cluster, const Lexicons& lex) {
  if (classify(doc, mention, lex).is_pronoun) return false;
  auto mention_words = non_stop_words(doc, mention, lex);
  if (mention_words.empty()) return false;
  std::string mention_head = lowercase(doc.tokens[size_t(head_word_index(doc, mention, lex))].word);

  for (Span a : antecedent_cluster) {
    if (classify(doc, a, lex).is_pronoun) continue;
    std::string a_head = lowercase(doc.tokens[size_t(head_word_index(doc, a, lex))].word);
    if (a_head != mention_head) continue;
    auto a_words = non_stop_words(doc, a, lex);
    if (a_words.empty()) continue;
    if (subset_of(mention_words, a_words) || subset_of(a_words, mention_words)) return true;
  }
  return false;
}

std::vector<RuleLink> rule4_precise_links(const Document& doc, const std::vector<Span>& mentions,
                                          const Lexicons& lex) {
  std::vector<RuleLink> links;

  // Predicate nominative: mention_a copula mention_b within one sentence.
  for (size_t a = 0; a < mentions.size(); ++a) {
    int copula = mentions[a].end + 1;
    if (copula >= int(doc.tokens.size())) continue;
    if (!lex.copular_verbs.count(lowercase(doc.tokens[size_t(copula)].word))) continue;
    for (size_t b = 0; b < mentions.size(); ++b) {
      if (a == b || mentions[b].start != copula + 1) continue;
      if (!same_sentence(doc, mentions[a], mentions[b])) continue;
      links.push_back({mentions[a], mentions[b], RuleId::R4_PREDICATE_NOM});
    }
  }

  // Relative pronoun: prefer the mention it immediately follows (optionally
  // across a comma), else the smallest enclosing mention starting before it.
  for (size_t p = 0; p < mentions.size(); ++p) {
    Span pron = mentions[p];
    if (pron.width() != 1) continue;
    if (!lex.relative_pronouns.count(lowercase(doc.tokens[size_t(pron.start)].word))) continue;

    const Span* antecedent = nullptr;
    int want_end = pron.start - 1;
    if (want_end >= 0 && doc.tokens[size_t(want_end)].word == ",") --want_end;
    for (size_t a = 0; a < mentions.size(); ++a) {
      if (a == p || mentions[a].end != want_end) continue;
      if (!antecedent || mentions[a].start < antecedent->start) antecedent = &mentions[a];
    }
    if (!antecedent) {
      for (size_t a = 0; a < mentions.size(); ++a) {
        if (a == p) continue;
        const Span& cand = mentions[a];
        if (!(cand.contains(pron.start) && cand.start < pron.start)) continue;
        if (!antecedent || cand.width() < antecedent->width()) antecedent = &cand;
      }
    }
    if (antecedent) links.push_back({*antecedent, pron, RuleId::R4_RELATIVE_PRON});
  }
  return links;
}

bool blocking_veto(const Document& doc, Span a, Span b, const Lexicons& lex) {
  if (!same_sentence(doc, a, b)) return false;
  MentionInfo ia = classify(doc, a, lex);
  MentionInfo ib = classify(doc, b, lex);
  // Two different person pronouns in one sentence are never coreferent.
  if (ia.is_pronoun && ib.is_pronoun && ia.pclass != ib.pclass) return true;
  // A nominal never links to a speech-participant pronoun in its sentence.
  auto speech = [](const MentionInfo& m) {
    return m.is_pronoun && (m.person == 1 || m.person == 2);
  };
  if ((!ia.is_pronoun && speech(ib)) || (!ib.is_pronoun && speech(ia))) return true;
  return false;
}

GroupPartition apply_rules(const Document& doc, const std::vector<Span>& mentions,
                           const Lexicons& lex, RuleMask rules,
                           std::vector<RuleLink>* links_out) {
  std::vector<Span> sorted = mentions;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  int n = int(sorted.size());

  UnionFind uf(n);
  std::vector<std::vector<int>> members;
  members.resize(size_t(n));
  for (int i = 0; i < n; ++i) members[size_t(i)] = {i};
  std::vector<RuleLink> accepted;

  std::map<Span, int> index_of;
  for (int i = 0; i < n; ++i) index_of[sorted[size_t(i)]] = i;

  auto try_link = [&](Span sa, Span sb, RuleId rule) {
    int a = index_of.at(sa);
    int b = index_of.at(sb);
    if (a > b) std::swap(a, b);
    int ra = uf.find(a), rb = uf.find(b);
    if (ra == rb) return;
    for (int ma : members[size_t(ra)])
      for (int mb : members[size_t(rb)])
        if (blocking_veto(doc, sorted[size_t(ma)], sorted[size_t(mb)], lex)) return;
    uf.merge(ra, rb);
    int root = uf.find(a);
    int other = root == ra ? rb : ra;
    members[size_t(root)].insert(members[size_t(root)].end(), members[size_t(other)].begin(),
                                 members[size_t(other)].end());
    members[size_t(other)].clear();
    accepted.push_back({sorted[size_t(a)], sorted[size_t(b)], rule});
  };

  if (rules.enabled[1])
    for (const RuleLink& link : rule1_pronoun_links(doc, sorted, lex))
      try_link(link.mention_a, link.mention_b, link.rule_id);

  if (rules.enabled[2])
    for (const RuleLink& link : rule2_string_match(doc, sorted, lex))
      try_link(link.mention_a, link.mention_b, link.rule_id);

  if (rules.enabled[3]) {
    for (int i = 1; i < n; ++i) {
      // Only unresolved mentions seek an antecedent; scan right to left and
      // take the first witness. A vetoed union keeps scanning.
      if (members[size_t(uf.find(i))].size() > 1) continue;
      for (int a = i - 1; a >= 0; --a) {
        if (rule3_word_inclusion(doc, sorted[size_t(i)], {sorted[size_t(a)]}, lex)) {
          try_link(sorted[size_t(a)], sorted[size_t(i)], RuleId::R3_INCLUSION);
          if (uf.connected(a, i)) break;
        }
      }
    }
  }

  if (rules.enabled[4])
    for (const RuleLink& link : rule4_precise_links(doc, sorted, lex))
      try_link(link.mention_a, link.mention_b, link.rule_id);

  GroupPartition out;
  for (const auto& group : uf.groups()) {
    if (group.size() < 2) {
      out.non_linked.push_back(sorted[size_t(group[0])]);
      continue;
    }
    std::vector<Span> spans;
    for (int idx : group) spans.push_back(sorted[size_t(idx)]);
    out.linked.clusters.push_back(std::move(spans));
    out.linked.provenance.push_back(Provenance::Rules);
  }
  out.linked.normalize();
  std::sort(out.non_linked.begin(), out.non_linked.end());
  if (links_out) *links_out = std::move(accepted);
  return out;
}

}  // namespace hrnacc
