#include "whyqa/baseline.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "whyqa/errors.hpp"
#include "whyqa/utf8.hpp"

namespace whyqa {

const CueLexicon& default_lexicon() {
  using D = CueDirection;
  static const CueLexicon lexicon{{
      {"due to", D::kReasonFollows},
      {"because of", D::kReasonFollows},
      {"because", D::kReasonFollows},
      {"secondary to", D::kReasonFollows},
      {"in setting of", D::kReasonFollows},
      {"as a result of", D::kReasonFollows},
      {"owing to", D::kReasonFollows},
      {"caused by", D::kReasonFollows},
      {"to treat", D::kReasonFollows},
      {"given", D::kReasonFollows},
      {"for", D::kReasonFollows},
      {"led to", D::kReasonPrecedes},
      {"leading to", D::kReasonPrecedes},
      {"resulted in", D::kReasonPrecedes},
  }};
  return lexicon;
}

CueLexicon load_lexicon(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  CueLexicon lex;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#')
      continue;
    const auto tab = line.find('\t');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (tab == std::string::npos)
      throw FormatError(where + ": expected \"phrase<TAB>direction\"");
    Cue cue;
    cue.phrase = line.substr(0, tab);
    const std::string dir = line.substr(tab + 1);
    if (dir == "follows" || dir == "reason-follows-cue")
      cue.direction = CueDirection::kReasonFollows;
    else if (dir == "precedes" || dir == "reason-precedes-cue")
      cue.direction = CueDirection::kReasonPrecedes;
    else
      throw FormatError(where + ": unknown direction \"" + dir + "\"");
    if (std::any_of(cue.phrase.begin(), cue.phrase.end(),
                    [](char c) { return c >= 'A' && c <= 'Z'; }))
      throw InvalidArgument(where + ": cue phrase must be lowercase");
    if (cue.phrase.empty()) throw FormatError(where + ": empty cue phrase");
    lex.cues.push_back(std::move(cue));
  }
  if (lex.cues.empty())
    throw InvalidArgument(path.string() + ": cue lexicon is empty");
  return lex;
}

namespace {

using Range = std::pair<std::size_t, std::size_t>;  // code points, [first, second)

bool is_ws(char32_t c) {
  return c == ' ' || (c >= '\t' && c <= '\r') || c == 0xA0;
}

bool is_clause_punct(char32_t c) {
  switch (c) {
    case ',': case ';': case ':': case '(': case ')': case '[': case ']':
    case '!': case '?': case '"':
      return true;
    default:
      return false;
  }
}

bool is_ascii_punct(char32_t c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) ||
         (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

struct Word {
  Range range;
  std::string token;  // normalized form; empty for articles / bare punctuation
};

struct Sentence {
  Range range;
  std::vector<Word> words;
  std::set<std::string> tokens;
};

std::vector<Sentence> split_sentences(const std::u32string& text) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size() && text[i] != '.' && text[i] != '\n') continue;
    Sentence s;
    std::size_t k = start;
    while (k < i) {
      while (k < i && is_ws(text[k])) ++k;
      const std::size_t b = k;
      while (k < i && !is_ws(text[k])) ++k;
      if (k > b) {
        const std::string raw = utf8::encode(text.substr(b, k - b));
        const auto toks = normalize_tokens(raw);
        s.words.push_back({{b, k}, toks.empty() ? "" : toks.front()});
        for (const auto& t : toks) s.tokens.insert(t);
      }
    }
    if (!s.words.empty()) {
      s.range = {s.words.front().range.first, s.words.back().range.second};
      out.push_back(std::move(s));
    }
    start = i + 1;
  }
  return out;
}

// Shrinks [b, e) past whitespace and ASCII punctuation at both ends.
Range trim(const std::u32string& text, Range r) {
  auto junk = [](char32_t c) { return is_ws(c) || is_ascii_punct(c); };
  while (r.first < r.second && junk(text[r.first])) ++r.first;
  while (r.second > r.first && junk(text[r.second - 1])) --r.second;
  return r;
}

std::optional<Range> reason_after(const std::u32string& text,
                                  const std::vector<Word>& words,
                                  std::size_t next, std::size_t max_words) {
  std::optional<Range> span;
  std::size_t taken = 0;
  for (std::size_t w = next; w < words.size() && taken < max_words; ++w) {
    auto [b, e] = words[w].range;
    std::size_t cut = e;
    for (std::size_t k = b; k < e; ++k)
      if (is_clause_punct(text[k])) {
        cut = k;
        break;
      }
    if (cut > b) {
      span = span ? Range{span->first, cut} : Range{b, cut};
      ++taken;
    }
    if (cut < e) break;
  }
  if (!span) return std::nullopt;
  return trim(text, *span);
}

std::optional<Range> reason_before(const std::u32string& text,
                                   const std::vector<Word>& words,
                                   std::size_t cue_first,
                                   std::size_t max_words) {
  std::optional<Range> span;
  std::size_t taken = 0;
  for (std::size_t w = cue_first; w-- > 0 && taken < max_words;) {
    auto [b, e] = words[w].range;
    std::size_t cut = b;
    for (std::size_t k = e; k-- > b;)
      if (is_clause_punct(text[k])) {
        cut = k + 1;
        break;
      }
    if (cut < e) {
      span = span ? Range{cut, span->second} : Range{cut, e};
      ++taken;
    }
    if (cut > b) break;
  }
  if (!span) return std::nullopt;
  return trim(text, *span);
}

}  // namespace

Prediction predict(const Note& note, std::string_view question,
                   const CueLexicon& lexicon, const BaselineOptions& options) {
  const std::u32string text = utf8::decode(note.note_text);
  const TokenBag note_bag = normalize_answer(note.note_text);
  const auto keys = key_concepts(question, options.stopwords);

  std::vector<std::string> present;
  std::size_t absent = 0;
  for (const auto& k : keys) {
    if (note_bag.contains(k))
      present.push_back(k);
    else
      ++absent;
  }

  const std::vector<Sentence> sentences = split_sentences(text);
  std::vector<std::size_t> overlap(sentences.size(), 0);
  std::size_t top = 0;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (const auto& k : present)
      if (sentences[s].tokens.count(k)) ++overlap[s];
    top = std::max(top, overlap[s]);
  }

  // Cue phrases as normalized token sequences.
  std::vector<std::pair<std::vector<std::string>, CueDirection>> cues;
  for (const auto& c : lexicon.cues) {
    auto toks = normalize_tokens(c.phrase);
    if (!toks.empty()) cues.emplace_back(std::move(toks), c.direction);
  }

  std::map<std::string, double> candidates;
  auto add = [&](Range r, double score) {
    if (r.first >= r.second) return;
    std::string s = utf8::encode(std::u32string_view(text).substr(
        r.first, r.second - r.first));
    if (normalize_tokens(s).empty()) return;
    auto [it, fresh] = candidates.emplace(std::move(s), score);
    if (!fresh) it->second = std::max(it->second, score);
  };

  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (overlap[s] != top) continue;
    const auto& words = sentences[s].words;
    // Indices of words that carry a normalized token, for phrase matching.
    std::vector<std::size_t> content;
    for (std::size_t w = 0; w < words.size(); ++w)
      if (!words[w].token.empty()) content.push_back(w);

    bool cue_found = false;
    for (const auto& [phrase, dir] : cues) {
      for (std::size_t i = 0; i + phrase.size() <= content.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < phrase.size() && match; ++k)
          match = words[content[i + k]].token == phrase[k];
        if (!match) continue;
        const std::size_t first = content[i];
        const std::size_t last = content[i + phrase.size() - 1];
        auto span = dir == CueDirection::kReasonFollows
                        ? reason_after(text, words, last + 1,
                                       options.max_span_tokens)
                        : reason_before(text, words, first,
                                        options.max_span_tokens);
        if (span) {
          cue_found = true;
          add(*span, static_cast<double>(overlap[s]) + 1.0);
        }
      }
    }
    if (!cue_found && overlap[s] > 0)
      add(trim(text, sentences[s].range), static_cast<double>(overlap[s]));
  }

  Prediction p;
  p.null_score = 1.0 + static_cast<double>(absent);
  for (auto& [t, sc] : candidates) p.nbest.push_back({t, sc});
  order_nbest(p.nbest, options.nbest);
  if (p.nbest.empty()) p.nbest.push_back({"", p.null_score});
  p.best_text = p.nbest.front().text;
  p.span_score = p.nbest.front().score;
  return p;
}

PredictionMap predict_dataset(const Dataset& dataset, const CueLexicon& lexicon,
                              const BaselineOptions& options) {
  std::unordered_map<std::string, const Note*> notes;
  for (const auto& n : dataset.notes) notes.emplace(n.note_id, &n);
  PredictionMap out;
  for (const auto& qa : dataset.qas) {
    auto it = notes.find(qa.note_id);
    const Note* note = it == notes.end() ? nullptr : it->second;
    if (!note)
      throw InvalidArgument("qa " + qa.qa_id + " references missing note " +
                            qa.note_id);
    Prediction p = predict(*note, qa.question, lexicon, options);
    p.qa_id = qa.qa_id;
    out.emplace(qa.qa_id, std::move(p));
  }
  return out;
}

}  // namespace whyqa
