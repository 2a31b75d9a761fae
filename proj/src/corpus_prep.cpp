#include "whyqa/corpus_prep.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "whyqa/errors.hpp"
#include "whyqa/rng.hpp"

namespace whyqa {

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words{
      "why", "what", "how", "when", "which", "who", "whom", "whose",
      "did", "does", "do", "was", "were", "is", "are", "am", "be", "been",
      "being", "has", "have", "had", "having", "will", "would", "could",
      "should", "can", "may", "might", "must", "shall",
      "the", "a", "an", "this", "that", "these", "those",
      "patient", "patients", "pt", "pts",
      "he", "she", "it", "they", "them", "him", "his", "her", "hers", "its",
      "their", "theirs", "we", "our", "you", "your", "i", "me", "my",
      "on", "of", "to", "for", "in", "into", "with", "at", "by", "from",
      "as", "about", "after", "before", "during", "over", "under",
      "and", "or", "not", "no", "so", "then", "there", "here",
      "get", "got", "getting", "receive", "received", "receiving",
      "undergo", "underwent", "take", "taking", "taken", "took",
      "put", "placed", "started", "start", "given", "give"};
  return words;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::set<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                             line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    out.insert(line.substr(start));
  }
  return out;
}

std::vector<std::string> key_concepts(std::string_view question,
                                      const std::set<std::string>& stopwords) {
  std::vector<std::string> out;
  for (auto& tok : normalize_tokens(question)) {
    if (stopwords.count(tok)) continue;
    if (std::find(out.begin(), out.end(), tok) != out.end()) continue;
    out.push_back(std::move(tok));
  }
  return out;
}

namespace {

template <typename Pred>
PrepResult<Dataset> keep_qas(const Dataset& in, Pred keep) {
  PrepResult<Dataset> r;
  r.dataset.notes = in.notes;
  r.dataset.provenance = in.provenance;
  for (const auto& qa : in.qas)
    if (keep(qa)) r.dataset.qas.push_back(qa);
  r.stats.qas_in = in.qas.size();
  r.stats.qas_out = r.dataset.qas.size();
  r.stats.notes_in = in.notes.size();
  r.stats.notes_out = r.dataset.notes.size();
  return r;
}

}  // namespace

PrepResult<Dataset> filter_why(const Dataset& dataset, const std::string& token) {
  auto r = keep_qas(dataset, [&](const QAPair& qa) {
    const auto toks = normalize_tokens(qa.question);
    return std::find(toks.begin(), toks.end(), token) != toks.end();
  });
  std::unordered_set<std::string> referenced;
  for (const auto& qa : r.dataset.qas) referenced.insert(qa.note_id);
  std::erase_if(r.dataset.notes, [&](const Note& n) {
    return !referenced.count(n.note_id);
  });
  r.stats.notes_out = r.dataset.notes.size();
  return r;
}

PrepResult<Dataset> drop_subset(const Dataset& dataset,
                                const std::string& source_tag) {
  auto r = keep_qas(dataset, [&](const QAPair& qa) {
    return !(qa.source_tag && *qa.source_tag == source_tag);
  });
  if (r.stats.qas_out == r.stats.qas_in)
    r.stats.warnings.push_back("source_tag \"" + source_tag +
                               "\" not found; 0 QAs removed");
  return r;
}

PrepResult<Dataset> retain_single_answer(const Dataset& dataset) {
  return keep_qas(dataset, [](const QAPair& qa) {
    return !qa.answerable || qa.answers.size() == 1;
  });
}

Dataset merge(const std::vector<Dataset>& datasets) {
  Dataset out;
  std::unordered_map<std::string, std::size_t> note_index;
  std::unordered_map<std::string, std::size_t> qa_index;
  std::vector<std::string> provenance;

  for (const auto& d : datasets) {
    if (!d.provenance.empty()) provenance.push_back(d.provenance);
    for (const auto& n : d.notes) {
      auto [it, fresh] = note_index.emplace(n.note_id, out.notes.size());
      if (fresh) {
        out.notes.push_back(n);
      } else if (out.notes[it->second].note_text != n.note_text) {
        throw MergeError("note_id \"" + n.note_id +
                         "\" appears with different note_text");
      }
    }
    for (const auto& qa : d.qas) {
      auto it = qa_index.find(qa.qa_id);
      if (it == qa_index.end()) {
        qa_index.emplace(qa.qa_id, out.qas.size());
        out.qas.push_back(qa);
        continue;
      }
      if (out.qas[it->second] == qa) continue;
      QAPair renamed = qa;
      for (int k = 2;; ++k) {
        renamed.qa_id = qa.qa_id + "#" + std::to_string(k);
        if (!qa_index.count(renamed.qa_id)) break;
      }
      qa_index.emplace(renamed.qa_id, out.qas.size());
      out.qas.push_back(std::move(renamed));
    }
  }
  for (std::size_t i = 0; i < provenance.size(); ++i)
    out.provenance += (i ? " | " : "") + provenance[i];
  return out;
}

SynthesisResult synthesize_unanswerable(const Dataset& dataset,
                                        const SynthesisSpec& spec) {
  if (spec.target_count == 0)
    throw InvalidArgument("synthesis target_count must be at least 1");

  std::vector<TokenBag> note_bags;
  note_bags.reserve(dataset.notes.size());
  for (const auto& n : dataset.notes)
    note_bags.push_back(normalize_answer(n.note_text));

  std::set<std::pair<std::string, std::string>> taken;  // (note_id, question)
  for (const auto& qa : dataset.qas) taken.emplace(qa.note_id, qa.question);

  struct Pairing {
    std::size_t qa;
    std::size_t note;
  };
  std::vector<Pairing> eligible;
  for (std::size_t qi = 0; qi < dataset.qas.size(); ++qi) {
    const QAPair& qa = dataset.qas[qi];
    const AnswerSpan* gold = qa.answerable ? qa.gold() : nullptr;
    if (!gold) continue;
    const auto keys = key_concepts(qa.question, spec.stopwords);
    if (keys.empty()) continue;
    const auto gold_tokens = normalize_tokens(gold->text);
    for (std::size_t ni = 0; ni < dataset.notes.size(); ++ni) {
      const Note& note = dataset.notes[ni];
      if (note.note_id == qa.note_id) continue;
      const TokenBag& bag = note_bags[ni];
      auto present = [&](const std::string& t) { return bag.contains(t); };
      if (std::any_of(keys.begin(), keys.end(), present)) continue;
      if (std::any_of(gold_tokens.begin(), gold_tokens.end(), present)) continue;
      if (!taken.emplace(note.note_id, qa.question).second) continue;
      eligible.push_back({qi, ni});
    }
  }

  SynthesisResult r;
  r.dataset = dataset;
  r.eligible_pairings = eligible.size();
  SeededRng rng(spec.seed);
  rng.shuffle(eligible);
  const std::size_t n = std::min(spec.target_count, eligible.size());
  r.shortfall = spec.target_count - n;

  std::unordered_set<std::string> ids;
  for (const auto& qa : dataset.qas) ids.insert(qa.qa_id);
  std::size_t counter = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const QAPair& src = dataset.qas[eligible[k].qa];
    std::string id;
    do {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%06zu", ++counter);
      id = std::string(kSynthPrefix) + buf;
    } while (ids.count(id));
    ids.insert(id);
    QAPair qa;
    qa.qa_id = id;
    qa.note_id = dataset.notes[eligible[k].note].note_id;
    qa.question = src.question;
    qa.answerable = false;
    qa.source_tag = std::string(kSynthSourceTag);
    r.new_qa_ids.push_back(id);
    r.dataset.qas.push_back(std::move(qa));
  }
  return r;
}

SplitResult split_by_note(const Dataset& dataset, const SplitSpec& spec) {
  if (spec.n_train_notes == 0 || spec.n_dev_notes == 0 ||
      spec.n_test_notes == 0)
    throw SizingError("split note counts must be positive");
  const std::size_t wanted =
      spec.n_train_notes + spec.n_dev_notes + spec.n_test_notes;
  if (wanted > dataset.notes.size())
    throw SizingError("split requests " + std::to_string(wanted) +
                      " notes but the dataset has " +
                      std::to_string(dataset.notes.size()));

  std::vector<std::size_t> order(dataset.notes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SeededRng rng(spec.seed);
  rng.shuffle(order);

  // 0 = train, 1 = dev, 2 = test, 3 = unselected
  std::unordered_map<std::string, int> part;
  for (std::size_t k = 0; k < order.size(); ++k) {
    int p = 3;
    if (k < spec.n_train_notes)
      p = 0;
    else if (k < spec.n_train_notes + spec.n_dev_notes)
      p = 1;
    else if (k < wanted)
      p = 2;
    part[dataset.notes[order[k]].note_id] = p;
  }

  SplitResult r;
  Dataset* out[3] = {&r.train, &r.dev, &r.test};
  for (Dataset* d : out) d->provenance = dataset.provenance;
  for (const auto& n : dataset.notes)
    if (int p = part[n.note_id]; p < 3) out[p]->notes.push_back(n);
  for (const auto& qa : dataset.qas) {
    auto it = part.find(qa.note_id);
    if (it != part.end() && it->second < 3) out[it->second]->qas.push_back(qa);
  }
  return r;
}

}  // namespace whyqa
