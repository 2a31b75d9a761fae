#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "whyqa/corpus_prep.hpp"
#include "whyqa/errors.hpp"

using namespace whyqa;

namespace {

QAPair qa(const std::string& id, const std::string& note, const std::string& q,
          std::optional<std::string> tag = std::nullopt) {
  return {id, note, q, false, {}, std::move(tag)};
}

Dataset ten_notes(std::size_t qas_per_note = 2) {
  Dataset d;
  for (int i = 0; i < 10; ++i) {
    const std::string nid = "n" + std::to_string(i);
    d.notes.push_back({nid, "note text " + std::to_string(i)});
    for (std::size_t k = 0; k < qas_per_note + (i % 3); ++k)
      d.qas.push_back(qa(nid + "-q" + std::to_string(k), nid,
                         "Why " + std::to_string(k) + "?"));
  }
  return d;
}

std::set<std::string> ids(const Dataset& d) {
  std::set<std::string> s;
  for (auto& n : d.notes) s.insert(n.note_id);
  return s;
}

}  // namespace

TEST_CASE("key_concepts drops frame words") {
  auto k = key_concepts("Why was the patient on Lasix?", default_stopwords());
  CHECK(k == std::vector<std::string>{"lasix"});
  k = key_concepts("Why was dobutamine stress test rescheduled, dobutamine?", default_stopwords());
  CHECK(k == std::vector<std::string>{"dobutamine", "stress", "test", "rescheduled"});
}

TEST_CASE("filter_why") {
  Dataset d;
  d.notes = {{"n1", "a"}, {"n2", "b"}};
  d.qas = {qa("1", "n1", "Why was the patient on Lasix?"),
           qa("2", "n1", "What is the dosage?"),
           qa("3", "n2", "Explain whys of therapy"),
           qa("4", "n1", "And WHY?")};
  auto r = filter_why(d);
  REQUIRE(r.dataset.qas.size() == 2);
  CHECK(r.dataset.qas[0].qa_id == "1");
  CHECK(r.dataset.qas[1].qa_id == "4");
  CHECK(r.dataset.notes.size() == 1);
  CHECK(r.stats.qas_in == 4);
  CHECK(r.stats.qas_out == 2);
  CHECK(r.stats.notes_out == 1);
}

TEST_CASE("drop_subset") {
  Dataset d = ten_notes(1);
  d.qas.resize(10);
  for (int i = 0; i < 3; ++i) d.qas[i * 3].source_tag = "heart-disease-risk";
  auto r = drop_subset(d, "heart-disease-risk");
  CHECK(r.dataset.qas.size() == 7);
  CHECK(r.dataset.notes == d.notes);
  CHECK(r.stats.warnings.empty());

  auto same = drop_subset(d, "absent-tag");
  CHECK(same.dataset == d);
  CHECK(same.stats.warnings.size() == 1);

  for (auto& q : d.qas) q.source_tag = "x";
  CHECK(drop_subset(d, "x").dataset.qas.empty());
}

TEST_CASE("retain_single_answer") {
  Dataset d;
  d.notes = {{"n1", "chest pain and fever"}};
  QAPair two{"a", "n1", "Why?", true, {{"chest pain", 0}, {"fever", 15}}, {}};
  QAPair one{"b", "n1", "Why 2?", true, {{"fever", 15}}, {}};
  QAPair none{"c", "n1", "Why 3?", false, {}, {}};
  d.qas = {two, one, none};
  auto r = retain_single_answer(d);
  REQUIRE(r.dataset.qas.size() == 2);
  CHECK(r.dataset.qas[0].qa_id == "b");
  CHECK(r.dataset.qas[1].qa_id == "c");
}

TEST_CASE("merge") {
  Dataset a = ten_notes(1);
  a.qas.resize(10);
  a.provenance = "A";
  CHECK(merge({a, Dataset{}}).qas == a.qas);
  CHECK(merge({a, Dataset{}}).notes == a.notes);

  Dataset b;
  b.provenance = "B";
  b.notes = {{"m1", "other"}};
  for (int i = 0; i < 5; ++i) b.qas.push_back(qa("b" + std::to_string(i), "m1", "Why " + std::to_string(i) + "?"));
  Dataset m = merge({a, b});
  CHECK(m.qas.size() == 15);
  CHECK(m.notes.size() == 11);
  CHECK(m.provenance == "A | B");

  Dataset c;
  c.notes = {{"n1", "conflicting text"}};
  CHECK_THROWS_AS(merge({a, c}), MergeError);
  try {
    merge({a, c});
  } catch (const MergeError& e) {
    CHECK(std::string(e.what()).find("n1") != std::string::npos);
  }

  // identical QA dropped, different QA with the same id renamed
  Dataset d2;
  d2.notes = {a.notes[0]};
  d2.qas = {a.qas[0], qa(a.qas[0].qa_id, "n0", "Why else?")};
  Dataset m2 = merge({a, d2});
  CHECK(m2.qas.size() == 11);
  CHECK(m2.qas.back().qa_id == a.qas[0].qa_id + "#2");
  CHECK(validate(m2).ok());
}

namespace {

Dataset three_notes() {
  Dataset d;
  d.notes = {{"n1", "Dobutamine stress test rescheduled due to hypotension."},
             {"n2", "Lasix started for volume overload. Patient stable."},
             {"n3", "Coumadin held because of epistaxis; hypotension resolved."}};
  d.qas = {{"q1", "n1", "Why was the dobutamine stress test rescheduled?", true, {{"hypotension", 42}}, {}},
           {"q2", "n2", "Why was Lasix started?", true, {{"volume overload", 18}}, {}},
           {"q3", "n3", "Why was Coumadin held?", true, {{"epistaxis", 25}}, {}}};
  return d;
}

// Every (question, foreign note) pairing checked against both conditions,
// minus pairings the corpus already holds.
std::set<std::pair<std::string, std::string>> brute_pairings(const Dataset& d) {
  std::set<std::pair<std::string, std::string>> out, existing;
  for (auto& q : d.qas) existing.insert({q.note_id, q.question});
  for (auto& q : d.qas) {
    if (!q.answerable) continue;
    std::vector<std::string> keys;
    for (auto& t : oracle::tokens(q.question))
      if (!default_stopwords().count(t)) keys.push_back(t);
    if (keys.empty()) continue;
    for (auto& n : d.notes) {
      if (n.note_id == q.note_id) continue;
      auto nt = oracle::tokens(n.note_text);
      auto in_note = [&](const std::string& t) {
        return std::find(nt.begin(), nt.end(), t) != nt.end();
      };
      bool ok = true;
      for (auto& k : keys) ok = ok && !in_note(k);
      for (auto& g : oracle::tokens(q.answers[0].text)) ok = ok && !in_note(g);
      if (ok && !existing.count({n.note_id, q.question}))
        out.insert({n.note_id, q.question});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("synthesis on a 3-note corpus matches the pairing oracle") {
  Dataset d = three_notes();
  REQUIRE(validate(d).ok());
  auto expect = brute_pairings(d);
  // q1's gold "hypotension" appears in n3; q3's keys and gold are absent from
  // n1 and n2; q2 pairs with n1 and n3.
  CHECK(expect == std::set<std::pair<std::string, std::string>>{
                      {"n1", "Why was Coumadin held?"},
                      {"n2", "Why was Coumadin held?"},
                      {"n1", "Why was Lasix started?"},
                      {"n3", "Why was Lasix started?"},
                      {"n2", "Why was the dobutamine stress test rescheduled?"}});

  auto r = synthesize_unanswerable(d, {100, 4, default_stopwords()});
  CHECK(r.eligible_pairings == expect.size());
  CHECK(r.shortfall == 100 - expect.size());
  REQUIRE(r.new_qa_ids.size() == expect.size());
  std::set<std::pair<std::string, std::string>> got;
  for (auto& id : r.new_qa_ids) {
    const QAPair* q = r.dataset.find_qa(id);
    REQUIRE(q);
    CHECK_FALSE(q->answerable);
    CHECK(q->answers.empty());
    CHECK(q->source_tag == std::optional<std::string>("synth-noans"));
    CHECK(id.rfind("synth-noans-", 0) == 0);
    got.insert({q->note_id, q->question});
  }
  CHECK(got == expect);
  CHECK(validate(r.dataset).ok());
}

TEST_CASE("synthesis subsets, shortfall and determinism") {
  Dataset d = three_notes();
  auto a = synthesize_unanswerable(d, {2, 9, default_stopwords()});
  auto b = synthesize_unanswerable(d, {2, 9, default_stopwords()});
  CHECK(a.dataset == b.dataset);
  CHECK(a.new_qa_ids.size() == 2);
  CHECK(a.shortfall == 0);
  CHECK(a.dataset.qas.size() == 5);

  Dataset one;
  one.notes = {d.notes[0]};
  one.qas = {d.qas[0]};
  auto r = synthesize_unanswerable(one, {5, 1, default_stopwords()});
  CHECK(r.new_qa_ids.empty());
  CHECK(r.shortfall == 5);

  CHECK_THROWS_AS(synthesize_unanswerable(d, {0, 1, default_stopwords()}), InvalidArgument);
}

TEST_CASE("synthesized QA never pairs with a note holding its keys or gold") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> vocab = {"lasix", "overload", "fever", "sepsis", "pain",
                                          "coumadin", "bleed", "rash", "stroke", "heparin"};
  for (int trial = 0; trial < 50; ++trial) {
    Dataset d;
    const int nn = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < nn; ++i) {
      std::string text = "Note";
      for (int w = 0; w < 4; ++w) text += " " + vocab[rng() % vocab.size()];
      d.notes.push_back({"n" + std::to_string(i), text});
      const std::string gold = text.substr(text.rfind(' ') + 1);
      const auto off = static_cast<std::int64_t>(text.rfind(' ') + 1);
      d.qas.push_back({"q" + std::to_string(i), d.notes.back().note_id,
                       "Why was " + vocab[rng() % vocab.size()] + " given?", true,
                       {{gold, off}}, {}});
    }
    auto r = synthesize_unanswerable(d, {1000, trial, default_stopwords()});
    CHECK(r.new_qa_ids.size() == brute_pairings(d).size());
    CHECK(validate(r.dataset).ok());
  }
}

TEST_CASE("split_by_note") {
  Dataset d = ten_notes();
  auto s = split_by_note(d, {5, 2, 3, 7});
  CHECK(s.train.notes.size() == 5);
  CHECK(s.dev.notes.size() == 2);
  CHECK(s.test.notes.size() == 3);
  std::set<std::string> all;
  for (auto* p : {&s.train, &s.dev, &s.test})
    for (auto& n : p->notes) CHECK(all.insert(n.note_id).second);
  CHECK(all == ids(d));
  CHECK(s.train.qas.size() + s.dev.qas.size() + s.test.qas.size() == d.qas.size());
  for (auto* p : {&s.train, &s.dev, &s.test}) {
    CHECK(validate(*p).ok());
    for (auto& q : p->qas) CHECK(p->find_note(q.note_id));
  }

  auto again = split_by_note(d, {5, 2, 3, 7});
  CHECK(again.train == s.train);
  CHECK(again.dev == s.dev);
  CHECK(again.test == s.test);
  auto other = split_by_note(d, {5, 2, 3, 8});
  CHECK((other.train.notes != s.train.notes || other.dev.notes != s.dev.notes));
}

TEST_CASE("split leaves unselected notes out and keeps input order") {
  Dataset d = ten_notes();
  auto s = split_by_note(d, {2, 2, 2, 1});
  std::size_t selected = 0;
  for (auto* p : {&s.train, &s.dev, &s.test}) {
    for (auto& n : p->notes)
      for (auto& q : d.qas) selected += q.note_id == n.note_id;
    // partition keeps the relative input order of its QAs
    for (std::size_t i = 1; i < p->qas.size(); ++i) {
      auto pos = [&](const std::string& id) {
        return std::find_if(d.qas.begin(), d.qas.end(), [&](auto& q) { return q.qa_id == id; }) - d.qas.begin();
      };
      CHECK(pos(p->qas[i - 1].qa_id) < pos(p->qas[i].qa_id));
    }
  }
  CHECK(s.train.qas.size() + s.dev.qas.size() + s.test.qas.size() == selected);
}

TEST_CASE("split sizing errors") {
  Dataset d = ten_notes();
  CHECK_THROWS_AS(split_by_note(d, {0, 2, 3, 1}), SizingError);
  CHECK_THROWS_AS(split_by_note(d, {5, 3, 3, 1}), SizingError);
  CHECK_NOTHROW(split_by_note(d, {5, 2, 3, 1}));
}

TEST_CASE("split of a split partition is stable in size") {
  Dataset d = ten_notes();
  auto s = split_by_note(d, {6, 2, 2, 3});
  auto s2 = split_by_note(s.train, {3, 2, 1, 3});
  CHECK(s2.train.qas.size() + s2.dev.qas.size() + s2.test.qas.size() == s.train.qas.size());
}
