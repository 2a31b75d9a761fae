#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "whyqa/errors.hpp"
#include "whyqa/thresholding.hpp"

using namespace whyqa;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Prediction pred(const std::string& id, const std::string& text, double span,
                double null) {
  Prediction p{id, text, span, null, {}};
  p.nbest = {{text, span}};
  return p;
}

struct Fixture {
  Dataset d;
  PredictionMap preds;
};

// 5 QAs with hand-set scores: margins -2, -1, 0.5, 1, 3.
Fixture five() {
  Fixture f;
  f.d.notes = {{"n1", "x"}};
  f.d.qas = {{"a", "n1", "Why?", true, {{"fever", 0}}, {}},
             {"b", "n1", "Why?", true, {{"chest pain", 0}}, {}},
             {"c", "n1", "Why?", false, {}, {}},
             {"d", "n1", "Why?", true, {{"sepsis", 0}}, {}},
             {"e", "n1", "Why?", false, {}, {}}};
  f.preds["a"] = pred("a", "fever", 5, 3);        // right, margin -2
  f.preds["b"] = pred("b", "pain", 4, 3);         // partial, margin -1
  f.preds["c"] = pred("c", "rash", 2, 2.5);       // should refrain, margin 0.5
  f.preds["d"] = pred("d", "sepsis", 1, 2);       // right, margin 1
  f.preds["e"] = pred("e", "stroke", 0, 3);       // should refrain, margin 3
  return f;
}

Fixture random_set(std::mt19937_64& rng, std::size_t max_n) {
  static const std::vector<std::string> golds = {"fever", "chest pain", "sepsis",
                                                 "volume overload", "rash"};
  Fixture f;
  f.d.notes = {{"n1", "x"}};
  const std::size_t n = 1 + rng() % max_n;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "q" + std::to_string(1000 + rng() % 9000) + "-" + std::to_string(i);
    const bool ans = rng() % 4 != 0;
    QAPair q{id, "n1", "Why?", ans, {}, {}};
    if (ans) q.answers = {{golds[rng() % golds.size()], 0}};
    f.d.qas.push_back(q);
    std::string text;
    switch (rng() % 4) {
      case 0: text = ans ? q.answers[0].text : "fever"; break;
      case 1: text = golds[rng() % golds.size()]; break;
      case 2: text = "chest"; break;
      default: text = "unrelated words"; break;
    }
    // coarse scores so that margins and span scores collide often
    const double span = static_cast<double>(rng() % 6) * 0.5;
    const double null = static_cast<double>(rng() % 6) * 0.5;
    f.preds[id] = pred(id, text, span, null);
  }
  return f;
}

}  // namespace

TEST_CASE("apply_null_threshold") {
  PredictionMap m{{"q", pred("q", "hypotension", 1, 5)}};
  CHECK(apply_null_threshold(m, 3).at("q") == "");
  CHECK(apply_null_threshold(m, 4).at("q") == "hypotension");
  CHECK(apply_null_threshold(m, kInf).at("q") == "hypotension");
  CHECK(apply_null_threshold(m, -kInf).at("q") == "");
}

TEST_CASE("candidate taus") {
  auto f = five();
  auto t = candidate_taus(f.d, f.preds);
  REQUIRE(t.size() == 6);
  CHECK(t.front() == -kInf);
  CHECK(t[1] == -1.5);
  CHECK(t[2] == -0.25);
  CHECK(t[3] == 0.75);
  CHECK(t[4] == 2.0);
  CHECK(t.back() == kInf);
  CHECK(t == oracle::taus(f.d, f.preds));
}

TEST_CASE("tune: all answerable and correct admits every answer") {
  Fixture f;
  f.d.notes = {{"n1", "x"}};
  for (int i = 0; i < 4; ++i) {
    const std::string id = "q" + std::to_string(i);
    f.d.qas.push_back({id, "n1", "Why?", true, {{"fever", 0}}, {}});
    f.preds[id] = pred(id, "fever", 1, 1.0 + i);
  }
  auto r = tune_threshold(f.d, f.preds);
  CHECK(r.dev_accuracy == 1.0);
  CHECK(r.tau == kInf);
  CHECK(apply_null_threshold(f.preds, r.tau).at("q3") == "fever");
}

TEST_CASE("tune: 5-item set equals the exhaustive sweep") {
  auto f = five();
  for (bool partial : {false, true}) {
    auto r = tune_threshold(f.d, f.preds, partial ? MetricMode::kPartial : MetricMode::kExact);
    auto o = oracle::exhaustive_tune(f.d, f.preds, partial);
    CHECK(r.tau == o.tau);
    CHECK(r.dev_accuracy == o.accuracy);
  }
  // by hand: tau 0.75 (refrain c, d, e) and tau 2 (refrain e) both get 3/5;
  // the larger wins
  auto r = tune_threshold(f.d, f.preds);
  CHECK(r.tau == 2.0);
  CHECK(r.dev_accuracy == 0.6);
}

TEST_CASE("tune: accuracy equals evaluate at the chosen tau") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    auto f = random_set(rng, 40);
    for (auto mode : {MetricMode::kExact, MetricMode::kPartial}) {
      auto r = tune_threshold(f.d, f.preds, mode);
      auto rep = evaluate(f.d, apply_null_threshold(f.preds, r.tau)).report;
      CHECK(r.dev_accuracy == (mode == MetricMode::kExact ? rep.full.exact() : rep.full.partial()));
      auto o = oracle::exhaustive_tune(f.d, f.preds, mode == MetricMode::kPartial);
      CHECK(r.tau == o.tau);
      CHECK(r.dev_accuracy == o.accuracy);
    }
  }
}

TEST_CASE("tune: deterministic and errors") {
  auto f = five();
  auto a = tune_threshold(f.d, f.preds);
  auto b = tune_threshold(f.d, f.preds);
  CHECK(a.tau == b.tau);
  CHECK(a.dev_accuracy == b.dev_accuracy);
  CHECK_THROWS_AS(tune_threshold(Dataset{}, f.preds), InvalidArgument);
  f.preds.erase("c");
  CHECK_THROWS_AS(tune_threshold(f.d, f.preds), InvalidArgument);
}

TEST_CASE("pr_curve: perfect predictions") {
  Fixture f;
  f.d.notes = {{"n1", "x"}};
  for (int i = 0; i < 3; ++i) {
    const std::string id = "q" + std::to_string(i);
    f.d.qas.push_back({id, "n1", "Why?", true, {{"fever", 0}}, {}});
    f.preds[id] = pred(id, "fever", 3.0 - i, 0);
  }
  auto c = pr_curve(f.d, f.preds, 0);
  REQUIRE(c.points.size() == 3);
  for (auto& p : c.points) CHECK(p.precision == 1.0);
  CHECK(c.points.back().recall == 1.0);
  CHECK(c.recall_upper_bound == 1.0);
}

TEST_CASE("pr_curve: refraining bounds recall") {
  Fixture f;
  f.d.notes = {{"n1", "x"}};
  for (int i = 0; i < 10; ++i) {
    const std::string id = "q" + std::to_string(i);
    f.d.qas.push_back({id, "n1", "Why?", true, {{"fever", 0}}, {}});
    // two of ten refrain at tau 0
    f.preds[id] = pred(id, "fever", 1 + i, i < 2 ? 100 : 0);
  }
  auto c = pr_curve(f.d, f.preds, 0);
  CHECK(c.refrained_has_ans == 2);
  CHECK(c.recall_upper_bound == 0.8);
  for (auto& p : c.points) CHECK(p.recall <= 0.8);
  CHECK(c.points.back().recall == 0.8);
}

TEST_CASE("pr_curve: 8-QA set matches the brute-force recomputation") {
  Fixture f;
  f.d.notes = {{"n1", "x"}};
  const std::vector<std::tuple<std::string, bool, std::string, double, double>> rows = {
      {"a", true, "fever", 0.9, 0.1},  {"b", true, "rash", 0.9, 0.2},
      {"c", false, "", 0.5, 0.9},      {"d", false, "sepsis", 0.7, 0.1},
      {"e", true, "", 0.3, 0.3},       {"f", true, "fever", 0.2, 0.9},
      {"g", true, "fever", 0.6, 0.1},  {"h", true, "fever high", 0.6, 0.5}};
  for (auto& [id, ans, text, span, null] : rows) {
    QAPair q{id, "n1", "Why?", ans, {}, {}};
    if (ans) q.answers = {{"fever", 0}};
    f.d.qas.push_back(q);
    f.preds[id] = pred(id, text, span, null);
  }
  for (bool partial : {false, true}) {
    auto c = pr_curve(f.d, f.preds, 0, partial ? MetricMode::kPartial : MetricMode::kExact);
    auto o = oracle::pr_points(f.d, f.preds, 0, partial);
    REQUIRE(c.points.size() == o.size());
    for (std::size_t i = 0; i < o.size(); ++i) {
      CHECK(c.points[i].cutoff == o[i].cutoff);
      CHECK(c.points[i].n_answered == o[i].n_answered);
      CHECK(c.points[i].precision == doctest::Approx(o[i].precision).epsilon(1e-12));
      CHECK(c.points[i].recall == doctest::Approx(o[i].recall).epsilon(1e-12));
    }
    // e (empty best) and f (margin 0.7) are the refrained HasAns
    CHECK(c.has_ans_count == 6);
    CHECK(c.refrained_has_ans == 2);
  }
  // exact mode by hand: cutoffs 0.9, 0.7, 0.6
  auto c = pr_curve(f.d, f.preds, 0);
  REQUIRE(c.points.size() == 3);
  CHECK(c.points[0].precision == 0.5);
  CHECK(c.points[1].n_answered == 3);
  CHECK(c.points[2].recall == 2.0 / 6.0);
}

TEST_CASE("pr_curve: errors") {
  auto f = five();
  Dataset only_no;
  only_no.notes = f.d.notes;
  only_no.qas = {f.d.qas[2]};
  CHECK_THROWS_AS(pr_curve(only_no, f.preds, 0), InvalidArgument);
  f.preds.erase("a");
  CHECK_THROWS_AS(pr_curve(f.d, f.preds, 0), InvalidArgument);
}

TEST_CASE("pr_curve csv") {
  auto f = five();
  auto csv = pr_curve_to_csv(pr_curve(f.d, f.preds, 1));
  CHECK(csv.rfind("cutoff,precision,recall,n_answered\n", 0) == 0);
  CHECK(csv.find("\n5,1,") != std::string::npos);
}

TEST_CASE("rescue_rank") {
  QAPair q{"q", "n1", "Why?", true, {{"decreased urine output", 0}}, {}};
  PredictionMap m;
  m["q"] = Prediction{"q", "diuresis", 2, 1, {{"diuresis", 2}, {"low urine output", 1}}};
  CHECK(rescue_rank(m, q) == std::optional<std::size_t>(2));
  m["q"].nbest = {{"urine output", 2}, {"diuresis", 1}};
  CHECK(rescue_rank(m, q) == std::optional<std::size_t>(1));
  m["q"].nbest = {{"diuresis", 2}, {"", 1}};
  CHECK_FALSE(rescue_rank(m, q).has_value());
  QAPair u{"u", "n1", "Why?", false, {}, {}};
  CHECK_FALSE(rescue_rank(m, u).has_value());
}

TEST_CASE("prediction json and checks") {
  PredictionMap m{{"q", pred("q", "fever", 2, 1)}};
  m["q"].nbest.push_back({"rash", 1});
  CHECK(check_prediction(m["q"]).empty());
  auto back = predictions_from_json(predictions_to_json(m));
  CHECK(back.at("q").nbest == m.at("q").nbest);
  CHECK(back.at("q").qa_id == "q");

  Prediction bad = pred("q", "fever", 2, 1);
  bad.nbest = {{"rash", 1}, {"fever", 2}};
  CHECK_FALSE(check_prediction(bad).empty());

  std::vector<Candidate> c = {{"b", 1}, {"a", 1}, {"z", 3}};
  order_nbest(c, 2);
  CHECK(c == std::vector<Candidate>{{"z", 3}, {"a", 1}});
}

TEST_CASE("tau parsing") {
  CHECK(parse_tau("inf") == kInf);
  CHECK(parse_tau("-inf") == -kInf);
  CHECK(parse_tau("+1.5") == 1.5);
  CHECK_THROWS_AS(parse_tau("abc"), InvalidArgument);
  CHECK_THROWS_AS(parse_tau("nan"), InvalidArgument);
  CHECK(tau_to_json(kInf) == "inf");
  CHECK(tau_from_json(tau_to_json(-kInf)) == -kInf);
  CHECK(tau_from_json(tau_to_json(0.25)) == 0.25);
}
