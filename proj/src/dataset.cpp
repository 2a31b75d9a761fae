#include "whyqa/dataset.hpp"

#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "whyqa/errors.hpp"
#include "whyqa/utf8.hpp"

namespace whyqa {

const Note* Dataset::find_note(std::string_view note_id) const {
  for (const auto& n : notes)
    if (n.note_id == note_id) return &n;
  return nullptr;
}

const QAPair* Dataset::find_qa(std::string_view qa_id) const {
  for (const auto& q : qas)
    if (q.qa_id == qa_id) return &q;
  return nullptr;
}

std::size_t Dataset::answerable_count() const {
  std::size_t n = 0;
  for (const auto& q : qas)
    if (q.answerable) ++n;
  return n;
}

std::string resolve_span(std::string_view note_text, const AnswerSpan& span) {
  if (span.begin_offset < 0)
    throw SpanError("negative begin_offset " +
                    std::to_string(span.begin_offset));
  const std::size_t len = utf8::length(span.text);
  auto out = utf8::substr(note_text, static_cast<std::size_t>(span.begin_offset),
                          len);
  if (!out)
    throw SpanError("span [" + std::to_string(span.begin_offset) + ", +" +
                    std::to_string(len) + ") exceeds note length " +
                    std::to_string(utf8::length(note_text)));
  return *out;
}

ValidationReport validate(const Dataset& dataset) {
  ValidationReport report;
  auto add = [&](std::string qa_id, std::string note_id, std::string rule,
                 std::string detail) {
    report.violations.push_back({std::move(qa_id), std::move(note_id),
                                 std::move(rule), std::move(detail)});
  };

  std::unordered_map<std::string, const Note*> notes;
  for (const auto& n : dataset.notes) {
    if (n.note_id.empty()) add("", n.note_id, "note_id_empty", "note_id is empty");
    if (n.note_text.empty())
      add("", n.note_id, "note_text_empty", "note_text is empty");
    if (!notes.emplace(n.note_id, &n).second)
      add("", n.note_id, "note_id_duplicate",
          "note_id appears more than once");
  }

  std::unordered_set<std::string> qa_ids;
  std::set<std::tuple<std::string, std::string, std::int64_t>> triples;
  for (const auto& qa : dataset.qas) {
    if (qa.qa_id.empty()) add(qa.qa_id, qa.note_id, "qa_id_empty", "qa_id is empty");
    if (!qa_ids.insert(qa.qa_id).second)
      add(qa.qa_id, qa.note_id, "qa_id_duplicate",
          "qa_id appears more than once");

    if (qa.answerable && qa.answers.empty())
      add(qa.qa_id, qa.note_id, "answerable_without_answer",
          "answerable is true but answers is empty");
    if (!qa.answerable && !qa.answers.empty())
      add(qa.qa_id, qa.note_id, "unanswerable_with_answer",
          "answerable is false but answers is non-empty");

    const std::int64_t key_offset =
        qa.answers.empty() ? -1 : qa.answers.front().begin_offset;
    if (!triples.emplace(qa.note_id, qa.question, key_offset).second)
      add(qa.qa_id, qa.note_id, "duplicate_triple",
          "another QA has the same (note_id, question, begin_offset)");

    auto it = notes.find(qa.note_id);
    if (it == notes.end()) {
      add(qa.qa_id, qa.note_id, "note_missing",
          "note_id does not resolve to a note");
      continue;
    }
    for (std::size_t k = 0; k < qa.answers.size(); ++k) {
      const AnswerSpan& span = qa.answers[k];
      const std::string which = "answers[" + std::to_string(k) + "]";
      std::string got;
      try {
        got = resolve_span(it->second->note_text, span);
      } catch (const SpanError& e) {
        add(qa.qa_id, qa.note_id, "span_out_of_bounds", which + ": " + e.what());
        continue;
      }
      if (got != span.text)
        add(qa.qa_id, qa.note_id, "span_text_mismatch",
            which + ": note text at offset " +
                std::to_string(span.begin_offset) + " is \"" + got +
                "\", expected \"" + span.text + "\"");
    }
  }
  return report;
}

Dataset dataset_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("dataset: top level must be an object");
  Dataset d;
  const Json& notes = require_field(j, "notes", "dataset");
  const Json& qas = require_field(j, "qas", "dataset");
  if (!notes.is_array()) throw FormatError("dataset.notes: expected an array");
  if (!qas.is_array()) throw FormatError("dataset.qas: expected an array");

  d.notes.reserve(notes.size());
  for (std::size_t i = 0; i < notes.size(); ++i) {
    const std::string where = "notes[" + std::to_string(i) + "]";
    d.notes.push_back({require_string(notes[i], "note_id", where),
                       require_string(notes[i], "note_text", where)});
  }

  d.qas.reserve(qas.size());
  for (std::size_t i = 0; i < qas.size(); ++i) {
    const Json& q = qas[i];
    const std::string where = "qas[" + std::to_string(i) + "]";
    QAPair qa;
    qa.qa_id = require_string(q, "qa_id", where);
    qa.note_id = require_string(q, "note_id", where);
    qa.question = require_string(q, "question", where);
    qa.answerable = require_bool(q, "answerable", where);
    const Json& answers = require_field(q, "answers", where);
    if (!answers.is_array())
      throw FormatError(where + ".answers: expected an array");
    for (std::size_t k = 0; k < answers.size(); ++k) {
      const std::string aw = where + ".answers[" + std::to_string(k) + "]";
      AnswerSpan span;
      span.text = require_string(answers[k], "text", aw);
      const Json& off = require_field(answers[k], "begin_offset", aw);
      if (!off.is_number_integer())
        throw FormatError(aw + ".begin_offset: expected an integer");
      span.begin_offset = off.get<std::int64_t>();
      qa.answers.push_back(std::move(span));
    }
    if (auto it = q.find("source_tag"); it != q.end() && !it->is_null()) {
      if (!it->is_string())
        throw FormatError(where + ".source_tag: expected a string");
      qa.source_tag = it->get<std::string>();
    }
    d.qas.push_back(std::move(qa));
  }

  if (auto it = j.find("provenance"); it != j.end() && !it->is_null()) {
    if (!it->is_string())
      throw FormatError("dataset.provenance: expected a string");
    d.provenance = it->get<std::string>();
  }
  return d;
}

Json dataset_to_json(const Dataset& dataset) {
  Json notes = Json::array();
  for (const auto& n : dataset.notes)
    notes.push_back({{"note_id", n.note_id}, {"note_text", n.note_text}});
  Json qas = Json::array();
  for (const auto& qa : dataset.qas) {
    Json answers = Json::array();
    for (const auto& a : qa.answers)
      answers.push_back({{"text", a.text}, {"begin_offset", a.begin_offset}});
    Json q = {{"qa_id", qa.qa_id},
              {"note_id", qa.note_id},
              {"question", qa.question},
              {"answerable", qa.answerable},
              {"answers", std::move(answers)}};
    if (qa.source_tag) q["source_tag"] = *qa.source_tag;
    qas.push_back(std::move(q));
  }
  Json j = {{"notes", std::move(notes)}, {"qas", std::move(qas)}};
  if (!dataset.provenance.empty()) j["provenance"] = dataset.provenance;
  return j;
}

Dataset load_dataset(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  try {
    return dataset_from_json(j);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  write_text_file(path, dump_json(dataset_to_json(dataset)));
}

Json validation_report_to_json(const ValidationReport& report) {
  Json list = Json::array();
  for (const auto& v : report.violations)
    list.push_back({{"qa_id", v.qa_id},
                    {"note_id", v.note_id},
                    {"rule", v.rule},
                    {"detail", v.detail}});
  return {{"ok", report.ok()},
          {"violation_count", report.violations.size()},
          {"violations", std::move(list)}};
}

ExperimentTag experiment_tag_from_json(const Json& j) {
  ExperimentTag tag;
  const Json& lineage = require_field(j, "model_lineage", "experiment");
  if (!lineage.is_array())
    throw FormatError("experiment.model_lineage: expected an array");
  for (const auto& stage : lineage) {
    if (!stage.is_string())
      throw FormatError("experiment.model_lineage: expected strings");
    tag.model_lineage.push_back(stage.get<std::string>());
  }
  if (tag.model_lineage.empty())
    throw InvalidArgument("experiment.model_lineage must be non-empty");
  const Json& epochs = require_field(j, "epochs", "experiment");
  if (!epochs.is_number_integer())
    throw FormatError("experiment.epochs: expected an integer");
  tag.epochs = epochs.get<int>();
  if (auto it = j.find("hyperparameters"); it != j.end()) {
    if (!it->is_object())
      throw FormatError("experiment.hyperparameters: expected an object");
    for (const auto& [k, v] : it->items()) tag.hyperparameters[k] = v;
  }
  return tag;
}

Json experiment_tag_to_json(const ExperimentTag& tag) {
  Json hp = Json::object();
  for (const auto& [k, v] : tag.hyperparameters) hp[k] = v;
  return {{"model_lineage", tag.model_lineage},
          {"epochs", tag.epochs},
          {"hyperparameters", std::move(hp)}};
}

}  // namespace whyqa
