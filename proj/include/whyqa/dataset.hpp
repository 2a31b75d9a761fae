#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "whyqa/json_io.hpp"

namespace whyqa {

struct Note {
  std::string note_id;
  std::string note_text;

  bool operator==(const Note&) const = default;
};

// begin_offset counts Unicode code points into the note text. It is signed so
// that a negative offset read from a broken file survives until validate()
// can report it.
struct AnswerSpan {
  std::string text;
  std::int64_t begin_offset = 0;

  bool operator==(const AnswerSpan&) const = default;
};

struct QAPair {
  std::string qa_id;
  std::string note_id;
  std::string question;
  bool answerable = false;
  // Kept as a list so raw multi-answer inputs stay representable until
  // retain_single_answer runs.
  std::vector<AnswerSpan> answers;
  std::optional<std::string> source_tag;

  // First answer, or nullptr for unanswerable QAs.
  const AnswerSpan* gold() const {
    return answers.empty() ? nullptr : &answers.front();
  }

  bool operator==(const QAPair&) const = default;
};

struct Dataset {
  std::vector<Note> notes;
  std::vector<QAPair> qas;
  std::string provenance;

  const Note* find_note(std::string_view note_id) const;
  const QAPair* find_qa(std::string_view qa_id) const;

  std::size_t answerable_count() const;

  bool operator==(const Dataset&) const = default;
};

// Training-lineage metadata. Never drives computation.
struct ExperimentTag {
  std::vector<std::string> model_lineage;
  int epochs = 0;
  std::map<std::string, Json> hyperparameters;
};

struct Violation {
  std::string qa_id;    // empty for note-level violations
  std::string note_id;
  std::string rule;     // stable machine-readable name
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

// Collect-all check of every dataset invariant. Never throws on bad data.
ValidationReport validate(const Dataset& dataset);

// Substring of note_text addressed by the span's offset and the code-point
// length of span.text. Throws SpanError when out of bounds. The returned text
// may differ from span.text; validate() reports that case.
std::string resolve_span(std::string_view note_text, const AnswerSpan& span);

Dataset dataset_from_json(const Json& j);
Json dataset_to_json(const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

Json validation_report_to_json(const ValidationReport& report);

// Throws InvalidArgument when the lineage is empty.
ExperimentTag experiment_tag_from_json(const Json& j);
Json experiment_tag_to_json(const ExperimentTag& tag);

}  // namespace whyqa
