#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "whyqa/dataset.hpp"
#include "whyqa/metrics.hpp"

namespace whyqa {

// Interrogative frame and function words removed from a question before the
// remaining tokens are treated as its key concepts.
const std::set<std::string>& default_stopwords();

// Reads one lowercase token per line; blank lines and '#' comments skipped.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

// Normalized question tokens minus the stopword list, deduplicated, in
// first-occurrence order.
std::vector<std::string> key_concepts(std::string_view question,
                                      const std::set<std::string>& stopwords);

// Row counts reported by every filter-style operation.
struct PrepStats {
  std::size_t qas_in = 0;
  std::size_t qas_out = 0;
  std::size_t notes_in = 0;
  std::size_t notes_out = 0;
  std::vector<std::string> warnings;
};

template <typename T>
struct PrepResult {
  T dataset;
  PrepStats stats;
};

// Keeps QAs whose normalized question contains the token `token` (default
// "why"). Notes no longer referenced by a kept QA are dropped.
PrepResult<Dataset> filter_why(const Dataset& dataset,
                               const std::string& token = "why");

// Removes QAs whose source_tag equals `source_tag`. Notes are untouched.
PrepResult<Dataset> drop_subset(const Dataset& dataset,
                                const std::string& source_tag);

// Drops answerable QAs with two or more answers.
PrepResult<Dataset> retain_single_answer(const Dataset& dataset);

// Union in argument order. Notes with equal id and text are deduplicated;
// equal id with different text throws MergeError. A QA equal in every field
// to an already-merged one is dropped; any other qa_id collision is renamed
// to "<id>#2", "<id>#3", ... (first free suffix).
Dataset merge(const std::vector<Dataset>& datasets);

struct SynthesisSpec {
  std::size_t target_count = 1;
  std::uint64_t seed = 0;
  std::set<std::string> stopwords = default_stopwords();
};

struct SynthesisResult {
  Dataset dataset;                // input QAs followed by synthesized ones
  std::vector<std::string> new_qa_ids;
  std::size_t eligible_pairings = 0;
  std::size_t shortfall = 0;      // target_count - synthesized, if positive
};

inline constexpr std::string_view kSynthPrefix = "synth-noans-";
inline constexpr std::string_view kSynthSourceTag = "synth-noans";

// Re-pairs answerable questions with foreign notes that contain none of the
// question's key-concept tokens and none of its gold-answer tokens. Eligible
// pairings are enumerated in (QA order, note order), deduplicated on
// (note_id, question), shuffled with the seed, and the first target_count
// kept. Throws InvalidArgument when target_count is 0.
SynthesisResult synthesize_unanswerable(const Dataset& dataset,
                                        const SynthesisSpec& spec);

struct SplitSpec {
  std::size_t n_train_notes = 0;
  std::size_t n_dev_notes = 0;
  std::size_t n_test_notes = 0;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset train;
  Dataset dev;
  Dataset test;
};

// Shuffles note order with the seed and assigns train first, dev second,
// test last. QAs follow their notes; notes and QAs keep input order inside
// each partition. Throws SizingError on a zero count or when the counts
// exceed the number of notes.
SplitResult split_by_note(const Dataset& dataset, const SplitSpec& spec);

}  // namespace whyqa
