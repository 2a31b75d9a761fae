#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "whyqa/corpus_prep.hpp"
#include "whyqa/dataset.hpp"
#include "whyqa/thresholding.hpp"

namespace whyqa {

enum class CueDirection { kReasonFollows, kReasonPrecedes };

struct Cue {
  std::string phrase;  // lowercase
  CueDirection direction = CueDirection::kReasonFollows;
};

struct CueLexicon {
  std::vector<Cue> cues;
};

const CueLexicon& default_lexicon();

// "phrase<TAB>direction" per line, direction one of follows / precedes
// (also accepted: reason-follows-cue / reason-precedes-cue). Blank lines and
// '#' comments skipped. Throws FormatError on a malformed line and
// InvalidArgument when the lexicon is empty or a phrase is not lowercase.
CueLexicon load_lexicon(const std::filesystem::path& path);

struct BaselineOptions {
  std::set<std::string> stopwords = default_stopwords();
  std::size_t nbest = kDefaultNBest;
  std::size_t max_span_tokens = 8;
};

// Cue-phrase reference predictor.
//  1. Split the note into sentences at '.' and newlines.
//  2. Score each sentence by how many of the question's key-concept tokens
//     (those also present in the note) it contains.
//  3. In the top-scoring sentences, look for cue phrases; the candidate is up
//     to max_span_tokens words on the cue's reason side, cut at clause
//     punctuation. A top sentence with a positive score and no cue yields
//     the whole sentence as a candidate.
//  4. span_score = sentence score + 1 for cue candidates;
//     null_score = 1 + number of key-concept tokens absent from the note.
//  5. nbest sorted by score then text; with no candidate,
//     nbest = [("", null_score)].
// Candidate texts are exact substrings of the note. qa_id is left empty.
Prediction predict(const Note& note, std::string_view question,
                   const CueLexicon& lexicon,
                   const BaselineOptions& options = {});

// Throws InvalidArgument when a QA references a missing note.
PredictionMap predict_dataset(const Dataset& dataset, const CueLexicon& lexicon,
                              const BaselineOptions& options = {});

}  // namespace whyqa
