#pragma once

#include <map>
#include <string>
#include <vector>

#include "xalign/dataset.hpp"
#include "xalign/gateway.hpp"
#include "xalign/jsonl.hpp"
#include "xalign/markers.hpp"
#include "xalign/prompt.hpp"
#include "xalign/types.hpp"

namespace xalign {

using PredictionMap = std::map<std::string, Answer>;          // question id -> answer
using PredictionTable = std::map<LanguageTag, PredictionMap>;  // language -> predictions
using GoldMap = std::map<std::string, Label>;

// Fraction of ids answered correctly; an abstention never matches.
double accuracy(const PredictionMap& preds, const GoldMap& gold);

// M over one language subset: fraction of ids on which every subset language
// gives the same non-abstaining answer. Abstentions disagree with everything,
// including each other.
double subset_consistency(const PredictionTable& preds, const std::vector<LanguageTag>& subset);

// Mean of subset_consistency over all C(L, s) size-s subsets.
double consistency_s(const PredictionTable& preds, int s);

// Harmonic mean of accuracy and consistency; 0 when both are 0.
double ac3(double acc, double cons);

// Percentage of positive samples per language; shares sum to 100 up to
// rounding. EmptyCorpusError when there are no positives at all.
std::map<LanguageTag, double> language_share(const std::vector<VoteResult>& votes);

MetricsReport compute_report(const PredictionTable& preds, const GoldMap& gold,
                             const std::vector<LanguageTag>& language_order);

struct EvalOptions {
  std::vector<LanguageTag> languages;
  PromptMode mode = PromptMode::ZeroShot;
  DecodeParams decode;  // n_paths is forced to 1: evaluation scores single responses
  const EvidenceIndex* evidence = nullptr;
  int workers = 4;
};

struct EvalOutcome {
  MetricsReport report;
  PredictionTable predictions;
};

// Renders, completes one path, parses, and scores every (bundle, language).
// Deterministic under a warm cache. Every bundle must carry ground truth.
EvalOutcome run_eval(const std::vector<QuestionBundle>& bundles, Gateway& gateway,
                     const TemplateStore& templates, const MarkerLexicon& lexicon,
                     const EvalOptions& options);

OJson report_to_json(const MetricsReport& report, const std::vector<LanguageTag>& language_order);
std::string report_to_markdown(const MetricsReport& report,
                               const std::vector<LanguageTag>& language_order);
OJson language_share_to_json(const std::map<LanguageTag, double>& shares, int total_positives);

}  // namespace xalign
