#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xalign/dataset.hpp"
#include "xalign/markers.hpp"
#include "xalign/prompt.hpp"
#include "xalign/translator.hpp"
#include "xalign/types.hpp"

namespace xalign {

enum class PairStrategy { CrossProduct, RoundRobin };

PairStrategy pair_strategy_from_string(const std::string& s);
std::string pair_strategy_name(PairStrategy s);

struct PairBuildContext {
  const TemplateStore* templates = &TemplateStore::builtin();
  const MarkerLexicon* lexicon = &MarkerLexicon::builtin();
  PromptMode mode = PromptMode::ZeroShot;
  const EvidenceIndex* evidence = nullptr;
  PairStrategy strategy = PairStrategy::CrossProduct;
  // Bounds data skew toward contentious questions; nullopt = unlimited.
  std::optional<int> cap_per_question = 9;
};

// Pairs every positive with negatives per the strategy. The chosen side is
// the winning explanation translated into the negative's language plus a
// re-rendered answer line; translation is skipped when languages already
// match. Unanimous questions produce no pairs. Translator failures surface
// as TranslationError.
std::vector<PreferencePair> build_pairs(const QuestionBundle& bundle, const VoteResult& vote,
                                        const std::vector<CotSample>& samples,
                                        Translator& translator, const PairBuildContext& context);

// One example per positive sample, in that sample's own language.
std::vector<SftExample> build_sft(const QuestionBundle& bundle, const VoteResult& vote,
                                  const std::vector<CotSample>& samples,
                                  const PairBuildContext& context);

// Keeps exactly the records whose vote winner equals the bundle's ground
// truth; order preserved; idempotent.
std::vector<PreferencePair> filter_by_ground_truth(
    const std::vector<PreferencePair>& records,
    const std::map<std::string, const QuestionBundle*>& bundles);
std::vector<SftExample> filter_by_ground_truth(
    const std::vector<SftExample>& records,
    const std::map<std::string, const QuestionBundle*>& bundles);

struct DatasetManifestEntry {
  std::string path;
  std::size_t count = 0;
  std::string digest;  // sha256 of the emitted bytes
};

// dpo: {"instruction","chosen","rejected"}; a .meta.jsonl sidecar carries
// provenance. Byte-stable given identical inputs.
DatasetManifestEntry emit_dataset(const std::vector<PreferencePair>& records,
                                  const std::filesystem::path& path);
// sft: {"instruction","output"} plus sidecar.
DatasetManifestEntry emit_dataset(const std::vector<SftExample>& records,
                                  const std::filesystem::path& path);

enum class TrainKind { Dpo, Sft };

void emit_train_config_stub(TrainKind kind, const std::filesystem::path& path);

}  // namespace xalign
