#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xalign {

// Option letter, 'A'..'E'. The alphabet is fixed; datasets with more options
// are rejected at load time.
using Label = char;

inline constexpr Label kMinLabel = 'A';
inline constexpr Label kMaxLabel = 'E';

inline bool is_valid_label(char c) { return c >= kMinLabel && c <= kMaxLabel; }

// A parsed answer; nullopt means the sample abstained (no label could be
// extracted from the generation).
using Answer = std::optional<Label>;

// Lowercase two-letter language code ("en", "zh", ...). Comparison is exact
// byte equality.
struct LanguageTag {
  std::string code;

  LanguageTag() = default;
  explicit LanguageTag(std::string c) : code(std::move(c)) {}

  // Throws SchemaError unless the tag is exactly two lowercase ASCII letters.
  static LanguageTag parse(std::string_view s);

  auto operator<=>(const LanguageTag&) const = default;
};

struct Option {
  Label label = 'A';
  std::string text;

  bool operator==(const Option&) const = default;
};

// native, or translated-from(source).
struct Provenance {
  std::optional<LanguageTag> translated_from;

  bool native() const { return !translated_from.has_value(); }
  static Provenance native_origin() { return {}; }
  static Provenance translated(LanguageTag src) { return {std::move(src)}; }

  bool operator==(const Provenance&) const = default;
};

struct Question {
  std::string id;
  LanguageTag language;
  std::string stem;
  std::vector<Option> options;
  std::optional<Label> ground_truth;
  Provenance provenance;

  std::vector<Label> label_set() const;

  // Enforces: labels unique and contiguous from 'A' (within A..E), non-empty
  // stem and option texts, ground_truth within the label set.
  void validate() const;

  bool operator==(const Question&) const = default;
};

// One question's parallel variants across languages.
struct QuestionBundle {
  std::string id;
  std::map<LanguageTag, Question> variants;

  const Question& variant(const LanguageTag& lang) const;
  bool has_variant(const LanguageTag& lang) const { return variants.count(lang) > 0; }
  std::optional<Label> ground_truth() const;

  // Cross-variant consistency: shared id, option count, label set, and
  // ground truth. If `required_languages` is non-empty the variant set must
  // equal it exactly (LanguageMismatchError otherwise).
  void validate(const std::vector<LanguageTag>& required_languages = {}) const;

  bool operator==(const QuestionBundle&) const = default;
};

struct DecodeSnapshot {
  double temperature = 1.0;
  double top_p = 0.9;
  int max_new_tokens = 512;

  bool operator==(const DecodeSnapshot&) const = default;
};

// One decoded reasoning path for one (question, language).
struct CotSample {
  std::string question_id;
  LanguageTag language;
  int path_index = 0;
  std::string raw;
  std::optional<std::string> explanation;
  Answer answer;  // nullopt = abstain
  DecodeSnapshot decode;

  bool operator==(const CotSample&) const = default;
};

// Identifies a sample within one question's pool.
struct SampleRef {
  LanguageTag language;
  int path_index = 0;

  auto operator<=>(const SampleRef&) const = default;

  std::string str() const { return language.code + ":" + std::to_string(path_index); }
  static SampleRef parse(std::string_view s);
};

struct VoteResult {
  std::string question_id;
  std::map<Label, int> counts;
  std::optional<Label> winner;
  bool tie = false;
  std::vector<SampleRef> positives;  // sorted by (language, path_index)
  std::vector<SampleRef> negatives;  // sorted by (language, path_index)
  int abstain_count = 0;

  // Winner count minus runner-up count (winner count when unopposed).
  int margin() const;

  bool operator==(const VoteResult&) const = default;
};

struct PreferencePair {
  std::string question_id;
  LanguageTag record_language;  // the rejected sample's language
  std::string prompt;
  std::string chosen;
  std::string rejected;

  struct Meta {
    LanguageTag chosen_source_language;
    SampleRef chosen_ref;
    SampleRef rejected_ref;
    Label winner_label = 'A';
    Label rejected_label = 'A';
    int vote_margin = 0;

    bool operator==(const Meta&) const = default;
  } meta;

  bool operator==(const PreferencePair&) const = default;
};

struct SftExample {
  std::string question_id;
  LanguageTag language;
  SampleRef source_ref;
  std::string prompt;
  std::string target;
  Label winner_label = 'A';

  bool operator==(const SftExample&) const = default;
};

struct EvidenceBlock {
  std::string question_id;
  LanguageTag language;
  std::vector<std::string> passages;

  bool operator==(const EvidenceBlock&) const = default;
};

struct MetricsReport {
  int n_questions = 0;
  std::map<LanguageTag, double> per_language_accuracy;
  double acc_avg = 0.0;
  std::map<int, double> consistency;  // subset size s -> Consistency_s
  std::map<int, double> ac3;          // subset size s -> AC3_s
  std::map<LanguageTag, int> abstain_counts;
};

}  // namespace xalign
