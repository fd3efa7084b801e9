#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xalign/markers.hpp"
#include "xalign/types.hpp"

namespace xalign {

enum class ParseRule { Marker, FallbackLastMention, None };

std::string_view parse_rule_name(ParseRule rule);

struct ParseOutcome {
  std::optional<std::string> explanation;
  Answer answer;  // nullopt = abstain
  ParseRule rule_fired = ParseRule::None;
};

// Cleans one token: folds full-width forms to ASCII, strips punctuation and
// whitespace, upper-cases a lone roman letter. Yields a label only if what
// remains is a single letter in A..E.
std::optional<Label> normalize_label(std::string_view token);

// Total: never throws on generation content. Marker rule first (last
// occurrence of the language's answer marker, first valid label token after
// it), then last-standalone-label-in-final-sentence fallback, else abstain.
ParseOutcome parse_cot(std::string_view raw, const std::vector<Label>& labels,
                       const LanguageTag& language,
                       const MarkerLexicon& lexicon = MarkerLexicon::builtin());

}  // namespace xalign
