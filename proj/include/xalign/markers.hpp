#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "xalign/types.hpp"

namespace xalign {

// Per-language surface forms for the answer/explanation sections of a CoT
// generation. Answer markers are overridable from a TSV of (language, marker)
// rows; explanation markers and colon style stay built in.
class MarkerLexicon {
 public:
  static const MarkerLexicon& builtin();

  // Rows: <language>\t<marker>. Multiple rows per language accumulate; a
  // language present in the file replaces its built-in answer markers.
  static MarkerLexicon load_tsv(const std::filesystem::path& path);

  const std::vector<std::string>& answer_markers(const LanguageTag& lang) const;
  const std::vector<std::string>& explanation_markers(const LanguageTag& lang) const;
  bool covers(const LanguageTag& lang) const;

  // "Answer: B" / "答案：B"
  std::string answer_line(const LanguageTag& lang, Label label) const;

  // "Explanation: <text>\nAnswer: <label>"; just the answer line when the
  // explanation is empty.
  std::string render_target(const LanguageTag& lang, std::string_view explanation,
                            Label label) const;

  void set_answer_markers(const LanguageTag& lang, std::vector<std::string> markers);

  std::string content_digest() const;

 private:
  const std::string& colon(const LanguageTag& lang) const;

  std::map<std::string, std::vector<std::string>> answer_;
  std::map<std::string, std::vector<std::string>> explanation_;
  std::map<std::string, std::string> colon_;
};

}  // namespace xalign
