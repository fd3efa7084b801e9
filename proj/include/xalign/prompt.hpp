#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xalign/markers.hpp"
#include "xalign/types.hpp"

namespace xalign {

enum class PromptMode { ZeroShot, WithEvidence };

std::string prompt_mode_name(PromptMode mode);
PromptMode prompt_mode_from_string(const std::string& s);

struct PromptTemplate {
  LanguageTag language;
  PromptMode mode = PromptMode::ZeroShot;
  std::string text;  // placeholders: {stem} {options} {evidence}
};

class TemplateStore {
 public:
  // Compiled-in copies of the files under templates/.
  static const TemplateStore& builtin();

  // Loads templates/<language>/<zero-shot|with-evidence>.txt for every
  // language subdirectory present.
  static TemplateStore load_dir(const std::filesystem::path& dir);

  void add(PromptTemplate tpl);
  bool has(const LanguageTag& lang, PromptMode mode) const;
  const PromptTemplate& get(const LanguageTag& lang, PromptMode mode) const;

  // Digest over every template's text; manifests use it to detect drift.
  std::string content_digest() const;

  // Every template must carry that language's explanation and answer markers
  // so generations can be parsed back.
  void validate_against(const MarkerLexicon& lexicon) const;

 private:
  std::map<std::pair<std::string, PromptMode>, PromptTemplate> templates_;
};

// Deterministic render: evidence passages (joined in order), stem, and one
// "<label>. <text>" line per option. Evidence must be present and language-
// matched in WithEvidence mode.
std::string render_prompt(const Question& question, PromptMode mode,
                          const EvidenceBlock* evidence = nullptr,
                          const TemplateStore& store = TemplateStore::builtin());

}  // namespace xalign
