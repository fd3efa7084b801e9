#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "xalign/types.hpp"

namespace xalign {

enum class QuestionFormat { NativeJsonl };

QuestionFormat question_format_from_string(const std::string& s);

struct LoadOptions {
  // Prefix for synthesized ids when a record has none: <name>-<index>.
  std::string dataset_name = "dataset";
  // When non-empty, every bundle must carry exactly this variant set.
  std::vector<LanguageTag> required_languages;
};

// Reads one Question record per line and groups them into bundles by id,
// preserving first-appearance order.
std::vector<QuestionBundle> load_question_set(const std::filesystem::path& path,
                                              QuestionFormat format = QuestionFormat::NativeJsonl,
                                              const LoadOptions& options = {});

// Merges translated variants into existing bundles and revalidates them.
std::vector<QuestionBundle> attach_translations(std::vector<QuestionBundle> bundles,
                                                const std::vector<Question>& translated_variants);

// One record per variant, bundles in order, variants in language_order (any
// extra variant languages follow in code order).
void save_question_set(const std::filesystem::path& path,
                       const std::vector<QuestionBundle>& bundles,
                       const std::vector<LanguageTag>& language_order);

using EvidenceIndex = std::map<std::pair<std::string, LanguageTag>, EvidenceBlock>;

EvidenceIndex load_evidence(const std::filesystem::path& path);

}  // namespace xalign
