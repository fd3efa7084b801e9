#include "xalign/dataset.hpp"

#include <algorithm>
#include <set>

#include "xalign/errors.hpp"
#include "xalign/jsonl.hpp"
#include "xalign/util.hpp"

namespace xalign {

QuestionFormat question_format_from_string(const std::string& s) {
  if (s == "native-jsonl") return QuestionFormat::NativeJsonl;
  throw ConfigError("unknown question format: " + s, {"dataset.format"});
}

std::vector<QuestionBundle> load_question_set(const std::filesystem::path& path,
                                              QuestionFormat format,
                                              const LoadOptions& options) {
  (void)format;  // NativeJsonl is the only format
  std::vector<OJson> rows = read_jsonl(path);

  std::vector<QuestionBundle> bundles;
  std::map<std::string, std::size_t> index_by_id;
  std::size_t record_index = 0;
  for (const auto& row : rows) {
    std::string context = path.filename().string() + " record " + std::to_string(record_index);
    Question q;
    if (row.contains("id") && !row["id"].is_null()) {
      q = question_from_json(row, context);
    } else {
      OJson patched = row;
      char idbuf[16];
      std::snprintf(idbuf, sizeof(idbuf), "%05zu", record_index);
      patched["id"] = options.dataset_name + "-" + idbuf;
      q = question_from_json(patched, context);
    }
    ++record_index;

    auto it = index_by_id.find(q.id);
    if (it == index_by_id.end()) {
      QuestionBundle bundle;
      bundle.id = q.id;
      index_by_id[q.id] = bundles.size();
      bundles.push_back(std::move(bundle));
      it = index_by_id.find(q.id);
    }
    QuestionBundle& bundle = bundles[it->second];
    if (bundle.variants.count(q.language)) {
      throw DuplicateIdError("duplicate record for id " + q.id + " language " + q.language.code);
    }
    bundle.variants.emplace(q.language, std::move(q));
  }

  for (const auto& bundle : bundles) {
    bundle.validate(options.required_languages);
  }
  return bundles;
}

std::vector<QuestionBundle> attach_translations(std::vector<QuestionBundle> bundles,
                                                const std::vector<Question>& translated_variants) {
  std::map<std::string, std::size_t> index_by_id;
  for (std::size_t i = 0; i < bundles.size(); ++i) index_by_id[bundles[i].id] = i;

  for (const Question& variant : translated_variants) {
    auto it = index_by_id.find(variant.id);
    if (it == index_by_id.end()) {
      throw UnknownIdError("translated variant references unknown id " + variant.id);
    }
    QuestionBundle& bundle = bundles[it->second];
    if (bundle.variants.count(variant.language)) {
      throw DuplicateVariantError("bundle " + variant.id + " already has a " +
                                  variant.language.code + " variant");
    }
    bundle.variants.emplace(variant.language, variant);
  }

  for (const auto& bundle : bundles) bundle.validate();
  return bundles;
}

void save_question_set(const std::filesystem::path& path,
                       const std::vector<QuestionBundle>& bundles,
                       const std::vector<LanguageTag>& language_order) {
  std::vector<OJson> rows;
  for (const auto& bundle : bundles) {
    std::set<LanguageTag> emitted;
    for (const auto& lang : language_order) {
      auto it = bundle.variants.find(lang);
      if (it == bundle.variants.end()) continue;
      rows.push_back(question_to_json(it->second));
      emitted.insert(lang);
    }
    for (const auto& [lang, q] : bundle.variants) {
      if (!emitted.count(lang)) rows.push_back(question_to_json(q));
    }
  }
  write_jsonl(path, rows);
}

EvidenceIndex load_evidence(const std::filesystem::path& path) {
  EvidenceIndex index;
  std::vector<OJson> rows = read_jsonl(path);
  std::size_t record_index = 0;
  for (const auto& row : rows) {
    std::string context = path.filename().string() + " record " + std::to_string(record_index++);
    EvidenceBlock block = evidence_from_json(row, context);
    auto key = std::make_pair(block.question_id, block.language);
    if (index.count(key)) {
      throw DuplicateIdError(context + ": duplicate evidence for " + block.question_id + "/" +
                             block.language.code);
    }
    index.emplace(std::move(key), std::move(block));
  }
  return index;
}

}  // namespace xalign
