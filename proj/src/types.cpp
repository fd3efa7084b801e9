#include "xalign/types.hpp"

#include <algorithm>
#include <charconv>

#include "xalign/errors.hpp"

namespace xalign {

LanguageTag LanguageTag::parse(std::string_view s) {
  if (s.size() != 2 || s[0] < 'a' || s[0] > 'z' || s[1] < 'a' || s[1] > 'z') {
    throw SchemaError("bad language tag: '" + std::string(s) +
                      "' (expected two lowercase ASCII letters)");
  }
  return LanguageTag(std::string(s));
}

std::vector<Label> Question::label_set() const {
  std::vector<Label> labels;
  labels.reserve(options.size());
  for (const auto& o : options) labels.push_back(o.label);
  return labels;
}

void Question::validate() const {
  if (id.empty()) throw SchemaError("question with empty id");
  const std::string where = "question " + id + " (" + language.code + ")";
  if (stem.empty()) throw SchemaError(where + ": empty stem");
  if (options.empty()) throw SchemaError(where + ": no options");
  if (options.size() > std::size_t(kMaxLabel - kMinLabel + 1)) {
    throw SchemaError(where + ": more than " +
                      std::to_string(kMaxLabel - kMinLabel + 1) + " options");
  }
  for (std::size_t i = 0; i < options.size(); ++i) {
    const auto& o = options[i];
    if (o.label != Label(kMinLabel + i)) {
      throw SchemaError(where + ": option labels must be contiguous from 'A', got '" +
                        std::string(1, o.label) + "' at position " + std::to_string(i));
    }
    if (o.text.empty()) {
      throw SchemaError(where + ": empty text for option " + std::string(1, o.label));
    }
  }
  if (ground_truth) {
    Label gt = *ground_truth;
    auto labels = label_set();
    if (std::find(labels.begin(), labels.end(), gt) == labels.end()) {
      throw SchemaError(where + ": ground_truth '" + std::string(1, gt) +
                        "' is not an option label");
    }
  }
}

const Question& QuestionBundle::variant(const LanguageTag& lang) const {
  auto it = variants.find(lang);
  if (it == variants.end()) {
    throw LanguageMismatchError("bundle " + id + " has no variant for language " + lang.code);
  }
  return it->second;
}

std::optional<Label> QuestionBundle::ground_truth() const {
  if (variants.empty()) return std::nullopt;
  return variants.begin()->second.ground_truth;
}

void QuestionBundle::validate(const std::vector<LanguageTag>& required_languages) const {
  if (variants.empty()) throw SchemaError("bundle " + id + " has no variants");
  const Question* first = nullptr;
  for (const auto& [lang, q] : variants) {
    q.validate();
    if (q.id != id) {
      throw SchemaError("bundle " + id + ": variant " + lang.code + " carries id " + q.id);
    }
    if (q.language != lang) {
      throw SchemaError("bundle " + id + ": variant keyed " + lang.code +
                        " declares language " + q.language.code);
    }
    if (!first) {
      first = &q;
      continue;
    }
    if (q.options.size() != first->options.size()) {
      throw SchemaError("bundle " + id + ": option count differs between " +
                        first->language.code + " and " + lang.code);
    }
    if (q.ground_truth != first->ground_truth) {
      throw SchemaError("bundle " + id + ": ground_truth differs between " +
                        first->language.code + " and " + lang.code);
    }
  }
  if (!required_languages.empty()) {
    bool mismatch = variants.size() != required_languages.size();
    if (!mismatch) {
      for (const auto& lang : required_languages) {
        if (!variants.count(lang)) {
          mismatch = true;
          break;
        }
      }
    }
    if (mismatch) {
      std::string have;
      for (const auto& [lang, _] : variants) {
        if (!have.empty()) have += ",";
        have += lang.code;
      }
      throw LanguageMismatchError("bundle " + id + ": variant languages {" + have +
                                  "} do not match the configured language set");
    }
  }
}

SampleRef SampleRef::parse(std::string_view s) {
  auto colon = s.find(':');
  if (colon == std::string_view::npos) throw SchemaError("bad sample ref: " + std::string(s));
  LanguageTag lang = LanguageTag::parse(s.substr(0, colon));
  int path = 0;
  auto rest = s.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), path);
  if (ec != std::errc{} || ptr != rest.data() + rest.size() || path < 0) {
    throw SchemaError("bad sample ref: " + std::string(s));
  }
  return SampleRef{std::move(lang), path};
}

int VoteResult::margin() const {
  if (!winner) return 0;
  int best = counts.at(*winner);
  int runner_up = 0;
  for (const auto& [label, n] : counts) {
    if (label != *winner) runner_up = std::max(runner_up, n);
  }
  return best - runner_up;
}

}  // namespace xalign
