#include "xalign/markers.hpp"

#include <fstream>
#include <sstream>

#include "xalign/errors.hpp"
#include "xalign/util.hpp"

namespace xalign {

namespace {

const std::string kAsciiColon = ": ";
const std::string kFullwidthColon = "：";

MarkerLexicon make_builtin() {
  MarkerLexicon lex;
  lex.set_answer_markers(LanguageTag("en"), {"Answer"});
  lex.set_answer_markers(LanguageTag("zh"), {"答案"});
  lex.set_answer_markers(LanguageTag("fr"), {"Réponse"});
  lex.set_answer_markers(LanguageTag("de"), {"Antwort"});
  lex.set_answer_markers(LanguageTag("it"), {"Risposta"});
  lex.set_answer_markers(LanguageTag("ja"), {"答え"});
  return lex;
}

}  // namespace

const MarkerLexicon& MarkerLexicon::builtin() {
  static const MarkerLexicon lex = make_builtin();
  return lex;
}

void MarkerLexicon::set_answer_markers(const LanguageTag& lang, std::vector<std::string> markers) {
  answer_[lang.code] = std::move(markers);
  if (!explanation_.count(lang.code)) {
    static const std::map<std::string, std::vector<std::string>> kExplanation = {
        {"en", {"Explanation"}}, {"zh", {"解释"}},        {"fr", {"Explication"}},
        {"de", {"Erklärung"}},   {"it", {"Spiegazione"}}, {"ja", {"説明"}},
    };
    auto it = kExplanation.find(lang.code);
    if (it != kExplanation.end()) explanation_[lang.code] = it->second;
  }
  if (!colon_.count(lang.code)) {
    colon_[lang.code] = (lang.code == "zh" || lang.code == "ja") ? kFullwidthColon : kAsciiColon;
  }
}

MarkerLexicon MarkerLexicon::load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open marker lexicon " + path.string());
  std::map<std::string, std::vector<std::string>> from_file;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) +
                        ": expected <language>\\t<marker>");
    }
    LanguageTag lang = LanguageTag::parse(trim(line.substr(0, tab)));
    std::string marker = trim(line.substr(tab + 1));
    if (marker.empty()) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": empty marker");
    }
    from_file[lang.code].push_back(std::move(marker));
  }
  MarkerLexicon lex = builtin();
  for (auto& [code, markers] : from_file) {
    lex.set_answer_markers(LanguageTag(code), std::move(markers));
  }
  return lex;
}

const std::vector<std::string>& MarkerLexicon::answer_markers(const LanguageTag& lang) const {
  static const std::vector<std::string> kEmpty;
  auto it = answer_.find(lang.code);
  return it == answer_.end() ? kEmpty : it->second;
}

const std::vector<std::string>& MarkerLexicon::explanation_markers(const LanguageTag& lang) const {
  static const std::vector<std::string> kEmpty;
  auto it = explanation_.find(lang.code);
  return it == explanation_.end() ? kEmpty : it->second;
}

bool MarkerLexicon::covers(const LanguageTag& lang) const {
  auto it = answer_.find(lang.code);
  return it != answer_.end() && !it->second.empty();
}

const std::string& MarkerLexicon::colon(const LanguageTag& lang) const {
  auto it = colon_.find(lang.code);
  return it == colon_.end() ? kAsciiColon : it->second;
}

std::string MarkerLexicon::content_digest() const {
  std::string blob;
  auto append_map = [&blob](const std::map<std::string, std::vector<std::string>>& m) {
    for (const auto& [code, items] : m) {
      blob += code;
      blob += '\x1f';
      for (const auto& item : items) {
        blob += item;
        blob += '\x1f';
      }
      blob += '\x1e';
    }
  };
  append_map(answer_);
  append_map(explanation_);
  for (const auto& [code, sep] : colon_) {
    blob += code;
    blob += '\x1f';
    blob += sep;
    blob += '\x1e';
  }
  return sha256_hex(blob);
}

std::string MarkerLexicon::answer_line(const LanguageTag& lang, Label label) const {
  const auto& markers = answer_markers(lang);
  if (markers.empty()) {
    throw ConfigError("no answer marker configured for language " + lang.code,
                      {"prompt.markers_path"});
  }
  return markers.front() + colon(lang) + std::string(1, label);
}

std::string MarkerLexicon::render_target(const LanguageTag& lang, std::string_view explanation,
                                         Label label) const {
  std::string trimmed = trim(explanation);
  if (trimmed.empty()) return answer_line(lang, label);
  const auto& markers = explanation_markers(lang);
  std::string prefix = markers.empty() ? std::string() : markers.front() + colon(lang);
  return prefix + trimmed + "\n" + answer_line(lang, label);
}

}  // namespace xalign
