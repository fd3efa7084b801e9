#include "xalign/translator.hpp"

#include <fstream>
#include <stdexcept>

#include "xalign/errors.hpp"
#include "xalign/util.hpp"

namespace xalign {

HttpTranslationProvider::HttpTranslationProvider(EndpointConfig cfg)
    : session_(std::move(cfg), /*capture=*/false),
      id_("http:" + session_.config().base_url) {}

std::string HttpTranslationProvider::translate_raw(const std::string& text,
                                                   const LanguageTag& src,
                                                   const LanguageTag& dst) {
  nlohmann::ordered_json body;
  body["q"] = text;
  body["source"] = src.code;
  body["target"] = dst.code;
  std::string response = session_.post_json("/translate", body);
  nlohmann::json j = nlohmann::json::parse(response, nullptr, false);
  if (j.is_discarded() || !j.contains("text") || !j["text"].is_string()) {
    throw ProviderError("malformed translation response: " + response);
  }
  std::string out = j["text"].get<std::string>();
  if (out.empty()) throw ProviderError("translation provider returned empty text");
  return out;
}

DictionaryTranslationProvider::DictionaryTranslationProvider(const std::filesystem::path& path) {
  std::string content = read_file(path);
  id_ = "dict:" + sha256_hex(content).substr(0, 12);
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t eol = content.find('\n', pos);
    std::string line = content.substr(pos, eol == std::string::npos ? eol : eol - pos);
    pos = eol == std::string::npos ? content.size() + 1 : eol + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
      std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        throw SchemaError(path.string() + ":" + std::to_string(lineno) +
                          ": expected 4 tab-separated fields");
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    fields.push_back(line.substr(start));
    LanguageTag src = LanguageTag::parse(fields[0]);
    LanguageTag dst = LanguageTag::parse(fields[1]);
    entries_[{src.code, dst.code, fields[2]}] = fields[3];
  }
}

std::string DictionaryTranslationProvider::translate_raw(const std::string& text,
                                                         const LanguageTag& src,
                                                         const LanguageTag& dst) {
  auto it = entries_.find({src.code, dst.code, text});
  if (it == entries_.end()) {
    throw ProviderError("no dictionary entry for " + src.code + "->" + dst.code + ": '" + text +
                        "'");
  }
  return it->second;
}

const std::string& IdentityTranslationProvider::id() const {
  static const std::string kId = "identity";
  return kId;
}

const std::string& TaggingTranslationProvider::id() const {
  static const std::string kId = "tagging";
  return kId;
}

Translator::Translator(std::unique_ptr<TranslationProvider> provider, const DiskCache* cache)
    : provider_(std::move(provider)), cache_(cache) {
  if (!provider_) throw std::invalid_argument("Translator: null provider");
}

std::string Translator::translate(const std::string& text, const LanguageTag& src,
                                  const LanguageTag& dst) {
  if (src == dst) {
    throw std::invalid_argument("translate: src == dst (" + src.code + ")");
  }
  if (text.empty()) throw std::invalid_argument("translate: empty text");
  std::string key;
  if (cache_ != nullptr) {
    key = translation_cache_key(text, src, dst, provider_->id());
    if (auto hit = cache_->get(key)) return *hit;
  }
  std::string out = provider_->translate_raw(text, src, dst);
  if (out.empty()) throw ProviderError("provider " + provider_->id() + " returned empty text");
  if (cache_ != nullptr) cache_->put(key, out);
  return out;
}

}  // namespace xalign
