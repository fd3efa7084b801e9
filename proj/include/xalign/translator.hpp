#pragma once

#include <map>
#include <memory>
#include <string>
#include <tuple>

#include "xalign/cache.hpp"
#include "xalign/gateway.hpp"
#include "xalign/types.hpp"

namespace xalign {

// Raw text translation backend. Providers are swappable because translation
// quality varies; the pipeline only depends on this interface.
class TranslationProvider {
 public:
  virtual ~TranslationProvider() = default;
  virtual const std::string& id() const = 0;
  virtual std::string translate_raw(const std::string& text, const LanguageTag& src,
                                    const LanguageTag& dst) = 0;
};

// POST {base_url}/translate {"q","source","target"} -> {"text"}.
class HttpTranslationProvider : public TranslationProvider {
 public:
  explicit HttpTranslationProvider(EndpointConfig cfg);
  const std::string& id() const override { return id_; }
  std::string translate_raw(const std::string& text, const LanguageTag& src,
                            const LanguageTag& dst) override;

 private:
  HttpSession session_;
  std::string id_;
};

// Exact-match lookup over TSV rows (src_tag, dst_tag, input, output); a miss
// is a ProviderError. The id hashes the file content so edits invalidate the
// cache.
class DictionaryTranslationProvider : public TranslationProvider {
 public:
  explicit DictionaryTranslationProvider(const std::filesystem::path& path);
  const std::string& id() const override { return id_; }
  std::string translate_raw(const std::string& text, const LanguageTag& src,
                            const LanguageTag& dst) override;

 private:
  std::map<std::tuple<std::string, std::string, std::string>, std::string> entries_;
  std::string id_;
};

// Test double: returns the input unchanged.
class IdentityTranslationProvider : public TranslationProvider {
 public:
  const std::string& id() const override;
  std::string translate_raw(const std::string& text, const LanguageTag&,
                            const LanguageTag&) override {
    return text;
  }
};

// Test double: prefixes "[<dst>]" so routing is observable.
class TaggingTranslationProvider : public TranslationProvider {
 public:
  const std::string& id() const override;
  std::string translate_raw(const std::string& text, const LanguageTag&,
                            const LanguageTag& dst) override {
    return "[" + dst.code + "]" + text;
  }
};

// Caching facade: src != dst and non-empty text are preconditions; results
// are cached under (text, src, dst, provider id).
class Translator {
 public:
  Translator(std::unique_ptr<TranslationProvider> provider, const DiskCache* cache = nullptr);

  std::string translate(const std::string& text, const LanguageTag& src, const LanguageTag& dst);
  const std::string& provider_id() const { return provider_->id(); }

 private:
  std::unique_ptr<TranslationProvider> provider_;
  const DiskCache* cache_;
};

}  // namespace xalign
