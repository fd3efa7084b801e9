#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "xalign/types.hpp"

namespace xalign {

struct DecodeParams;

// Content-addressed store, one file per key, written atomically so a killed
// run never leaves a torn entry.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, std::string_view value) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

// Equal inputs yield equal keys; changing any field changes the key.
std::string completion_cache_key(const std::string& model_name, const std::string& prompt,
                                 const DecodeParams& decode, int path_index);
std::string translation_cache_key(const std::string& text, const LanguageTag& src,
                                  const LanguageTag& dst, const std::string& provider_id);

}  // namespace xalign
