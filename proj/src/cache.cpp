#include "xalign/cache.hpp"

#include <fstream>
#include <sstream>

#include "xalign/errors.hpp"
#include "xalign/gateway.hpp"
#include "xalign/util.hpp"

namespace xalign {

DiskCache::DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<std::string> DiskCache::get(const std::string& key) const {
  std::filesystem::path file = dir_ / key;
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

void DiskCache::put(const std::string& key, std::string_view value) const {
  atomic_write_file(dir_ / key, value);
}

namespace {
constexpr char kSep = '\x1f';
}

std::string completion_cache_key(const std::string& model_name, const std::string& prompt,
                                 const DecodeParams& decode, int path_index) {
  std::string material = "completion";
  material += kSep;
  material += model_name;
  material += kSep;
  material += prompt;
  material += kSep;
  material += format_double(decode.temperature);
  material += kSep;
  material += format_double(decode.top_p);
  material += kSep;
  material += std::to_string(decode.max_new_tokens);
  material += kSep;
  material += std::to_string(decode.n_paths);
  material += kSep;
  material += std::to_string(path_index);
  return sha256_hex(material);
}

std::string translation_cache_key(const std::string& text, const LanguageTag& src,
                                  const LanguageTag& dst, const std::string& provider_id) {
  std::string material = "translation";
  material += kSep;
  material += text;
  material += kSep;
  material += src.code;
  material += kSep;
  material += dst.code;
  material += kSep;
  material += provider_id;
  return sha256_hex(material);
}

}  // namespace xalign
