#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xalign/dataset.hpp"
#include "xalign/gateway.hpp"
#include "xalign/pairs.hpp"
#include "xalign/prompt.hpp"
#include "xalign/types.hpp"

namespace xalign {

struct DatasetConfig {
  std::string path;
  std::string name = "dataset";
  QuestionFormat format = QuestionFormat::NativeJsonl;
};

struct TranslatorConfig {
  std::string provider = "http";  // http | dictionary | identity | tagging
  std::string base_url;
  std::string api_key_env_var;
  std::string dictionary_path;
  double timeout_seconds = 30.0;
  int max_in_flight = 4;
  int max_retries = 2;
  int retry_backoff_base_ms = 250;
};

struct PairsConfig {
  PairStrategy strategy = PairStrategy::CrossProduct;
  std::optional<int> cap_per_question = 9;
  bool skip_ties = false;
  bool gt_filter = false;
};

struct PromptConfig {
  PromptMode mode = PromptMode::ZeroShot;
  std::string evidence_path;
  std::string templates_dir;  // "" = compiled-in templates
  std::string markers_path;   // "" = built-in marker lexicon
};

struct RunConfig {
  std::vector<LanguageTag> languages;
  DatasetConfig dataset;
  EndpointConfig endpoint;
  DecodeParams decode;
  TranslatorConfig translator;
  PairsConfig pairs;
  PromptConfig prompt;

  TemplateStore load_templates() const;
  MarkerLexicon load_markers() const;
};

// Flat dotted-key file: `key = value` lines, '#' comments. Unknown keys and
// range violations are all collected into one ConfigError.
RunConfig load_config(const std::filesystem::path& path);

// Cross-field checks shared by load_config and CLI flag overrides: evidence
// requirements plus template/marker coverage of every configured language.
void validate_config(const RunConfig& config);

// Stage-dependent requirements (e.g. pair construction needs >= 2 languages).
void validate_for_stage(const RunConfig& config, const std::string& stage);

}  // namespace xalign
