#include "xalign/config.hpp"

#include <charconv>
#include <map>
#include <set>

#include "xalign/errors.hpp"
#include "xalign/util.hpp"

namespace xalign {

namespace {

struct KeyValues {
  std::map<std::string, std::string> values;
  std::vector<std::string> errors;

  std::optional<std::string> take(const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    std::string v = it->second;
    values.erase(it);
    return v;
  }

  void bad(const std::string& key, const std::string& why) { errors.push_back(key + " (" + why + ")"); }

  void parse_string(const std::string& key, std::string& out) {
    if (auto v = take(key)) out = *v;
  }

  void parse_double(const std::string& key, double& out) {
    if (auto v = take(key)) {
      try {
        std::size_t idx = 0;
        double parsed = std::stod(*v, &idx);
        if (idx != v->size()) throw std::invalid_argument("trailing characters");
        out = parsed;
      } catch (const std::exception&) {
        bad(key, "not a number: '" + *v + "'");
      }
    }
  }

  void parse_int(const std::string& key, int& out) {
    if (auto v = take(key)) {
      int parsed = 0;
      auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
      if (ec != std::errc{} || ptr != v->data() + v->size()) {
        bad(key, "not an integer: '" + *v + "'");
      } else {
        out = parsed;
      }
    }
  }

  void parse_bool(const std::string& key, bool& out) {
    if (auto v = take(key)) {
      std::string s = lower_ascii(*v);
      if (s == "true" || s == "1" || s == "yes" || s == "on") {
        out = true;
      } else if (s == "false" || s == "0" || s == "no" || s == "off") {
        out = false;
      } else {
        bad(key, "not a boolean: '" + *v + "'");
      }
    }
  }
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    std::string item =
        trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

TemplateStore RunConfig::load_templates() const {
  if (prompt.templates_dir.empty()) return TemplateStore::builtin();
  return TemplateStore::load_dir(prompt.templates_dir);
}

MarkerLexicon RunConfig::load_markers() const {
  if (prompt.markers_path.empty()) return MarkerLexicon::builtin();
  return MarkerLexicon::load_tsv(prompt.markers_path);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string content = read_file(path);
  KeyValues kv;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t eol = content.find('\n', pos);
    std::string line =
        content.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? content.size() + 1 : eol + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      kv.errors.push_back("line " + std::to_string(lineno) + " (expected key = value)");
      continue;
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      kv.errors.push_back("line " + std::to_string(lineno) + " (empty key)");
      continue;
    }
    if (kv.values.count(key)) {
      kv.errors.push_back(key + " (duplicate key)");
      continue;
    }
    kv.values[key] = value;
  }

  RunConfig cfg;

  std::string languages_csv;
  kv.parse_string("languages", languages_csv);
  if (languages_csv.empty()) {
    kv.bad("languages", "required");
  } else {
    std::set<std::string> seen;
    for (const auto& item : split_csv(languages_csv)) {
      try {
        LanguageTag tag = LanguageTag::parse(item);
        if (!seen.insert(tag.code).second) {
          kv.bad("languages", "duplicate language " + tag.code);
          continue;
        }
        cfg.languages.push_back(tag);
      } catch (const SchemaError& e) {
        kv.bad("languages", e.what());
      }
    }
  }

  kv.parse_string("dataset.path", cfg.dataset.path);
  kv.parse_string("dataset.name", cfg.dataset.name);
  if (auto v = kv.take("dataset.format")) {
    try {
      cfg.dataset.format = question_format_from_string(*v);
    } catch (const ConfigError& e) {
      kv.bad("dataset.format", e.what());
    }
  }

  kv.parse_string("endpoint.base_url", cfg.endpoint.base_url);
  kv.parse_string("endpoint.model", cfg.endpoint.model_name);
  kv.parse_string("endpoint.api_key_env", cfg.endpoint.api_key_env_var);
  kv.parse_double("endpoint.timeout_seconds", cfg.endpoint.timeout_seconds);
  kv.parse_int("endpoint.max_in_flight", cfg.endpoint.max_in_flight);
  kv.parse_int("endpoint.max_retries", cfg.endpoint.max_retries);
  kv.parse_int("endpoint.retry_backoff_ms", cfg.endpoint.retry_backoff_base_ms);
  if (cfg.endpoint.base_url.empty()) kv.bad("endpoint.base_url", "required");
  if (cfg.endpoint.model_name.empty()) kv.bad("endpoint.model", "required");
  if (!(cfg.endpoint.timeout_seconds > 0)) kv.bad("endpoint.timeout_seconds", "must be > 0");
  if (cfg.endpoint.max_in_flight < 1) kv.bad("endpoint.max_in_flight", "must be >= 1");
  if (cfg.endpoint.max_retries < 0) kv.bad("endpoint.max_retries", "must be >= 0");
  if (cfg.endpoint.retry_backoff_base_ms < 0) kv.bad("endpoint.retry_backoff_ms", "must be >= 0");

  kv.parse_double("decode.temperature", cfg.decode.temperature);
  kv.parse_double("decode.top_p", cfg.decode.top_p);
  kv.parse_int("decode.max_new_tokens", cfg.decode.max_new_tokens);
  kv.parse_int("decode.n_paths", cfg.decode.n_paths);
  if (cfg.decode.temperature < 0) kv.bad("decode.temperature", "must be >= 0");
  if (!(cfg.decode.top_p > 0 && cfg.decode.top_p <= 1)) kv.bad("decode.top_p", "must be in (0, 1]");
  if (cfg.decode.max_new_tokens < 1) kv.bad("decode.max_new_tokens", "must be >= 1");
  if (cfg.decode.n_paths < 1) kv.bad("decode.n_paths", "must be >= 1");

  kv.parse_string("translator.provider", cfg.translator.provider);
  kv.parse_string("translator.base_url", cfg.translator.base_url);
  kv.parse_string("translator.api_key_env", cfg.translator.api_key_env_var);
  kv.parse_string("translator.dictionary_path", cfg.translator.dictionary_path);
  kv.parse_double("translator.timeout_seconds", cfg.translator.timeout_seconds);
  kv.parse_int("translator.max_in_flight", cfg.translator.max_in_flight);
  kv.parse_int("translator.max_retries", cfg.translator.max_retries);
  kv.parse_int("translator.retry_backoff_ms", cfg.translator.retry_backoff_base_ms);
  {
    const std::string& p = cfg.translator.provider;
    if (p != "http" && p != "dictionary" && p != "identity" && p != "tagging") {
      kv.bad("translator.provider", "must be http|dictionary|identity|tagging");
    }
    if (p == "dictionary" && cfg.translator.dictionary_path.empty()) {
      kv.bad("translator.dictionary_path", "required for the dictionary provider");
    }
  }

  if (auto v = kv.take("pairs.strategy")) {
    try {
      cfg.pairs.strategy = pair_strategy_from_string(*v);
    } catch (const ConfigError& e) {
      kv.bad("pairs.strategy", e.what());
    }
  }
  if (auto v = kv.take("pairs.cap_per_question")) {
    if (lower_ascii(*v) == "none") {
      cfg.pairs.cap_per_question = std::nullopt;
    } else {
      int cap = 0;
      auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), cap);
      if (ec != std::errc{} || ptr != v->data() + v->size() || cap < 1) {
        kv.bad("pairs.cap_per_question", "must be a positive integer or 'none'");
      } else {
        cfg.pairs.cap_per_question = cap;
      }
    }
  }
  kv.parse_bool("pairs.skip_ties", cfg.pairs.skip_ties);
  kv.parse_bool("pairs.gt_filter", cfg.pairs.gt_filter);

  if (auto v = kv.take("prompt.mode")) {
    try {
      cfg.prompt.mode = prompt_mode_from_string(*v);
    } catch (const ConfigError& e) {
      kv.bad("prompt.mode", e.what());
    }
  }
  kv.parse_string("prompt.evidence_path", cfg.prompt.evidence_path);
  kv.parse_string("prompt.templates_dir", cfg.prompt.templates_dir);
  kv.parse_string("prompt.markers_path", cfg.prompt.markers_path);

  for (const auto& [key, _] : kv.values) kv.bad(key, "unknown key");

  if (!kv.errors.empty()) {
    std::string msg = "invalid configuration " + path.string() + ":";
    for (const auto& e : kv.errors) msg += "\n  - " + e;
    throw ConfigError(msg, kv.errors);
  }

  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.languages.empty()) errors.push_back("languages (required)");
  std::set<std::string> seen;
  for (const auto& lang : cfg.languages) {
    if (!seen.insert(lang.code).second) {
      errors.push_back("languages (duplicate language " + lang.code + ")");
    }
  }
  if (cfg.prompt.mode == PromptMode::WithEvidence && cfg.prompt.evidence_path.empty()) {
    errors.push_back("prompt.evidence_path (required in with-evidence mode)");
  }
  if (errors.empty()) {
    // Template and marker coverage for every configured language.
    TemplateStore templates = cfg.load_templates();
    MarkerLexicon lexicon = cfg.load_markers();
    for (const auto& lang : cfg.languages) {
      if (!templates.has(lang, cfg.prompt.mode)) {
        errors.push_back("prompt.templates_dir (no " + prompt_mode_name(cfg.prompt.mode) +
                         " template for " + lang.code + ")");
      }
      if (!lexicon.covers(lang)) {
        errors.push_back("prompt.markers_path (no answer marker for " + lang.code + ")");
      }
    }
    if (errors.empty()) templates.validate_against(lexicon);
  }
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg, errors);
  }
}

void validate_for_stage(const RunConfig& config, const std::string& stage) {
  std::vector<std::string> errors;
  if ((stage == "translate" || stage == "pairs") && config.languages.size() < 2) {
    errors.push_back("languages (cross-lingual " + stage + " needs >= 2 languages)");
  }
  if (stage == "translate" && config.dataset.path.empty()) {
    errors.push_back("dataset.path (required by the translate stage)");
  }
  // The translate stage checks this need-based: a parallel dataset never
  // touches the provider.
  if (stage == "pairs" && config.translator.provider == "http" &&
      config.translator.base_url.empty()) {
    errors.push_back("translator.base_url (required for the http provider)");
  }
  if (!errors.empty()) {
    std::string msg = "configuration not usable for stage '" + stage + "':";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg, errors);
  }
}

}  // namespace xalign
