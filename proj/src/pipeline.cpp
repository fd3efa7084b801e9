#include "xalign/pipeline.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <iostream>
#include <set>
#include <tuple>

#include "xalign/errors.hpp"
#include "xalign/metrics.hpp"
#include "xalign/pairs.hpp"
#include "xalign/parse.hpp"
#include "xalign/util.hpp"
#include "xalign/vote.hpp"

namespace xalign {

namespace {

void log_line(const std::string& stage, const std::string& message) {
  std::cerr << "[" << stage << "] " << message << "\n";
}

std::string file_digest(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

constexpr const char* kQuestionsFile = "questions.jsonl";
constexpr const char* kSamplesFile = "samples.jsonl";
constexpr const char* kVotesFile = "votes.jsonl";
constexpr const char* kDpoFile = "dpo.jsonl";
constexpr const char* kDpoMetaFile = "dpo.meta.jsonl";
constexpr const char* kDpoTrainConfig = "train_config.dpo";
constexpr const char* kSftFile = "sft.jsonl";
constexpr const char* kSftMetaFile = "sft.meta.jsonl";
constexpr const char* kSftTrainConfig = "train_config.sft";
constexpr const char* kReportJson = "report.json";
constexpr const char* kReportMd = "report.md";
constexpr const char* kLanguageShareFile = "language_share.json";
constexpr const char* kCacheDir = "cache";

}  // namespace

Stage stage_from_string(const std::string& name) {
  if (name == "translate") return Stage::Translate;
  if (name == "sample") return Stage::Sample;
  if (name == "vote") return Stage::Vote;
  if (name == "pairs") return Stage::Pairs;
  if (name == "sft") return Stage::Sft;
  if (name == "eval") return Stage::Eval;
  if (name == "report") return Stage::Report;
  throw ConfigError("unknown stage: " + name);
}

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::Translate:
      return "translate";
    case Stage::Sample:
      return "sample";
    case Stage::Vote:
      return "vote";
    case Stage::Pairs:
      return "pairs";
    case Stage::Sft:
      return "sft";
    case Stage::Eval:
      return "eval";
    case Stage::Report:
      return "report";
  }
  return "unknown";
}

Workspace::Workspace(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  lock_path_ = dir_ / ".lock";
  for (int attempt = 0; attempt < 2; ++attempt) {
    int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      std::string pid = std::to_string(::getpid()) + "\n";
      (void)!::write(fd, pid.data(), pid.size());
      ::close(fd);
      locked_ = true;
      return;
    }
    // Lock exists: reclaim it if the owning process is gone.
    pid_t owner = 0;
    try {
      owner = pid_t(std::stol(trim(read_file(lock_path_))));
    } catch (const std::exception&) {
      owner = 0;
    }
    if (owner > 0 && ::kill(owner, 0) == 0) {
      throw ConfigError("workspace " + dir_.string() + " is locked by running process " +
                        std::to_string(owner));
    }
    std::filesystem::remove(lock_path_);
  }
  throw IoError("cannot acquire workspace lock " + lock_path_.string());
}

Workspace::~Workspace() {
  if (locked_) {
    std::error_code ec;
    std::filesystem::remove(lock_path_, ec);
  }
}

std::map<std::string, OJson> Workspace::load_manifest() const {
  std::map<std::string, OJson> stages;
  auto path = file("manifest.json");
  if (!std::filesystem::exists(path)) return stages;
  OJson manifest = OJson::parse(read_file(path), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    throw SchemaError("corrupt manifest: " + path.string());
  }
  if (manifest.contains("stages")) {
    for (auto it = manifest["stages"].begin(); it != manifest["stages"].end(); ++it) {
      stages[it.key()] = it.value();
    }
  }
  return stages;
}

void Workspace::save_manifest(const std::map<std::string, OJson>& stages) const {
  OJson manifest;
  manifest["version"] = 1;
  OJson stage_obj = OJson::object();
  for (const auto& [name, entry] : stages) stage_obj[name] = entry;
  manifest["stages"] = std::move(stage_obj);
  atomic_write_file(file("manifest.json"), manifest.dump(2) + "\n");
}

namespace {

struct StagePlan {
  std::string name;
  std::string params_digest;
  std::map<std::string, std::string> input_digests;  // artifact name -> digest
  std::vector<std::string> output_names;
};

bool stage_is_fresh(const Workspace& ws, const std::map<std::string, OJson>& manifest,
                    const StagePlan& plan) {
  auto it = manifest.find(plan.name);
  if (it == manifest.end()) return false;
  const OJson& entry = it->second;
  if (!entry.contains("params") || entry["params"] != plan.params_digest) return false;
  if (!entry.contains("inputs") || !entry["inputs"].is_object()) return false;
  if (entry["inputs"].size() != plan.input_digests.size()) return false;
  for (const auto& [name, digest] : plan.input_digests) {
    if (!entry["inputs"].contains(name) || entry["inputs"][name] != digest) return false;
  }
  if (!entry.contains("outputs") || !entry["outputs"].is_object()) return false;
  if (entry["outputs"].size() != plan.output_names.size()) return false;
  for (const auto& name : plan.output_names) {
    if (!entry["outputs"].contains(name)) return false;
    auto path = ws.file(name);
    if (!std::filesystem::exists(path)) return false;
    if (entry["outputs"][name] != file_digest(path)) return false;
  }
  return true;
}

void record_stage(Workspace& ws, std::map<std::string, OJson>& manifest, const StagePlan& plan,
                  const std::map<std::string, long>& counts) {
  OJson entry;
  entry["params"] = plan.params_digest;
  OJson inputs = OJson::object();
  for (const auto& [name, digest] : plan.input_digests) inputs[name] = digest;
  entry["inputs"] = std::move(inputs);
  OJson outputs = OJson::object();
  for (const auto& name : plan.output_names) outputs[name] = file_digest(ws.file(name));
  entry["outputs"] = std::move(outputs);
  OJson count_obj = OJson::object();
  for (const auto& [name, value] : counts) count_obj[name] = value;
  entry["counts"] = std::move(count_obj);
  manifest[plan.name] = std::move(entry);
  ws.save_manifest(manifest);
}

void require_artifact(const Workspace& ws, const char* artifact, const char* producing_stage) {
  if (!std::filesystem::exists(ws.file(artifact))) {
    throw MissingPrerequisiteError(producing_stage);
  }
}

std::string languages_csv(const RunConfig& config) {
  std::string csv;
  for (const auto& lang : config.languages) {
    if (!csv.empty()) csv += ",";
    csv += lang.code;
  }
  return csv;
}

std::unique_ptr<TranslationProvider> make_provider(const RunConfig& config) {
  const auto& t = config.translator;
  if (t.provider == "identity") return std::make_unique<IdentityTranslationProvider>();
  if (t.provider == "tagging") return std::make_unique<TaggingTranslationProvider>();
  if (t.provider == "dictionary") {
    return std::make_unique<DictionaryTranslationProvider>(t.dictionary_path);
  }
  EndpointConfig cfg;
  cfg.base_url = t.base_url;
  cfg.model_name = "translate";
  cfg.api_key_env_var = t.api_key_env_var;
  cfg.timeout_seconds = t.timeout_seconds;
  cfg.max_in_flight = t.max_in_flight;
  cfg.max_retries = t.max_retries;
  cfg.retry_backoff_base_ms = t.retry_backoff_base_ms;
  return std::make_unique<HttpTranslationProvider>(std::move(cfg));
}

std::vector<QuestionBundle> load_workspace_questions(const Workspace& ws,
                                                     const RunConfig& config) {
  LoadOptions options;
  options.dataset_name = config.dataset.name;
  options.required_languages = config.languages;
  return load_question_set(ws.file(kQuestionsFile), QuestionFormat::NativeJsonl, options);
}

std::optional<EvidenceIndex> maybe_load_evidence(const RunConfig& config) {
  if (config.prompt.mode != PromptMode::WithEvidence) return std::nullopt;
  return load_evidence(config.prompt.evidence_path);
}

// Samples grouped by question id, preserving file order of first appearance.
// Enforces path_index uniqueness per (question, language).
std::vector<std::vector<CotSample>> group_samples(const std::filesystem::path& path) {
  std::vector<std::vector<CotSample>> groups;
  std::map<std::string, std::size_t> index_by_id;
  std::set<std::tuple<std::string, std::string, int>> seen;
  std::size_t record = 0;
  for (const auto& row : read_jsonl(path)) {
    CotSample s = sample_from_json(row, path.filename().string() + " record " +
                                            std::to_string(record++));
    if (!seen.insert({s.question_id, s.language.code, s.path_index}).second) {
      throw SchemaError(path.filename().string() + ": duplicate sample " + s.question_id + "/" +
                        s.language.code + ":" + std::to_string(s.path_index));
    }
    auto it = index_by_id.find(s.question_id);
    if (it == index_by_id.end()) {
      index_by_id[s.question_id] = groups.size();
      groups.emplace_back();
      it = index_by_id.find(s.question_id);
    }
    groups[it->second].push_back(std::move(s));
  }
  return groups;
}

void stage_translate(const RunConfig& config, Workspace& ws, StagePlan& plan,
                     std::map<std::string, long>& counts) {
  LoadOptions options;
  options.dataset_name = config.dataset.name;
  std::vector<QuestionBundle> bundles =
      load_question_set(config.dataset.path, config.dataset.format, options);

  // Decide what is missing before constructing any provider; parallel
  // datasets pass straight through.
  std::vector<std::vector<LanguageTag>> missing(bundles.size());
  bool any_missing = false;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    for (const auto& lang : config.languages) {
      if (!bundles[i].has_variant(lang)) {
        missing[i].push_back(lang);
        any_missing = true;
      }
    }
  }

  std::vector<Question> new_variants;
  if (any_missing) {
    if (config.translator.provider == "http" && config.translator.base_url.empty()) {
      throw ConfigError("translator.base_url required: dataset is missing languages",
                        {"translator.base_url"});
    }
    DiskCache cache(ws.file(kCacheDir));
    Translator translator(make_provider(config), &cache);

    std::vector<std::vector<Question>> per_bundle(bundles.size());
    parallel_for(bundles.size(), config.translator.max_in_flight, [&](std::size_t i) {
      const QuestionBundle& bundle = bundles[i];
      if (missing[i].empty()) return;
      // Source: first configured language present, else the first variant.
      const Question* source = nullptr;
      for (const auto& lang : config.languages) {
        auto it = bundle.variants.find(lang);
        if (it != bundle.variants.end()) {
          source = &it->second;
          break;
        }
      }
      if (source == nullptr) source = &bundle.variants.begin()->second;
      for (const auto& dst : missing[i]) {
        Question translated;
        translated.id = bundle.id;
        translated.language = dst;
        translated.stem = translator.translate(source->stem, source->language, dst);
        for (const auto& option : source->options) {
          translated.options.push_back(
              {option.label, translator.translate(option.text, source->language, dst)});
        }
        translated.ground_truth = source->ground_truth;  // labels are language-invariant
        translated.provenance = Provenance::translated(source->language);
        per_bundle[i].push_back(std::move(translated));
      }
    });
    for (auto& variants : per_bundle) {
      for (auto& q : variants) new_variants.push_back(std::move(q));
    }
  }

  bundles = attach_translations(std::move(bundles), new_variants);

  // The configured language set is authoritative: prune extra variants, then
  // demand an exact match.
  std::set<LanguageTag> wanted(config.languages.begin(), config.languages.end());
  for (auto& bundle : bundles) {
    for (auto it = bundle.variants.begin(); it != bundle.variants.end();) {
      it = wanted.count(it->first) ? std::next(it) : bundle.variants.erase(it);
    }
    bundle.validate(config.languages);
  }

  save_question_set(ws.file(kQuestionsFile), bundles, config.languages);
  counts["bundles"] = long(bundles.size());
  counts["translated_variants"] = long(new_variants.size());
  (void)plan;
}

void stage_sample(const RunConfig& config, Workspace& ws, StagePlan& plan,
                  std::map<std::string, long>& counts) {
  std::vector<QuestionBundle> bundles = load_workspace_questions(ws, config);
  std::optional<EvidenceIndex> evidence = maybe_load_evidence(config);
  TemplateStore templates = config.load_templates();
  MarkerLexicon lexicon = config.load_markers();

  DiskCache cache(ws.file(kCacheDir));
  Gateway gateway(config.endpoint, &cache);

  struct Task {
    const QuestionBundle* bundle;
    LanguageTag language;
  };
  std::vector<Task> tasks;
  for (const auto& bundle : bundles) {
    for (const auto& lang : config.languages) tasks.push_back({&bundle, lang});
  }

  std::vector<std::vector<CotSample>> results(tasks.size());
  parallel_for(tasks.size(), config.endpoint.max_in_flight, [&](std::size_t i) {
    const Task& task = tasks[i];
    const Question& question = task.bundle->variant(task.language);
    const EvidenceBlock* block = nullptr;
    if (evidence) {
      auto it = evidence->find({question.id, task.language});
      if (it != evidence->end()) block = &it->second;
    }
    std::string prompt = render_prompt(question, config.prompt.mode, block, templates);
    std::vector<std::string> texts = gateway.complete(prompt, config.decode);
    for (std::size_t j = 0; j < texts.size(); ++j) {
      ParseOutcome parsed =
          parse_cot(texts[j], question.label_set(), task.language, lexicon);
      CotSample sample;
      sample.question_id = question.id;
      sample.language = task.language;
      sample.path_index = int(j);
      sample.raw = texts[j];
      sample.explanation = parsed.explanation;
      sample.answer = parsed.answer;
      sample.decode = config.decode.snapshot();
      results[i].push_back(std::move(sample));
    }
  });

  std::vector<OJson> rows;
  long n_samples = 0;
  for (const auto& group : results) {
    for (const auto& sample : group) {
      rows.push_back(sample_to_json(sample));
      ++n_samples;
    }
  }
  write_jsonl(ws.file(kSamplesFile), rows);
  log_line("sample", std::to_string(gateway.request_count()) + " network request(s)");
  counts["samples"] = n_samples;
  (void)plan;
}

void stage_vote(const RunConfig& config, Workspace& ws, StagePlan& plan,
                std::map<std::string, long>& counts) {
  (void)config;
  auto groups = group_samples(ws.file(kSamplesFile));
  std::vector<OJson> rows;
  long ties = 0;
  for (const auto& group : groups) {
    VoteResult vote = tally(group);
    if (vote.tie) ++ties;
    rows.push_back(vote_to_json(vote));
  }
  write_jsonl(ws.file(kVotesFile), rows);
  counts["votes"] = long(rows.size());
  counts["ties"] = ties;
  (void)plan;
}

std::vector<VoteResult> load_votes(const Workspace& ws) {
  std::vector<VoteResult> votes;
  std::size_t record = 0;
  for (const auto& row : read_jsonl(ws.file(kVotesFile))) {
    votes.push_back(vote_from_json(row, std::string(kVotesFile) + " record " +
                                            std::to_string(record++)));
  }
  return votes;
}

struct CorpusView {
  std::vector<QuestionBundle> bundles;
  std::vector<std::vector<CotSample>> sample_groups;  // aligned with bundles
  std::vector<VoteResult> votes;                      // aligned with bundles
};

CorpusView load_corpus(const Workspace& ws, const RunConfig& config) {
  CorpusView corpus;
  corpus.bundles = load_workspace_questions(ws, config);
  auto groups = group_samples(ws.file(kSamplesFile));
  auto votes = load_votes(ws);

  std::map<std::string, std::vector<CotSample>*> groups_by_id;
  for (auto& group : groups) {
    if (!group.empty()) groups_by_id[group.front().question_id] = &group;
  }
  std::map<std::string, VoteResult*> votes_by_id;
  for (auto& vote : votes) votes_by_id[vote.question_id] = &vote;

  for (const auto& bundle : corpus.bundles) {
    auto git = groups_by_id.find(bundle.id);
    auto vit = votes_by_id.find(bundle.id);
    if (git == groups_by_id.end()) {
      throw SchemaError("no samples for question " + bundle.id + "; rerun the sample stage");
    }
    if (vit == votes_by_id.end()) {
      throw SchemaError("no vote for question " + bundle.id + "; rerun the vote stage");
    }
    corpus.sample_groups.push_back(*git->second);
    corpus.votes.push_back(*vit->second);
  }
  return corpus;
}

void stage_pairs(const RunConfig& config, Workspace& ws, StagePlan& plan,
                 std::map<std::string, long>& counts) {
  CorpusView corpus = load_corpus(ws, config);
  std::optional<EvidenceIndex> evidence = maybe_load_evidence(config);
  TemplateStore templates = config.load_templates();
  MarkerLexicon lexicon = config.load_markers();

  DiskCache cache(ws.file(kCacheDir));
  Translator translator(make_provider(config), &cache);

  PairBuildContext context;
  context.templates = &templates;
  context.lexicon = &lexicon;
  context.mode = config.prompt.mode;
  context.evidence = evidence ? &*evidence : nullptr;
  context.strategy = config.pairs.strategy;
  context.cap_per_question = config.pairs.cap_per_question;

  const std::size_t n = corpus.bundles.size();
  std::vector<std::vector<PreferencePair>> built(n);
  std::vector<std::string> skipped(n);
  long skipped_ties = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (config.pairs.skip_ties && corpus.votes[i].tie) {
      log_line("pairs", "question " + corpus.bundles[i].id + " skipped: tied vote");
      ++skipped_ties;
      corpus.votes[i].winner.reset();  // drop from construction, still logged in votes.jsonl
    }
  }
  parallel_for(n, config.translator.max_in_flight, [&](std::size_t i) {
    try {
      built[i] = build_pairs(corpus.bundles[i], corpus.votes[i], corpus.sample_groups[i],
                             translator, context);
    } catch (const TranslationError& e) {
      skipped[i] = e.what();
    }
  });

  std::vector<PreferencePair> pairs;
  long skipped_translation = 0;
  std::string first_error;
  for (std::size_t i = 0; i < n; ++i) {
    if (!skipped[i].empty()) {
      log_line("pairs", "question " + corpus.bundles[i].id + " skipped: " + skipped[i]);
      if (first_error.empty()) first_error = skipped[i];
      ++skipped_translation;
      continue;
    }
    for (auto& pair : built[i]) pairs.push_back(std::move(pair));
  }
  if (pairs.empty() && skipped_translation > 0) {
    throw TranslationError("all questions failed translation; first error: " + first_error);
  }

  if (config.pairs.gt_filter) {
    std::map<std::string, const QuestionBundle*> by_id;
    for (const auto& bundle : corpus.bundles) by_id[bundle.id] = &bundle;
    pairs = filter_by_ground_truth(pairs, by_id);
  }

  DatasetManifestEntry entry = emit_dataset(pairs, ws.file(kDpoFile));
  emit_train_config_stub(TrainKind::Dpo, ws.file(kDpoTrainConfig));
  counts["pairs"] = long(entry.count);
  counts["skipped_ties"] = skipped_ties;
  counts["skipped_translation"] = skipped_translation;
  (void)plan;
}

void stage_sft(const RunConfig& config, Workspace& ws, StagePlan& plan,
               std::map<std::string, long>& counts) {
  CorpusView corpus = load_corpus(ws, config);
  std::optional<EvidenceIndex> evidence = maybe_load_evidence(config);
  TemplateStore templates = config.load_templates();
  MarkerLexicon lexicon = config.load_markers();

  PairBuildContext context;
  context.templates = &templates;
  context.lexicon = &lexicon;
  context.mode = config.prompt.mode;
  context.evidence = evidence ? &*evidence : nullptr;

  std::vector<SftExample> examples;
  long skipped_ties = 0;
  for (std::size_t i = 0; i < corpus.bundles.size(); ++i) {
    if (config.pairs.skip_ties && corpus.votes[i].tie) {
      ++skipped_ties;
      continue;
    }
    auto built = build_sft(corpus.bundles[i], corpus.votes[i], corpus.sample_groups[i], context);
    for (auto& example : built) examples.push_back(std::move(example));
  }

  if (config.pairs.gt_filter) {
    std::map<std::string, const QuestionBundle*> by_id;
    for (const auto& bundle : corpus.bundles) by_id[bundle.id] = &bundle;
    examples = filter_by_ground_truth(examples, by_id);
  }

  DatasetManifestEntry entry = emit_dataset(examples, ws.file(kSftFile));
  emit_train_config_stub(TrainKind::Sft, ws.file(kSftTrainConfig));
  counts["examples"] = long(entry.count);
  counts["skipped_ties"] = skipped_ties;
  (void)plan;
}

void stage_eval(const RunConfig& config, Workspace& ws, StagePlan& plan,
                std::map<std::string, long>& counts) {
  std::vector<QuestionBundle> bundles = load_workspace_questions(ws, config);
  std::optional<EvidenceIndex> evidence = maybe_load_evidence(config);
  TemplateStore templates = config.load_templates();
  MarkerLexicon lexicon = config.load_markers();

  DiskCache cache(ws.file(kCacheDir));
  Gateway gateway(config.endpoint, &cache);

  EvalOptions options;
  options.languages = config.languages;
  options.mode = config.prompt.mode;
  options.decode = config.decode;
  options.evidence = evidence ? &*evidence : nullptr;
  options.workers = config.endpoint.max_in_flight;

  EvalOutcome outcome = run_eval(bundles, gateway, templates, lexicon, options);
  atomic_write_file(ws.file(kReportJson),
                    report_to_json(outcome.report, config.languages).dump(2) + "\n");
  atomic_write_file(ws.file(kReportMd), report_to_markdown(outcome.report, config.languages));
  log_line("eval", std::to_string(gateway.request_count()) + " network request(s)");
  counts["questions"] = outcome.report.n_questions;
  (void)plan;
}

void stage_report(const RunConfig& config, Workspace& ws, StagePlan& plan,
                  std::map<std::string, long>& counts) {
  (void)config;
  std::vector<VoteResult> votes = load_votes(ws);
  int total_positives = 0;
  for (const auto& vote : votes) total_positives += int(vote.positives.size());
  std::map<LanguageTag, double> shares = language_share(votes);
  atomic_write_file(ws.file(kLanguageShareFile),
                    language_share_to_json(shares, total_positives).dump(2) + "\n");
  counts["total_positives"] = total_positives;
  (void)plan;
}

StagePlan make_plan(Stage stage, const RunConfig& config, const Workspace& ws) {
  StagePlan plan;
  plan.name = stage_name(stage);

  TemplateStore templates = config.load_templates();
  MarkerLexicon lexicon = config.load_markers();

  OJson params;
  params["stage_version"] = 1;
  params["languages"] = languages_csv(config);
  auto add_prompt_params = [&] {
    params["mode"] = prompt_mode_name(config.prompt.mode);
    params["templates"] = templates.content_digest();
    params["markers"] = lexicon.content_digest();
  };
  auto add_evidence_input = [&] {
    if (config.prompt.mode == PromptMode::WithEvidence) {
      plan.input_digests["evidence"] = file_digest(config.prompt.evidence_path);
    }
  };

  switch (stage) {
    case Stage::Translate: {
      params["dataset_name"] = config.dataset.name;
      params["provider"] = config.translator.provider + ":" + config.translator.base_url + ":" +
                           (config.translator.dictionary_path.empty()
                                ? ""
                                : file_digest(config.translator.dictionary_path));
      if (config.dataset.path.empty() || !std::filesystem::exists(config.dataset.path)) {
        throw ConfigError("dataset.path does not exist: " + config.dataset.path,
                          {"dataset.path"});
      }
      plan.input_digests["dataset"] = file_digest(config.dataset.path);
      plan.output_names = {kQuestionsFile};
      break;
    }
    case Stage::Sample: {
      require_artifact(ws, kQuestionsFile, "translate");
      params["model"] = config.endpoint.model_name;
      params["temperature"] = format_double(config.decode.temperature);
      params["top_p"] = format_double(config.decode.top_p);
      params["max_new_tokens"] = config.decode.max_new_tokens;
      params["n_paths"] = config.decode.n_paths;
      add_prompt_params();
      plan.input_digests[kQuestionsFile] = file_digest(ws.file(kQuestionsFile));
      add_evidence_input();
      plan.output_names = {kSamplesFile};
      break;
    }
    case Stage::Vote: {
      require_artifact(ws, kSamplesFile, "sample");
      plan.input_digests[kSamplesFile] = file_digest(ws.file(kSamplesFile));
      plan.output_names = {kVotesFile};
      break;
    }
    case Stage::Pairs: {
      require_artifact(ws, kQuestionsFile, "translate");
      require_artifact(ws, kSamplesFile, "sample");
      require_artifact(ws, kVotesFile, "vote");
      params["strategy"] = pair_strategy_name(config.pairs.strategy);
      params["cap"] = config.pairs.cap_per_question ? *config.pairs.cap_per_question : -1;
      params["skip_ties"] = config.pairs.skip_ties;
      params["gt_filter"] = config.pairs.gt_filter;
      params["provider"] = config.translator.provider + ":" + config.translator.base_url + ":" +
                           (config.translator.dictionary_path.empty()
                                ? ""
                                : file_digest(config.translator.dictionary_path));
      add_prompt_params();
      plan.input_digests[kQuestionsFile] = file_digest(ws.file(kQuestionsFile));
      plan.input_digests[kSamplesFile] = file_digest(ws.file(kSamplesFile));
      plan.input_digests[kVotesFile] = file_digest(ws.file(kVotesFile));
      add_evidence_input();
      plan.output_names = {kDpoFile, kDpoMetaFile, kDpoTrainConfig};
      break;
    }
    case Stage::Sft: {
      require_artifact(ws, kQuestionsFile, "translate");
      require_artifact(ws, kSamplesFile, "sample");
      require_artifact(ws, kVotesFile, "vote");
      params["skip_ties"] = config.pairs.skip_ties;
      params["gt_filter"] = config.pairs.gt_filter;
      add_prompt_params();
      plan.input_digests[kQuestionsFile] = file_digest(ws.file(kQuestionsFile));
      plan.input_digests[kSamplesFile] = file_digest(ws.file(kSamplesFile));
      plan.input_digests[kVotesFile] = file_digest(ws.file(kVotesFile));
      add_evidence_input();
      plan.output_names = {kSftFile, kSftMetaFile, kSftTrainConfig};
      break;
    }
    case Stage::Eval: {
      require_artifact(ws, kQuestionsFile, "translate");
      params["model"] = config.endpoint.model_name;
      params["temperature"] = format_double(config.decode.temperature);
      params["top_p"] = format_double(config.decode.top_p);
      params["max_new_tokens"] = config.decode.max_new_tokens;
      add_prompt_params();
      plan.input_digests[kQuestionsFile] = file_digest(ws.file(kQuestionsFile));
      add_evidence_input();
      plan.output_names = {kReportJson, kReportMd};
      break;
    }
    case Stage::Report: {
      require_artifact(ws, kVotesFile, "vote");
      plan.input_digests[kVotesFile] = file_digest(ws.file(kVotesFile));
      plan.output_names = {kLanguageShareFile};
      break;
    }
  }
  plan.params_digest = sha256_hex(params.dump());
  return plan;
}

}  // namespace

void run_stage(Stage stage, const RunConfig& config, Workspace& workspace, bool force) {
  const std::string name = stage_name(stage);
  validate_for_stage(config, name);
  StagePlan plan = make_plan(stage, config, workspace);
  auto manifest = workspace.load_manifest();
  if (!force && stage_is_fresh(workspace, manifest, plan)) {
    log_line(name, "up to date, skipping (use --force to recompute)");
    return;
  }

  std::map<std::string, long> counts;
  switch (stage) {
    case Stage::Translate:
      stage_translate(config, workspace, plan, counts);
      break;
    case Stage::Sample:
      stage_sample(config, workspace, plan, counts);
      break;
    case Stage::Vote:
      stage_vote(config, workspace, plan, counts);
      break;
    case Stage::Pairs:
      stage_pairs(config, workspace, plan, counts);
      break;
    case Stage::Sft:
      stage_sft(config, workspace, plan, counts);
      break;
    case Stage::Eval:
      stage_eval(config, workspace, plan, counts);
      break;
    case Stage::Report:
      stage_report(config, workspace, plan, counts);
      break;
  }
  record_stage(workspace, manifest, plan, counts);
  std::string summary;
  for (const auto& [key, value] : counts) {
    if (!summary.empty()) summary += ", ";
    summary += key + "=" + std::to_string(value);
  }
  log_line(name, "done (" + summary + ")");
}

}  // namespace xalign
