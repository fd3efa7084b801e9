#include "xalign/pairs.hpp"

#include <algorithm>

#include "xalign/errors.hpp"
#include "xalign/jsonl.hpp"
#include "xalign/util.hpp"

namespace xalign {

PairStrategy pair_strategy_from_string(const std::string& s) {
  if (s == "cross-product") return PairStrategy::CrossProduct;
  if (s == "round-robin") return PairStrategy::RoundRobin;
  throw ConfigError("unknown pairing strategy: " + s, {"pairs.strategy"});
}

std::string pair_strategy_name(PairStrategy s) {
  return s == PairStrategy::CrossProduct ? "cross-product" : "round-robin";
}

namespace {

const CotSample& sample_by_ref(const std::vector<CotSample>& samples, const SampleRef& ref,
                               const std::string& question_id) {
  for (const auto& s : samples) {
    if (s.language == ref.language && s.path_index == ref.path_index) return s;
  }
  throw SchemaError("question " + question_id + ": vote references missing sample " + ref.str());
}

const EvidenceBlock* find_evidence(const EvidenceIndex* evidence, const std::string& id,
                                   const LanguageTag& lang) {
  if (evidence == nullptr) return nullptr;
  auto it = evidence->find({id, lang});
  return it == evidence->end() ? nullptr : &it->second;
}

}  // namespace

std::vector<PreferencePair> build_pairs(const QuestionBundle& bundle, const VoteResult& vote,
                                        const std::vector<CotSample>& samples,
                                        Translator& translator, const PairBuildContext& context) {
  std::vector<PreferencePair> pairs;
  if (!vote.winner) return pairs;
  const Label winner = *vote.winner;
  const int margin = vote.margin();

  // Ref lists are already sorted by (language, path); pairing order and the
  // deterministic cap both follow that order.
  std::vector<std::pair<SampleRef, SampleRef>> selected;
  if (context.strategy == PairStrategy::CrossProduct) {
    for (const auto& pos : vote.positives) {
      for (const auto& neg : vote.negatives) selected.emplace_back(pos, neg);
    }
  } else {
    const std::size_t total = std::max(vote.positives.size(), vote.negatives.size());
    for (std::size_t k = 0; k < total && !vote.positives.empty() && !vote.negatives.empty(); ++k) {
      selected.emplace_back(vote.positives[k % vote.positives.size()],
                            vote.negatives[k % vote.negatives.size()]);
    }
  }
  if (context.cap_per_question && int(selected.size()) > *context.cap_per_question) {
    selected.resize(std::size_t(*context.cap_per_question));
  }

  for (const auto& [pos_ref, neg_ref] : selected) {
    const CotSample& positive = sample_by_ref(samples, pos_ref, bundle.id);
    const CotSample& negative = sample_by_ref(samples, neg_ref, bundle.id);
    if (!negative.answer) continue;  // negatives are non-abstaining by construction

    std::string explanation = positive.explanation.value_or("");
    if (!explanation.empty() && positive.language != negative.language) {
      try {
        explanation = translator.translate(explanation, positive.language, negative.language);
      } catch (const TransportError& e) {
        throw TranslationError("question " + bundle.id + ": translating " +
                               pos_ref.str() + " -> " + negative.language.code + ": " + e.what());
      }
    }

    const Question& variant = bundle.variant(negative.language);
    PreferencePair pair;
    pair.question_id = bundle.id;
    pair.record_language = negative.language;
    pair.prompt = render_prompt(variant, context.mode,
                                find_evidence(context.evidence, bundle.id, negative.language),
                                *context.templates);
    pair.chosen = context.lexicon->render_target(negative.language, explanation, winner);
    pair.rejected = context.lexicon->render_target(
        negative.language, negative.explanation.value_or(""), *negative.answer);
    pair.meta.chosen_source_language = positive.language;
    pair.meta.chosen_ref = pos_ref;
    pair.meta.rejected_ref = neg_ref;
    pair.meta.winner_label = winner;
    pair.meta.rejected_label = *negative.answer;
    pair.meta.vote_margin = margin;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<SftExample> build_sft(const QuestionBundle& bundle, const VoteResult& vote,
                                  const std::vector<CotSample>& samples,
                                  const PairBuildContext& context) {
  std::vector<SftExample> examples;
  if (!vote.winner) return examples;
  const Label winner = *vote.winner;
  for (const auto& ref : vote.positives) {
    const CotSample& positive = sample_by_ref(samples, ref, bundle.id);
    const Question& variant = bundle.variant(positive.language);
    SftExample example;
    example.question_id = bundle.id;
    example.language = positive.language;
    example.source_ref = ref;
    example.prompt = render_prompt(variant, context.mode,
                                   find_evidence(context.evidence, bundle.id, positive.language),
                                   *context.templates);
    example.target = context.lexicon->render_target(positive.language,
                                                    positive.explanation.value_or(""), winner);
    example.winner_label = winner;
    examples.push_back(std::move(example));
  }
  return examples;
}

namespace {

Label require_ground_truth(const std::map<std::string, const QuestionBundle*>& bundles,
                           const std::string& id) {
  auto it = bundles.find(id);
  if (it == bundles.end() || it->second == nullptr) {
    throw MissingGroundTruthError("no bundle for id " + id);
  }
  auto gt = it->second->ground_truth();
  if (!gt) throw MissingGroundTruthError("bundle " + id + " has no ground truth");
  return *gt;
}

}  // namespace

std::vector<PreferencePair> filter_by_ground_truth(
    const std::vector<PreferencePair>& records,
    const std::map<std::string, const QuestionBundle*>& bundles) {
  std::vector<PreferencePair> kept;
  for (const auto& r : records) {
    if (r.meta.winner_label == require_ground_truth(bundles, r.question_id)) kept.push_back(r);
  }
  return kept;
}

std::vector<SftExample> filter_by_ground_truth(
    const std::vector<SftExample>& records,
    const std::map<std::string, const QuestionBundle*>& bundles) {
  std::vector<SftExample> kept;
  for (const auto& r : records) {
    if (r.winner_label == require_ground_truth(bundles, r.question_id)) kept.push_back(r);
  }
  return kept;
}

namespace {

DatasetManifestEntry emit_rows(const std::vector<OJson>& rows, const std::vector<OJson>& meta,
                               const std::filesystem::path& path) {
  std::string content = jsonl_to_string(rows);
  atomic_write_file(path, content);
  std::filesystem::path meta_path = path;
  meta_path.replace_extension(".meta.jsonl");
  atomic_write_file(meta_path, jsonl_to_string(meta));
  return DatasetManifestEntry{path.string(), rows.size(), sha256_hex(content)};
}

}  // namespace

DatasetManifestEntry emit_dataset(const std::vector<PreferencePair>& records,
                                  const std::filesystem::path& path) {
  std::vector<OJson> rows, meta;
  rows.reserve(records.size());
  meta.reserve(records.size());
  for (const auto& r : records) {
    OJson row;
    row["instruction"] = r.prompt;
    row["chosen"] = r.chosen;
    row["rejected"] = r.rejected;
    rows.push_back(std::move(row));
    OJson m;
    m["id"] = r.question_id;
    m["record_language"] = r.record_language.code;
    m["chosen_source_language"] = r.meta.chosen_source_language.code;
    m["chosen_ref"] = r.meta.chosen_ref.str();
    m["rejected_ref"] = r.meta.rejected_ref.str();
    m["winner"] = std::string(1, r.meta.winner_label);
    m["rejected_label"] = std::string(1, r.meta.rejected_label);
    m["vote_margin"] = r.meta.vote_margin;
    meta.push_back(std::move(m));
  }
  return emit_rows(rows, meta, path);
}

DatasetManifestEntry emit_dataset(const std::vector<SftExample>& records,
                                  const std::filesystem::path& path) {
  std::vector<OJson> rows, meta;
  rows.reserve(records.size());
  meta.reserve(records.size());
  for (const auto& r : records) {
    OJson row;
    row["instruction"] = r.prompt;
    row["output"] = r.target;
    rows.push_back(std::move(row));
    OJson m;
    m["id"] = r.question_id;
    m["language"] = r.language.code;
    m["source_ref"] = r.source_ref.str();
    m["winner"] = std::string(1, r.winner_label);
    meta.push_back(std::move(m));
  }
  return emit_rows(rows, meta, path);
}

void emit_train_config_stub(TrainKind kind, const std::filesystem::path& path) {
  std::string text;
  if (kind == TrainKind::Dpo) {
    text +=
        "learning_rate=5e-6\n"
        "num_train_epochs=3.0\n"
        "lr_scheduler=cosine\n"
        "per_device_train_batch_size=1\n"
        "warmup_ratio=0.1\n"
        "val_size=0.06\n"
        "pref_beta=0.1\n"
        "pref_loss=sigmoid\n"
        "per_device_eval_batch_size=2\n"
        "lora_rank=8\n"
        "lora_alpha=16\n"
        "lora_targets=q_proj,v_proj\n"
        "optimizer=adam\n";
  } else {
    text +=
        "learning_rate=5e-5\n"
        "num_train_epochs=3.0\n"
        "lr_scheduler=cosine\n"
        "per_device_train_batch_size=1\n"
        "warmup_ratio=0\n"
        "val_size=0.06\n"
        "per_device_eval_batch_size=2\n"
        "lora_rank=8\n"
        "lora_alpha=16\n"
        "lora_targets=q_proj,v_proj\n"
        "optimizer=adam\n";
  }
  atomic_write_file(path, text);
}

}  // namespace xalign
