#include "xalign/pairs.hpp"

#include <atomic>
#include <set>

#include <doctest.h>

#include "support/tmpdir.hpp"
#include "xalign/errors.hpp"
#include "xalign/jsonl.hpp"
#include "xalign/parse.hpp"
#include "xalign/util.hpp"
#include "xalign/vote.hpp"

using namespace xalign;
using testsupport::TmpDir;

namespace {

class CountingIdentityProvider : public TranslationProvider {
 public:
  const std::string& id() const override {
    static const std::string kId = "counting-identity";
    return kId;
  }
  std::string translate_raw(const std::string& text, const LanguageTag&,
                            const LanguageTag&) override {
    ++calls;
    return text;
  }
  std::atomic<int> calls{0};
};

class FailingProvider : public TranslationProvider {
 public:
  const std::string& id() const override {
    static const std::string kId = "failing";
    return kId;
  }
  std::string translate_raw(const std::string&, const LanguageTag&, const LanguageTag&) override {
    throw ProviderError("scripted failure");
  }
};

QuestionBundle fixture_bundle() {
  QuestionBundle bundle;
  bundle.id = "q1";
  for (const char* lang : {"en", "zh", "fr"}) {
    Question q;
    q.id = "q1";
    q.language = LanguageTag{lang};
    q.stem = std::string("stem-") + lang;
    q.options = {{'A', std::string("a-") + lang},
                 {'B', std::string("b-") + lang},
                 {'C', std::string("c-") + lang}};
    q.ground_truth = 'A';
    q.provenance = Provenance::native_origin();
    bundle.variants.emplace(q.language, std::move(q));
  }
  return bundle;
}

CotSample make_sample(const char* lang, int path, Answer answer) {
  CotSample s;
  s.question_id = "q1";
  s.language = LanguageTag{lang};
  s.path_index = path;
  s.answer = answer;
  if (answer) {
    s.explanation = "reasoning in " + std::string(lang) + " #" + std::to_string(path);
  }
  s.raw = "raw";
  return s;
}

// en [A,A,B], zh [A,C,B], fr [A,abstain,A]: winner A, 5 positives, 3 negatives.
std::vector<CotSample> fixture_samples() {
  return {
      make_sample("en", 0, 'A'), make_sample("en", 1, 'A'), make_sample("en", 2, 'B'),
      make_sample("zh", 0, 'A'), make_sample("zh", 1, 'C'), make_sample("zh", 2, 'B'),
      make_sample("fr", 0, 'A'), make_sample("fr", 1, std::nullopt), make_sample("fr", 2, 'A'),
  };
}

PairBuildContext uncapped_context() {
  PairBuildContext context;
  context.cap_per_question = std::nullopt;
  return context;
}

}  // namespace

TEST_CASE("cross-product cardinality without cap") {
  auto bundle = fixture_bundle();
  auto samples = fixture_samples();
  VoteResult vote = tally(samples);
  REQUIRE(vote.winner == 'A');

  Translator identity(std::make_unique<IdentityTranslationProvider>());
  auto pairs = build_pairs(bundle, vote, samples, identity, uncapped_context());
  CHECK(pairs.size() == 15);  // 5 positives x 3 negatives

  for (const auto& pair : pairs) {
    CHECK(pair.meta.winner_label == 'A');
    CHECK(pair.meta.rejected_label != 'A');
    CHECK(pair.record_language == pair.meta.rejected_ref.language);
    CHECK(pair.meta.vote_margin == 3);  // A:5 vs B:2
    // Chosen text ends with the winner's answer line in the record language.
    auto line = MarkerLexicon::builtin().answer_line(pair.record_language, 'A');
    CHECK(pair.chosen.find(line) != std::string::npos);
  }
}

TEST_CASE("cap truncates deterministically") {
  auto bundle = fixture_bundle();
  auto samples = fixture_samples();
  VoteResult vote = tally(samples);
  Translator identity(std::make_unique<IdentityTranslationProvider>());

  PairBuildContext capped;
  capped.cap_per_question = 9;
  auto pairs = build_pairs(bundle, vote, samples, identity, capped);
  CHECK(pairs.size() == 9);

  auto all_pairs = build_pairs(bundle, vote, samples, identity, uncapped_context());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i] == all_pairs[i]);  // prefix of the full deterministic order
  }
}

TEST_CASE("unanimous question yields zero pairs") {
  auto bundle = fixture_bundle();
  std::vector<CotSample> samples = {make_sample("en", 0, 'A'), make_sample("zh", 0, 'A'),
                                    make_sample("fr", 0, 'A')};
  VoteResult vote = tally(samples);
  Translator identity(std::make_unique<IdentityTranslationProvider>());
  CHECK(build_pairs(bundle, vote, samples, identity, uncapped_context()).empty());

  VoteResult no_winner;
  no_winner.question_id = "q1";
  CHECK(build_pairs(bundle, no_winner, samples, identity, uncapped_context()).empty());
}

TEST_CASE("identity translator shows source-language routing") {
  auto bundle = fixture_bundle();
  // Positive in zh, negative in en.
  std::vector<CotSample> samples = {make_sample("zh", 0, 'A'), make_sample("zh", 1, 'A'),
                                    make_sample("en", 0, 'B')};
  VoteResult vote = tally(samples);
  REQUIRE(vote.winner == 'A');
  Translator identity(std::make_unique<IdentityTranslationProvider>());
  auto pairs = build_pairs(bundle, vote, samples, identity, uncapped_context());
  REQUIRE(pairs.size() == 2);
  const PreferencePair& pair = pairs.front();
  CHECK(pair.record_language.code == "en");
  CHECK(pair.meta.chosen_source_language.code == "zh");
  // The zh explanation text rides through the identity double verbatim.
  CHECK(pair.chosen.find("reasoning in zh #0") != std::string::npos);
  CHECK(pair.prompt.find("stem-en") != std::string::npos);
  CHECK(pair.rejected.find("reasoning in en #0") != std::string::npos);
  auto rejected_line = MarkerLexicon::builtin().answer_line(LanguageTag{"en"}, 'B');
  CHECK(pair.rejected.find(rejected_line) != std::string::npos);
}

TEST_CASE("tagging translator marks the destination language") {
  auto bundle = fixture_bundle();
  std::vector<CotSample> samples = {make_sample("zh", 0, 'A'), make_sample("en", 0, 'B')};
  VoteResult vote = tally(samples);
  Translator tagging(std::make_unique<TaggingTranslationProvider>());
  auto pairs = build_pairs(bundle, vote, samples, tagging, uncapped_context());
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].chosen.find("[en]reasoning in zh #0") != std::string::npos);
}

TEST_CASE("same-language pairs skip translation") {
  auto bundle = fixture_bundle();
  std::vector<CotSample> samples = {make_sample("en", 0, 'A'), make_sample("en", 1, 'B')};
  VoteResult vote = tally(samples);
  auto provider = std::make_unique<CountingIdentityProvider>();
  CountingIdentityProvider* counter = provider.get();
  Translator translator(std::move(provider));
  auto pairs = build_pairs(bundle, vote, samples, translator, uncapped_context());
  CHECK(pairs.size() == 1);
  CHECK(counter->calls.load() == 0);
}

TEST_CASE("translator failures become TranslationError") {
  auto bundle = fixture_bundle();
  std::vector<CotSample> samples = {make_sample("zh", 0, 'A'), make_sample("en", 0, 'B')};
  VoteResult vote = tally(samples);
  Translator failing(std::make_unique<FailingProvider>());
  CHECK_THROWS_AS(build_pairs(bundle, vote, samples, failing, uncapped_context()),
                  TranslationError);
}

TEST_CASE("round-robin covers the longer side once") {
  auto bundle = fixture_bundle();
  auto samples = fixture_samples();
  VoteResult vote = tally(samples);
  Translator identity(std::make_unique<IdentityTranslationProvider>());
  PairBuildContext context = uncapped_context();
  context.strategy = PairStrategy::RoundRobin;
  auto pairs = build_pairs(bundle, vote, samples, identity, context);
  CHECK(pairs.size() == 5);  // max(|positives|, |negatives|)
  // Negatives cycle: 3 distinct negatives appear.
  std::set<std::string> negatives;
  for (const auto& pair : pairs) negatives.insert(pair.meta.rejected_ref.str());
  CHECK(negatives.size() == 3);
}

TEST_CASE("build_sft emits one record per positive in its own language") {
  auto bundle = fixture_bundle();
  auto samples = fixture_samples();
  VoteResult vote = tally(samples);
  PairBuildContext context = uncapped_context();
  auto examples = build_sft(bundle, vote, samples, context);
  REQUIRE(examples.size() == 5);
  for (const auto& example : examples) {
    CHECK(example.winner_label == 'A');
    CHECK(example.language == example.source_ref.language);
    // Prompt is rendered from the example's own language variant.
    CHECK(example.prompt.find("stem-" + example.language.code) != std::string::npos);
    auto line = MarkerLexicon::builtin().answer_line(example.language, 'A');
    CHECK(example.target.find(line) != std::string::npos);
  }
  // fr positive present, prompt from the fr variant.
  bool has_fr = false;
  for (const auto& example : examples) has_fr |= example.language.code == "fr";
  CHECK(has_fr);

  VoteResult no_winner;
  no_winner.question_id = "q1";
  CHECK(build_sft(bundle, no_winner, samples, context).empty());
}

TEST_CASE("ground-truth filter keeps exactly the matching winners") {
  // 10 records: 6 with winner == gt ('A'), 4 with winner 'B'.
  auto bundle = fixture_bundle();  // gt = A
  std::map<std::string, const QuestionBundle*> bundles = {{"q1", &bundle}};
  std::vector<SftExample> records;
  for (int i = 0; i < 10; ++i) {
    SftExample e;
    e.question_id = "q1";
    e.language = LanguageTag{"en"};
    e.source_ref = SampleRef{LanguageTag{"en"}, i};
    e.winner_label = i < 6 ? 'A' : 'B';
    records.push_back(e);
  }
  auto kept = filter_by_ground_truth(records, bundles);
  REQUIRE(kept.size() == 6);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    CHECK(kept[i].winner_label == 'A');
    CHECK(kept[i].source_ref.path_index == int(i));  // order preserved
  }
  auto again = filter_by_ground_truth(kept, bundles);
  CHECK(again == kept);  // idempotent

  QuestionBundle no_gt = bundle;
  for (auto& [lang, q] : no_gt.variants) q.ground_truth.reset();
  std::map<std::string, const QuestionBundle*> missing = {{"q1", &no_gt}};
  CHECK_THROWS_AS(filter_by_ground_truth(records, missing), MissingGroundTruthError);
}

TEST_CASE("emit_dataset writes records plus sidecar, byte-stable") {
  TmpDir tmp;
  auto bundle = fixture_bundle();
  auto samples = fixture_samples();
  VoteResult vote = tally(samples);
  Translator identity(std::make_unique<IdentityTranslationProvider>());
  auto pairs = build_pairs(bundle, vote, samples, identity, uncapped_context());

  auto entry = emit_dataset(pairs, tmp.file("dpo.jsonl"));
  CHECK(entry.count == 15);
  auto rows = read_jsonl(tmp.file("dpo.jsonl"));
  auto meta = read_jsonl(tmp.file("dpo.meta.jsonl"));
  REQUIRE(rows.size() == 15);
  REQUIRE(meta.size() == 15);
  for (const auto& row : rows) {
    CHECK(row.contains("instruction"));
    CHECK(row.contains("chosen"));
    CHECK(row.contains("rejected"));
    CHECK(row.size() == 3);  // training format stays minimal
  }

  std::string bytes1 = read_file(tmp.file("dpo.jsonl"));
  auto entry2 = emit_dataset(pairs, tmp.file("dpo.jsonl"));
  CHECK(read_file(tmp.file("dpo.jsonl")) == bytes1);
  CHECK(entry2.digest == entry.digest);

  // Full-corpus invariant: chosen parses to the winner, rejected to something else.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto chosen = parse_cot(rows[i]["chosen"].get<std::string>(), {'A', 'B', 'C'},
                            LanguageTag{meta[i]["record_language"].get<std::string>()});
    auto rejected = parse_cot(rows[i]["rejected"].get<std::string>(), {'A', 'B', 'C'},
                              LanguageTag{meta[i]["record_language"].get<std::string>()});
    CHECK(chosen.answer == 'A');
    REQUIRE(rejected.answer.has_value());
    CHECK(*rejected.answer != 'A');
  }

  auto empty_entry = emit_dataset(std::vector<PreferencePair>{}, tmp.file("empty.jsonl"));
  CHECK(empty_entry.count == 0);
  CHECK(read_file(tmp.file("empty.jsonl")).empty());
}

TEST_CASE("sft dataset format") {
  TmpDir tmp;
  auto bundle = fixture_bundle();
  auto samples = fixture_samples();
  VoteResult vote = tally(samples);
  auto context = uncapped_context();
  auto examples = build_sft(bundle, vote, samples, context);
  auto entry = emit_dataset(examples, tmp.file("sft.jsonl"));
  CHECK(entry.count == 5);
  for (const auto& row : read_jsonl(tmp.file("sft.jsonl"))) {
    CHECK(row.contains("instruction"));
    CHECK(row.contains("output"));
    CHECK(row.size() == 2);
  }
}

TEST_CASE("trainer-config stubs carry the published hyperparameters") {
  TmpDir tmp;
  emit_train_config_stub(TrainKind::Dpo, tmp.file("train_config.dpo"));
  std::string dpo = read_file(tmp.file("train_config.dpo"));
  CHECK(dpo.find("learning_rate=5e-6\n") != std::string::npos);
  CHECK(dpo.find("num_train_epochs=3.0\n") != std::string::npos);
  CHECK(dpo.find("lr_scheduler=cosine\n") != std::string::npos);
  CHECK(dpo.find("warmup_ratio=0.1\n") != std::string::npos);
  CHECK(dpo.find("pref_beta=0.1\n") != std::string::npos);
  CHECK(dpo.find("pref_loss=sigmoid\n") != std::string::npos);
  CHECK(dpo.find("lora_rank=8\n") != std::string::npos);
  CHECK(dpo.find("lora_alpha=16\n") != std::string::npos);
  CHECK(dpo.find("lora_targets=q_proj,v_proj\n") != std::string::npos);

  emit_train_config_stub(TrainKind::Sft, tmp.file("train_config.sft"));
  std::string sft = read_file(tmp.file("train_config.sft"));
  CHECK(sft.find("learning_rate=5e-5\n") != std::string::npos);
  CHECK(sft.find("warmup_ratio=0\n") != std::string::npos);
  CHECK(sft.find("pref_beta") == std::string::npos);
  CHECK(sft.find("pref_loss") == std::string::npos);

  emit_train_config_stub(TrainKind::Dpo, tmp.file("again.dpo"));
  CHECK(read_file(tmp.file("again.dpo")) == dpo);  // identical bytes
}
