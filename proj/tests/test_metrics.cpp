#include "xalign/metrics.hpp"

#include <cmath>
#include <random>

#include <doctest.h>

#include "support/oracles.hpp"
#include "xalign/errors.hpp"

using namespace xalign;
using namespace testsupport;

namespace {

const LanguageTag kEn{"en"};
const LanguageTag kZh{"zh"};
const LanguageTag kFr{"fr"};

// q1: en=A zh=A fr=B; q2: all C.
PredictionTable small_table() {
  PredictionTable t;
  t[kEn] = {{"q1", 'A'}, {"q2", 'C'}};
  t[kZh] = {{"q1", 'A'}, {"q2", 'C'}};
  t[kFr] = {{"q1", 'B'}, {"q2", 'C'}};
  return t;
}

PredictionTable random_table(std::mt19937& rng, int language_count, int n_questions) {
  std::uniform_int_distribution<int> answer_dist(0, 4);  // 4 = abstain
  const char* codes[] = {"en", "zh", "fr", "it", "de", "ja"};
  PredictionTable table;
  for (int l = 0; l < language_count; ++l) {
    PredictionMap preds;
    for (int q = 0; q < n_questions; ++q) {
      int a = answer_dist(rng);
      preds["q" + std::to_string(q)] = a == 4 ? Answer{} : Answer{Label('A' + a)};
    }
    table[LanguageTag{codes[l]}] = std::move(preds);
  }
  return table;
}

}  // namespace

TEST_CASE("accuracy basics") {
  GoldMap gold;
  PredictionMap all_right, all_abstain;
  for (int i = 0; i < 10; ++i) {
    std::string id = "q" + std::to_string(i);
    gold[id] = 'B';
    all_right[id] = 'B';
    all_abstain[id] = std::nullopt;
  }
  CHECK(accuracy(all_right, gold) == 1.0);
  CHECK(accuracy(all_abstain, gold) == 0.0);

  GoldMap gold50;
  PredictionMap preds50;
  for (int i = 0; i < 50; ++i) {
    std::string id = "q" + std::to_string(i);
    gold50[id] = 'A';
    preds50[id] = i < 31 ? Answer{'A'} : Answer{'B'};
  }
  CHECK(accuracy(preds50, gold50) == 0.62);
}

TEST_CASE("accuracy id mismatch") {
  GoldMap gold = {{"q1", 'A'}};
  PredictionMap preds = {{"q2", 'A'}};
  CHECK_THROWS_AS(accuracy(preds, gold), IdMismatchError);
  PredictionMap extra = {{"q1", 'A'}, {"q2", 'A'}};
  CHECK_THROWS_AS(accuracy(extra, gold), IdMismatchError);
}

TEST_CASE("subset consistency on the hand fixture") {
  PredictionTable t = small_table();
  CHECK(subset_consistency(t, {kEn, kZh}) == 1.0);
  CHECK(subset_consistency(t, {kEn, kFr}) == 0.5);
  CHECK(subset_consistency(t, {kZh, kFr}) == 0.5);
  CHECK(subset_consistency(t, {kEn, kZh, kFr}) == 0.5);
  CHECK(consistency_s(t, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(consistency_s(t, 3) == subset_consistency(t, {kEn, kZh, kFr}));
}

TEST_CASE("abstentions always disagree") {
  PredictionTable t;
  t[kEn] = {{"q1", std::nullopt}};
  t[kZh] = {{"q1", std::nullopt}};
  CHECK(subset_consistency(t, {kEn, kZh}) == 0.0);
}

TEST_CASE("subset size bounds") {
  PredictionTable t = small_table();
  CHECK_THROWS_AS(subset_consistency(t, {kEn}), SubsetTooSmallError);
  CHECK_THROWS_AS(consistency_s(t, 1), SubsetTooSmallError);
  CHECK_THROWS_AS(consistency_s(t, 4), SubsetTooSmallError);
}

TEST_CASE("ac3 identities") {
  CHECK(ac3(0.0, 0.9) == 0.0);
  CHECK(ac3(0.9, 0.0) == 0.0);
  CHECK(ac3(0.0, 0.0) == 0.0);
  for (double x : {0.1, 0.25, 0.5, 0.62, 1.0}) {
    CHECK(ac3(x, x) == doctest::Approx(x).epsilon(1e-15));
  }
  CHECK(std::abs(ac3(0.5, 2.0 / 3.0) - 4.0 / 7.0) < 1e-9);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double a = dist(rng), c = dist(rng);
    double v = ac3(a, c);
    CHECK(v == ac3(c, a));
    CHECK(v >= std::min(a, c) - 1e-12);
    CHECK(v <= std::max(a, c) + 1e-12);
  }
}

TEST_CASE("consistency matches the brute-force oracle") {
  std::mt19937 rng(20240202);
  std::uniform_int_distribution<int> lang_dist(2, 6);
  std::uniform_int_distribution<int> n_dist(1, 100);
  for (int iter = 0; iter < 30; ++iter) {
    int language_count = lang_dist(rng);
    PredictionTable table = random_table(rng, language_count, n_dist(rng));
    for (int s = 2; s <= language_count; ++s) {
      double got = consistency_s(table, s);
      double expected = oracle_consistency_s(table, s);
      CHECK(std::abs(got - expected) <= 1e-12);
    }
  }
  CHECK(oracle_subset_count(6, 2) == 15);
  CHECK(oracle_subset_count(6, 3) == 20);
}

TEST_CASE("relabeling invariance") {
  std::mt19937 rng(31337);
  PredictionTable table = random_table(rng, 3, 40);
  GoldMap gold;
  std::uniform_int_distribution<int> gold_dist(0, 3);
  for (const auto& [id, _] : table.begin()->second) gold[id] = Label('A' + gold_dist(rng));

  // A fixed label permutation applied everywhere.
  auto permute = [](Label l) -> Label {
    switch (l) {
      case 'A': return 'C';
      case 'B': return 'A';
      case 'C': return 'D';
      case 'D': return 'B';
      default: return l;
    }
  };
  PredictionTable permuted;
  for (const auto& [lang, preds] : table) {
    for (const auto& [id, answer] : preds) {
      permuted[lang][id] = answer ? Answer{permute(*answer)} : Answer{};
    }
  }
  GoldMap permuted_gold;
  for (const auto& [id, label] : gold) permuted_gold[id] = permute(label);

  for (const auto& [lang, preds] : table) {
    CHECK(accuracy(preds, gold) == accuracy(permuted.at(lang), permuted_gold));
  }
  for (int s = 2; s <= 3; ++s) {
    CHECK(consistency_s(table, s) == consistency_s(permuted, s));
  }
}

TEST_CASE("duplicated language column never decreases agreement") {
  std::mt19937 rng(4242);
  PredictionTable table = random_table(rng, 4, 30);
  LanguageTag dup{"xx"};
  PredictionTable grown = table;
  grown[dup] = table.at(kEn);  // exact copy of en

  std::vector<LanguageTag> languages;
  for (const auto& [lang, _] : table) languages.push_back(lang);
  for (const auto& subset : oracle_subsets(languages, 2)) {
    if (std::find(subset.begin(), subset.end(), kEn) == subset.end()) continue;
    auto with_dup = subset;
    with_dup.push_back(dup);
    CHECK(subset_consistency(grown, with_dup) == subset_consistency(table, subset));
  }
}

TEST_CASE("language share") {
  auto vote_with_positives = [](const std::string& id,
                                std::vector<std::pair<const char*, int>> refs) {
    VoteResult v;
    v.question_id = id;
    v.winner = 'A';
    v.counts['A'] = int(refs.size());
    for (auto& [lang, path] : refs) v.positives.push_back(SampleRef{LanguageTag{lang}, path});
    return v;
  };

  std::vector<VoteResult> all_en = {vote_with_positives("q1", {{"en", 0}, {"en", 1}})};
  auto shares = language_share(all_en);
  CHECK(shares.size() == 1);
  CHECK(shares.at(kEn) == 100.0);

  std::vector<VoteResult> mixed = {
      vote_with_positives("q1", {{"en", 0}, {"zh", 0}}),
      vote_with_positives("q2", {{"en", 1}, {"fr", 2}}),
  };
  auto mixed_shares = language_share(mixed);
  CHECK(mixed_shares.at(kEn) == 50.0);
  CHECK(mixed_shares.at(kZh) == 25.0);
  CHECK(mixed_shares.at(kFr) == 25.0);

  VoteResult empty;
  empty.question_id = "q1";
  CHECK_THROWS_AS(language_share({empty}), EmptyCorpusError);
}

TEST_CASE("compute_report wires per-language accuracy, avg, consistency, ac3") {
  PredictionTable t = small_table();
  GoldMap gold = {{"q1", 'A'}, {"q2", 'C'}};
  MetricsReport report = compute_report(t, gold, {kEn, kZh, kFr});
  CHECK(report.n_questions == 2);
  CHECK(report.per_language_accuracy.at(kEn) == 1.0);
  CHECK(report.per_language_accuracy.at(kZh) == 1.0);
  CHECK(report.per_language_accuracy.at(kFr) == 0.5);
  CHECK(report.acc_avg == doctest::Approx(2.5 / 3.0).epsilon(1e-15));
  CHECK(report.consistency.at(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(report.consistency.at(3) == 0.5);
  CHECK(report.ac3.at(3) ==
        doctest::Approx(ac3(report.acc_avg, report.consistency.at(3))).epsilon(1e-15));
  CHECK(report.abstain_counts.at(kEn) == 0);

  // Markdown mirrors the headline numbers.
  std::string md = report_to_markdown(report, {kEn, kZh, kFr});
  CHECK(md.find("ACC_avg") != std::string::npos);
  CHECK(md.find("83.33") != std::string::npos);   // acc_avg percent
  CHECK(md.find("| 2 |") != std::string::npos);   // consistency-by-size table
}
