#include "xalign/dataset.hpp"

#include <fstream>
#include <random>

#include <doctest.h>

#include "support/tmpdir.hpp"
#include "xalign/errors.hpp"
#include "xalign/jsonl.hpp"
#include "xalign/util.hpp"

using namespace xalign;
using testsupport::TmpDir;

namespace {

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& line : lines) out << line << "\n";
}

std::string question_line(const std::string& id, const std::string& lang, const std::string& stem,
                          int n_options, const char* gt = nullptr) {
  OJson j;
  if (!id.empty()) j["id"] = id;
  j["language"] = lang;
  j["stem"] = stem;
  OJson opts = OJson::array();
  for (int i = 0; i < n_options; ++i) {
    opts.push_back({{"label", std::string(1, char('A' + i))},
                    {"text", "option " + std::to_string(i) + " (" + lang + ")"}});
  }
  j["options"] = opts;
  if (gt != nullptr) {
    j["ground_truth"] = gt;
  } else {
    j["ground_truth"] = nullptr;
  }
  j["provenance"] = "native";
  return j.dump();
}

}  // namespace

TEST_CASE("empty file loads to an empty list") {
  TmpDir tmp;
  write_lines(tmp.file("empty.jsonl"), {});
  auto bundles = load_question_set(tmp.file("empty.jsonl"));
  CHECK(bundles.empty());
}

TEST_CASE("parallel variants group into one bundle") {
  TmpDir tmp;
  write_lines(tmp.file("q.jsonl"), {
                                       question_line("q1", "en", "english stem", 4, "B"),
                                       question_line("q1", "zh", "中文题干", 4, "B"),
                                       question_line("q1", "fr", "énoncé français", 4, "B"),
                                   });
  auto bundles = load_question_set(tmp.file("q.jsonl"));
  REQUIRE(bundles.size() == 1);
  const QuestionBundle& b = bundles.front();
  CHECK(b.id == "q1");
  REQUIRE(b.variants.size() == 3);
  const Question& en = b.variant(LanguageTag{"en"});
  CHECK(en.stem == "english stem");
  CHECK(en.options.size() == 4);
  CHECK(en.options[1].label == 'B');
  CHECK(en.options[1].text == "option 1 (en)");
  CHECK(en.ground_truth == 'B');
  CHECK(en.provenance.native());
  CHECK(b.variant(LanguageTag{"zh"}).stem == "中文题干");
  CHECK(b.variant(LanguageTag{"fr"}).language.code == "fr");
  CHECK(b.ground_truth() == 'B');
}

TEST_CASE("option count mismatch across variants is a schema error") {
  TmpDir tmp;
  write_lines(tmp.file("q.jsonl"), {
                                       question_line("q1", "en", "stem", 5, "A"),
                                       question_line("q1", "zh", "题干", 4, "A"),
                                   });
  CHECK_THROWS_AS(load_question_set(tmp.file("q.jsonl")), SchemaError);
}

TEST_CASE("schema violations are rejected") {
  TmpDir tmp;
  SUBCASE("missing field") {
    write_lines(tmp.file("q.jsonl"), {R"({"id":"q1","language":"en","stem":"s"})"});
    CHECK_THROWS_AS(load_question_set(tmp.file("q.jsonl")), SchemaError);
  }
  SUBCASE("label outside A-E") {
    write_lines(tmp.file("q.jsonl"),
                {R"({"id":"q1","language":"en","stem":"s","options":[{"label":"F","text":"x"}],"ground_truth":null,"provenance":"native"})"});
    CHECK_THROWS_AS(load_question_set(tmp.file("q.jsonl")), SchemaError);
  }
  SUBCASE("non-contiguous labels") {
    write_lines(tmp.file("q.jsonl"),
                {R"({"id":"q1","language":"en","stem":"s","options":[{"label":"B","text":"x"},{"label":"C","text":"y"}],"ground_truth":null,"provenance":"native"})"});
    CHECK_THROWS_AS(load_question_set(tmp.file("q.jsonl")), SchemaError);
  }
  SUBCASE("empty stem") {
    write_lines(tmp.file("q.jsonl"), {question_line("q1", "en", "", 3)});
    CHECK_THROWS_AS(load_question_set(tmp.file("q.jsonl")), SchemaError);
  }
  SUBCASE("ground truth outside the label set") {
    write_lines(tmp.file("q.jsonl"), {question_line("q1", "en", "s", 2, "D")});
    CHECK_THROWS_AS(load_question_set(tmp.file("q.jsonl")), SchemaError);
  }
  SUBCASE("six options rejected") {
    write_lines(tmp.file("q.jsonl"),
                {R"({"id":"q1","language":"en","stem":"s","options":[{"label":"A","text":"a"},{"label":"B","text":"b"},{"label":"C","text":"c"},{"label":"D","text":"d"},{"label":"E","text":"e"},{"label":"F","text":"f"}],"ground_truth":null,"provenance":"native"})"});
    CHECK_THROWS_AS(load_question_set(tmp.file("q.jsonl")), SchemaError);
  }
  SUBCASE("bad json") {
    write_lines(tmp.file("q.jsonl"), {"{not json"});
    CHECK_THROWS_AS(load_question_set(tmp.file("q.jsonl")), SchemaError);
  }
}

TEST_CASE("duplicate id+language is rejected") {
  TmpDir tmp;
  write_lines(tmp.file("q.jsonl"), {
                                       question_line("q1", "en", "stem", 3),
                                       question_line("q1", "en", "stem again", 3),
                                   });
  CHECK_THROWS_AS(load_question_set(tmp.file("q.jsonl")), DuplicateIdError);
}

TEST_CASE("required language set enforced") {
  TmpDir tmp;
  write_lines(tmp.file("q.jsonl"), {question_line("q1", "en", "stem", 3)});
  LoadOptions options;
  options.required_languages = {LanguageTag{"en"}, LanguageTag{"zh"}};
  CHECK_THROWS_AS(load_question_set(tmp.file("q.jsonl"), QuestionFormat::NativeJsonl, options),
                  LanguageMismatchError);
}

TEST_CASE("ids synthesized from dataset name and index") {
  TmpDir tmp;
  write_lines(tmp.file("q.jsonl"), {
                                       question_line("", "en", "first", 3),
                                       question_line("", "en", "second", 3),
                                   });
  LoadOptions options;
  options.dataset_name = "medqa";
  auto bundles = load_question_set(tmp.file("q.jsonl"), QuestionFormat::NativeJsonl, options);
  REQUIRE(bundles.size() == 2);
  CHECK(bundles[0].id == "medqa-00000");
  CHECK(bundles[1].id == "medqa-00001");
}

TEST_CASE("id sequence is stable across loads") {
  TmpDir tmp;
  write_lines(tmp.file("q.jsonl"), {
                                       question_line("zebra", "en", "z", 3),
                                       question_line("apple", "en", "a", 3),
                                       question_line("mango", "en", "m", 3),
                                   });
  auto first = load_question_set(tmp.file("q.jsonl"));
  auto second = load_question_set(tmp.file("q.jsonl"));
  REQUIRE(first.size() == 3);
  CHECK(first[0].id == "zebra");  // file order, not sorted
  CHECK(first[1].id == "apple");
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i].id == second[i].id);
}

TEST_CASE("attach_translations merges variants") {
  TmpDir tmp;
  write_lines(tmp.file("q.jsonl"), {question_line("q1", "en", "stem", 3, "A")});
  auto bundles = load_question_set(tmp.file("q.jsonl"));

  Question zh;
  zh.id = "q1";
  zh.language = LanguageTag{"zh"};
  zh.stem = "题干";
  zh.options = {{'A', "甲"}, {'B', "乙"}, {'C', "丙"}};
  zh.ground_truth = 'A';
  zh.provenance = Provenance::translated(LanguageTag{"en"});

  auto merged = attach_translations(bundles, {zh});
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].variants.size() == 2);
  CHECK(merged[0].variant(LanguageTag{"zh"}).provenance.translated_from ==
        LanguageTag{"en"});

  SUBCASE("unknown id") {
    Question other = zh;
    other.id = "nope";
    CHECK_THROWS_AS(attach_translations(bundles, {other}), UnknownIdError);
  }
  SUBCASE("duplicate variant") {
    CHECK_THROWS_AS(attach_translations(merged, {zh}), DuplicateVariantError);
  }
  SUBCASE("inconsistent option count") {
    Question bad = zh;
    bad.language = LanguageTag{"fr"};
    bad.options = {{'A', "a"}, {'B', "b"}};
    CHECK_THROWS_AS(attach_translations(merged, {bad}), SchemaError);
  }
}

TEST_CASE("round-trip: save then load preserves structure") {
  TmpDir tmp;
  std::mt19937 rng(777);
  std::uniform_int_distribution<int> n_lang_dist(1, 4);
  std::uniform_int_distribution<int> n_opt_dist(2, 5);
  std::uniform_int_distribution<int> coin(0, 1);
  const char* codes[] = {"en", "zh", "fr", "de"};
  const char* stems[] = {"plain ascii", "带中文的题干", "accents: éàü", "日本語を含む"};

  std::vector<LanguageTag> order;
  for (const char* c : codes) order.push_back(LanguageTag{c});

  for (int iter = 0; iter < 25; ++iter) {
    std::vector<QuestionBundle> bundles;
    int n_bundles = 1 + int(rng() % 4);
    for (int b = 0; b < n_bundles; ++b) {
      QuestionBundle bundle;
      bundle.id = "q" + std::to_string(iter) + "-" + std::to_string(b);
      int n_langs = n_lang_dist(rng);
      int n_opts = n_opt_dist(rng);
      bool with_gt = coin(rng) == 1;
      Label gt = Label('A' + int(rng() % n_opts));
      for (int l = 0; l < n_langs; ++l) {
        Question q;
        q.id = bundle.id;
        q.language = LanguageTag{codes[l]};
        q.stem = std::string(stems[rng() % 4]) + " #" + std::to_string(rng() % 1000);
        for (int o = 0; o < n_opts; ++o) {
          q.options.push_back({Label('A' + o), "opt " + std::to_string(rng() % 1000)});
        }
        if (with_gt) q.ground_truth = gt;
        q.provenance = l == 0 ? Provenance::native_origin()
                              : Provenance::translated(LanguageTag{codes[0]});
        bundle.variants.emplace(q.language, std::move(q));
      }
      bundle.validate();
      bundles.push_back(std::move(bundle));
    }
    save_question_set(tmp.file("round.jsonl"), bundles, order);
    auto loaded = load_question_set(tmp.file("round.jsonl"));
    REQUIRE(loaded.size() == bundles.size());
    for (std::size_t i = 0; i < bundles.size(); ++i) CHECK(loaded[i] == bundles[i]);
  }
}

TEST_CASE("question serialization key order is the documented one") {
  Question q;
  q.id = "q1";
  q.language = LanguageTag{"en"};
  q.stem = "s";
  q.options = {{'A', "a"}};
  q.provenance = Provenance::native_origin();
  std::string dumped = question_to_json(q).dump();
  CHECK(dumped ==
        R"({"id":"q1","language":"en","stem":"s","options":[{"label":"A","text":"a"}],"ground_truth":null,"provenance":"native"})");
}

TEST_CASE("evidence loading") {
  TmpDir tmp;
  write_lines(tmp.file("e.jsonl"), {
                                       R"({"id":"q1","language":"en","passages":["p1","p2"]})",
                                       R"({"id":"q1","language":"zh","passages":["中文证据"]})",
                                   });
  auto index = load_evidence(tmp.file("e.jsonl"));
  CHECK(index.size() == 2);
  CHECK(index.at({"q1", LanguageTag{"en"}}).passages.size() == 2);

  write_lines(tmp.file("bad.jsonl"), {R"({"id":"q1","language":"en","passages":[]})"});
  CHECK_THROWS_AS(load_evidence(tmp.file("bad.jsonl")), SchemaError);
}
