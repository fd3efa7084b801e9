#include "xalign/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "xalign/errors.hpp"
#include "xalign/parse.hpp"
#include "xalign/util.hpp"

namespace xalign {

namespace {

void require_same_ids(const PredictionMap& preds, const GoldMap& gold) {
  if (preds.size() != gold.size()) {
    throw IdMismatchError("prediction and gold id sets differ in size (" +
                          std::to_string(preds.size()) + " vs " + std::to_string(gold.size()) +
                          ")");
  }
  for (const auto& [id, _] : gold) {
    if (!preds.count(id)) throw IdMismatchError("missing prediction for id " + id);
  }
}

}  // namespace

double accuracy(const PredictionMap& preds, const GoldMap& gold) {
  require_same_ids(preds, gold);
  if (gold.empty()) return 0.0;
  int correct = 0;
  for (const auto& [id, label] : gold) {
    const Answer& answer = preds.at(id);
    if (answer && *answer == label) ++correct;
  }
  return double(correct) / double(gold.size());
}

double subset_consistency(const PredictionTable& preds, const std::vector<LanguageTag>& subset) {
  if (subset.size() < 2) {
    throw SubsetTooSmallError("subset_consistency needs at least 2 languages, got " +
                              std::to_string(subset.size()));
  }
  std::vector<const PredictionMap*> maps;
  maps.reserve(subset.size());
  for (const auto& lang : subset) {
    auto it = preds.find(lang);
    if (it == preds.end()) throw IdMismatchError("no predictions for language " + lang.code);
    maps.push_back(&it->second);
  }
  const PredictionMap& first = *maps.front();
  for (const auto* m : maps) {
    if (m->size() != first.size()) {
      throw IdMismatchError("prediction id sets differ across subset languages");
    }
  }
  if (first.empty()) return 0.0;
  int agree = 0;
  for (const auto& [id, first_answer] : first) {
    bool all_equal = first_answer.has_value();
    for (std::size_t k = 1; k < maps.size() && all_equal; ++k) {
      auto it = maps[k]->find(id);
      if (it == maps[k]->end()) throw IdMismatchError("missing prediction for id " + id);
      all_equal = it->second.has_value() && *it->second == *first_answer;
    }
    if (all_equal) ++agree;
  }
  return double(agree) / double(first.size());
}

double consistency_s(const PredictionTable& preds, int s) {
  const int language_count = int(preds.size());
  if (s < 2 || s > language_count) {
    throw SubsetTooSmallError("consistency_s requires 2 <= s <= " +
                              std::to_string(language_count) + ", got " + std::to_string(s));
  }
  std::vector<LanguageTag> languages;
  languages.reserve(preds.size());
  for (const auto& [lang, _] : preds) languages.push_back(lang);

  double sum = 0.0;
  int subsets = 0;
  std::vector<LanguageTag> subset;
  // Iterative enumeration of all size-s combinations in lexicographic order.
  std::vector<int> idx(static_cast<std::size_t>(s), 0);
  for (int i = 0; i < s; ++i) idx[std::size_t(i)] = i;
  for (;;) {
    subset.clear();
    for (int i : idx) subset.push_back(languages[std::size_t(i)]);
    sum += subset_consistency(preds, subset);
    ++subsets;
    int k = s - 1;
    while (k >= 0 && idx[std::size_t(k)] == language_count - s + k) --k;
    if (k < 0) break;
    ++idx[std::size_t(k)];
    for (int j = k + 1; j < s; ++j) idx[std::size_t(j)] = idx[std::size_t(j - 1)] + 1;
  }
  return sum / double(subsets);
}

double ac3(double acc, double cons) {
  if (acc + cons == 0.0) return 0.0;
  return 2.0 * acc * cons / (acc + cons);
}

std::map<LanguageTag, double> language_share(const std::vector<VoteResult>& votes) {
  std::map<LanguageTag, int> counts;
  int total = 0;
  for (const auto& vote : votes) {
    for (const auto& ref : vote.positives) {
      ++counts[ref.language];
      ++total;
    }
  }
  if (total == 0) throw EmptyCorpusError("language_share: no positive samples");
  std::map<LanguageTag, double> shares;
  for (const auto& [lang, n] : counts) {
    shares[lang] = 100.0 * double(n) / double(total);
  }
  return shares;
}

MetricsReport compute_report(const PredictionTable& preds, const GoldMap& gold,
                             const std::vector<LanguageTag>& language_order) {
  MetricsReport report;
  report.n_questions = int(gold.size());
  double sum = 0.0;
  for (const auto& lang : language_order) {
    auto it = preds.find(lang);
    if (it == preds.end()) throw IdMismatchError("no predictions for language " + lang.code);
    double acc = accuracy(it->second, gold);
    report.per_language_accuracy[lang] = acc;
    sum += acc;
    int abstain = 0;
    for (const auto& [_, answer] : it->second) {
      if (!answer) ++abstain;
    }
    report.abstain_counts[lang] = abstain;
  }
  const int language_count = int(language_order.size());
  report.acc_avg = language_count > 0 ? sum / double(language_count) : 0.0;
  for (int s = 2; s <= language_count; ++s) {
    double cons = consistency_s(preds, s);
    report.consistency[s] = cons;
    report.ac3[s] = ac3(report.acc_avg, cons);
  }
  return report;
}

EvalOutcome run_eval(const std::vector<QuestionBundle>& bundles, Gateway& gateway,
                     const TemplateStore& templates, const MarkerLexicon& lexicon,
                     const EvalOptions& options) {
  GoldMap gold;
  for (const auto& bundle : bundles) {
    auto gt = bundle.ground_truth();
    if (!gt) {
      throw MissingGroundTruthError("bundle " + bundle.id + " has no ground truth; cannot eval");
    }
    gold[bundle.id] = *gt;
  }

  DecodeParams decode = options.decode;
  decode.n_paths = 1;

  struct Task {
    const QuestionBundle* bundle;
    LanguageTag language;
  };
  std::vector<Task> tasks;
  tasks.reserve(bundles.size() * options.languages.size());
  for (const auto& bundle : bundles) {
    for (const auto& lang : options.languages) {
      tasks.push_back({&bundle, lang});
    }
  }

  std::vector<Answer> answers(tasks.size());
  parallel_for(tasks.size(), options.workers, [&](std::size_t i) {
    const Task& task = tasks[i];
    const Question& question = task.bundle->variant(task.language);
    const EvidenceBlock* evidence = nullptr;
    if (options.mode == PromptMode::WithEvidence && options.evidence != nullptr) {
      auto it = options.evidence->find({question.id, task.language});
      if (it != options.evidence->end()) evidence = &it->second;
    }
    std::string prompt = render_prompt(question, options.mode, evidence, templates);
    std::vector<std::string> texts = gateway.complete(prompt, decode);
    ParseOutcome parsed = parse_cot(texts.front(), question.label_set(), task.language, lexicon);
    answers[i] = parsed.answer;
  });

  EvalOutcome outcome;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    outcome.predictions[tasks[i].language][tasks[i].bundle->id] = answers[i];
  }
  outcome.report = compute_report(outcome.predictions, gold, options.languages);
  return outcome;
}

namespace {

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

}  // namespace

OJson report_to_json(const MetricsReport& report, const std::vector<LanguageTag>& language_order) {
  OJson j;
  j["n_questions"] = report.n_questions;
  OJson acc = OJson::object();
  for (const auto& lang : language_order) {
    acc[lang.code] = report.per_language_accuracy.at(lang);
  }
  j["per_language_accuracy"] = std::move(acc);
  j["acc_avg"] = report.acc_avg;
  OJson cons = OJson::object();
  for (const auto& [s, v] : report.consistency) cons[std::to_string(s)] = v;
  j["consistency"] = std::move(cons);
  OJson a3 = OJson::object();
  for (const auto& [s, v] : report.ac3) a3[std::to_string(s)] = v;
  j["ac3"] = std::move(a3);
  OJson abst = OJson::object();
  for (const auto& lang : language_order) {
    abst[lang.code] = report.abstain_counts.at(lang);
  }
  j["abstain_counts"] = std::move(abst);
  return j;
}

std::string report_to_markdown(const MetricsReport& report,
                               const std::vector<LanguageTag>& language_order) {
  const int language_count = int(language_order.size());
  std::string md = "# Evaluation report\n\n";
  md += "Questions: " + std::to_string(report.n_questions) + "\n\n";

  std::string header = "|";
  std::string rule = "|";
  std::string row = "| accuracy (%)";
  header += " |";
  rule += "---|";
  for (const auto& lang : language_order) {
    header += " " + lang.code + " |";
    rule += "---|";
    row += " | " + pct(report.per_language_accuracy.at(lang));
  }
  header += " ACC_avg | Consistency | AC3 |";
  rule += "---|---|---|";
  row += " | " + pct(report.acc_avg);
  if (language_count >= 2) {
    row += " | " + pct(report.consistency.at(language_count));
    row += " | " + pct(report.ac3.at(language_count));
  } else {
    row += " | n/a | n/a";
  }
  row += " |";
  md += header + "\n" + rule + "\n" + row + "\n";

  if (!report.consistency.empty()) {
    md += "\n## Consistency by subset size\n\n";
    md += "| s | Consistency_s (%) | AC3_s (%) |\n|---|---|---|\n";
    for (const auto& [s, v] : report.consistency) {
      md += "| " + std::to_string(s) + " | " + pct(v) + " | " + pct(report.ac3.at(s)) + " |\n";
    }
  }

  md += "\n## Abstentions\n\n| language | abstained |\n|---|---|\n";
  for (const auto& lang : language_order) {
    md += "| " + lang.code + " | " + std::to_string(report.abstain_counts.at(lang)) + " |\n";
  }
  return md;
}

OJson language_share_to_json(const std::map<LanguageTag, double>& shares, int total_positives) {
  OJson j;
  j["total_positives"] = total_positives;
  OJson s = OJson::object();
  for (const auto& [lang, share] : shares) s[lang.code] = share;
  j["shares"] = std::move(s);
  return j;
}

}  // namespace xalign
