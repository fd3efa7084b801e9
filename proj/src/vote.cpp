#include "xalign/vote.hpp"

#include <algorithm>
#include <set>

#include "xalign/errors.hpp"

namespace xalign {

Label tie_break(const std::vector<Label>& tied_labels, const std::vector<CotSample>& samples) {
  if (tied_labels.empty()) throw MixedQuestionError("tie_break: no labels");
  Label best = 0;
  std::size_t best_languages = 0;
  for (Label label : tied_labels) {
    std::set<std::string> languages;
    for (const auto& s : samples) {
      if (s.answer && *s.answer == label) languages.insert(s.language.code);
    }
    if (best == 0 || languages.size() > best_languages ||
        (languages.size() == best_languages && label < best)) {
      best = label;
      best_languages = languages.size();
    }
  }
  return best;
}

VoteResult tally(const std::vector<CotSample>& samples) {
  if (samples.empty()) throw MixedQuestionError("tally: empty sample pool");
  VoteResult result;
  result.question_id = samples.front().question_id;
  for (const auto& s : samples) {
    if (s.question_id != result.question_id) {
      throw MixedQuestionError("tally: mixed question ids " + result.question_id + " and " +
                               s.question_id);
    }
    if (s.answer) {
      ++result.counts[*s.answer];
    } else {
      ++result.abstain_count;
    }
  }

  if (!result.counts.empty()) {
    int max_count = 0;
    for (const auto& [label, n] : result.counts) max_count = std::max(max_count, n);
    std::vector<Label> top;
    for (const auto& [label, n] : result.counts) {
      if (n == max_count) top.push_back(label);
    }
    result.tie = top.size() > 1;
    result.winner = result.tie ? tie_break(top, samples) : top.front();

    for (const auto& s : samples) {
      if (!s.answer) continue;
      SampleRef ref{s.language, s.path_index};
      if (*s.answer == *result.winner) {
        result.positives.push_back(ref);
      } else {
        result.negatives.push_back(ref);
      }
    }
    std::sort(result.positives.begin(), result.positives.end());
    std::sort(result.negatives.begin(), result.negatives.end());
  }
  return result;
}

}  // namespace xalign
