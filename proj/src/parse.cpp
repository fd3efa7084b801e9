#include "xalign/parse.hpp"

#include <algorithm>
#include <cctype>

#include "xalign/util.hpp"

namespace xalign {

namespace {

bool ci_byte_eq(char a, char b) {
  auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c; };
  return lower(a) == lower(b);
}

// Last occurrence of any marker; ASCII bytes compare case-insensitively,
// multi-byte UTF-8 sequences compare exactly.
struct MarkerHit {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::optional<MarkerHit> find_last_marker(std::string_view text,
                                          const std::vector<std::string>& markers) {
  std::optional<MarkerHit> best;
  for (const auto& marker : markers) {
    if (marker.empty() || marker.size() > text.size()) continue;
    for (std::size_t pos = 0; pos + marker.size() <= text.size(); ++pos) {
      bool match = true;
      for (std::size_t k = 0; k < marker.size(); ++k) {
        if (!ci_byte_eq(text[pos + k], marker[k])) {
          match = false;
          break;
        }
      }
      if (match && (!best || pos >= best->begin)) {
        best = MarkerHit{pos, pos + marker.size()};
      }
    }
  }
  return best;
}

struct Decoded {
  std::vector<char32_t> cps;        // folded codepoints
  std::vector<std::size_t> offset;  // byte offset of each codepoint; sentinel at end
};

Decoded decode_folded(std::string_view s) {
  Decoded d;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6 && i + 1 < s.size()) {
      cp = (char32_t(c & 0x1F) << 6) | (s[i + 1] & 0x3F);
      len = 2;
    } else if ((c >> 4) == 0xE && i + 2 < s.size()) {
      cp = (char32_t(c & 0x0F) << 12) | (char32_t(s[i + 1] & 0x3F) << 6) | (s[i + 2] & 0x3F);
      len = 3;
    } else if ((c >> 3) == 0x1E && i + 3 < s.size()) {
      cp = (char32_t(c & 0x07) << 18) | (char32_t(s[i + 1] & 0x3F) << 12) |
           (char32_t(s[i + 2] & 0x3F) << 6) | (s[i + 3] & 0x3F);
      len = 4;
    }
    d.cps.push_back(fold_fullwidth(cp));
    d.offset.push_back(i);
    i += len;
  }
  d.offset.push_back(s.size());
  return d;
}

bool is_ascii_alnum(char32_t cp) {
  return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
}

bool is_cjk_punct(char32_t cp) {
  switch (cp) {
    case 0x3001:  // 、
    case 0x3002:  // 。
    case 0x3008:
    case 0x3009:
    case 0x300A:
    case 0x300B:
    case 0x300C:
    case 0x300D:
    case 0x300E:
    case 0x300F:
    case 0x3010:
    case 0x3011:
    case 0x2018:
    case 0x2019:
    case 0x201C:
    case 0x201D:
    case 0x2013:
    case 0x2014:
    case 0x2026:
    case 0x00B7:
      return true;
    default:
      return false;
  }
}

// Single-letter alphanumeric runs within [begin, end) of the folded stream;
// returns the label of the first (or last) run that is a letter in `labels`.
std::optional<Label> scan_label(const Decoded& d, std::size_t begin, std::size_t end,
                                const std::vector<Label>& labels, bool want_last) {
  std::optional<Label> found;
  std::size_t i = begin;
  while (i < end) {
    if (!is_ascii_alnum(d.cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < end && is_ascii_alnum(d.cps[j])) ++j;
    if (j - i == 1) {
      char32_t cp = d.cps[i];
      if (cp >= 'a' && cp <= 'z') cp = cp - 'a' + 'A';
      if (cp >= 'A' && cp <= 'Z') {
        Label candidate = Label(char(cp));
        if (std::find(labels.begin(), labels.end(), candidate) != labels.end()) {
          if (!want_last) return candidate;
          found = candidate;
        }
      }
    }
    i = j;
  }
  return found;
}

bool is_sentence_terminator(char32_t cp) {
  // Full-width ！？．have already been folded to their ASCII forms.
  return cp == '.' || cp == '!' || cp == '?' || cp == 0x3002 || cp == 0x2026;
}

// Strips a leading explanation marker plus its colon, e.g. "Explanation: the
// heart..." -> "the heart...".
std::string strip_explanation_prefix(std::string_view text,
                                     const std::vector<std::string>& markers) {
  std::string trimmed = trim(text);
  for (const auto& marker : markers) {
    if (marker.empty() || trimmed.size() < marker.size()) continue;
    bool match = true;
    for (std::size_t k = 0; k < marker.size(); ++k) {
      if (!ci_byte_eq(trimmed[k], marker[k])) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    std::string_view rest = std::string_view(trimmed).substr(marker.size());
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) {
      rest.remove_prefix(1);
    }
    if (!rest.empty() && rest.front() == ':') {
      rest.remove_prefix(1);
    } else if (rest.size() >= 3 && rest.substr(0, 3) == "\xEF\xBC\x9A") {  // ：
      rest.remove_prefix(3);
    }
    return trim(rest);
  }
  return trimmed;
}

std::optional<std::string> make_explanation(std::string_view text,
                                            const std::vector<std::string>& markers) {
  std::string cleaned = strip_explanation_prefix(text, markers);
  if (cleaned.empty()) return std::nullopt;
  return cleaned;
}

}  // namespace

std::string_view parse_rule_name(ParseRule rule) {
  switch (rule) {
    case ParseRule::Marker:
      return "marker";
    case ParseRule::FallbackLastMention:
      return "fallback-last-mention";
    case ParseRule::None:
      return "none";
  }
  return "none";
}

std::optional<Label> normalize_label(std::string_view token) {
  std::vector<char32_t> kept;
  for (char32_t cp : utf8_decode(token)) {
    cp = fold_fullwidth(cp);
    if (cp < 0x80) {
      unsigned char c = static_cast<unsigned char>(cp);
      if (std::isalnum(c)) {
        kept.push_back(cp);
      }
      // ASCII punctuation, whitespace, and control bytes are stripped.
      continue;
    }
    if (is_cjk_punct(cp)) continue;
    kept.push_back(cp);  // a surviving non-ASCII codepoint disqualifies below
  }
  if (kept.size() != 1) return std::nullopt;
  char32_t cp = kept.front();
  if (cp >= 'a' && cp <= 'z') cp = cp - 'a' + 'A';
  if (cp >= kMinLabel && cp <= kMaxLabel) return Label(char(cp));
  return std::nullopt;
}

ParseOutcome parse_cot(std::string_view raw, const std::vector<Label>& labels,
                       const LanguageTag& language, const MarkerLexicon& lexicon) {
  ParseOutcome outcome;
  if (raw.empty() || labels.empty()) return outcome;

  const auto& answer_markers = lexicon.answer_markers(language);
  const auto& explanation_markers = lexicon.explanation_markers(language);

  if (auto hit = find_last_marker(raw, answer_markers)) {
    Decoded region = decode_folded(raw.substr(hit->end));
    if (auto label = scan_label(region, 0, region.cps.size(), labels, /*want_last=*/false)) {
      outcome.answer = label;
      outcome.rule_fired = ParseRule::Marker;
      outcome.explanation = make_explanation(raw.substr(0, hit->begin), explanation_markers);
      return outcome;
    }
    // A marker with no label after it is an abstention, not a fallback case.
    return outcome;
  }

  // Fallback: last standalone label token in the final sentence.
  Decoded d = decode_folded(raw);
  std::size_t sentence_begin = 0;
  std::size_t best_begin = 0, best_end = 0;
  bool have_sentence = false;
  for (std::size_t i = 0; i <= d.cps.size(); ++i) {
    bool boundary = (i == d.cps.size()) || is_sentence_terminator(d.cps[i]);
    if (!boundary) continue;
    bool has_content = false;
    for (std::size_t k = sentence_begin; k < i; ++k) {
      if (is_ascii_alnum(d.cps[k]) || d.cps[k] >= 0x80) {
        has_content = true;
        break;
      }
    }
    if (has_content) {
      best_begin = sentence_begin;
      best_end = i;
      have_sentence = true;
    }
    sentence_begin = i + 1;
  }
  if (have_sentence) {
    if (auto label = scan_label(d, best_begin, best_end, labels, /*want_last=*/true)) {
      outcome.answer = label;
      outcome.rule_fired = ParseRule::FallbackLastMention;
      outcome.explanation =
          make_explanation(raw.substr(0, d.offset[best_begin]), explanation_markers);
      return outcome;
    }
  }
  return outcome;
}

}  // namespace xalign
