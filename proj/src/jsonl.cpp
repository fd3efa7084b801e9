#include "xalign/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "xalign/errors.hpp"
#include "xalign/util.hpp"

namespace xalign {

namespace {

const OJson& require(const OJson& j, const char* key, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(context + ": missing field '" + key + "'");
  return *it;
}

std::string require_string(const OJson& j, const char* key, const std::string& context) {
  const OJson& v = require(j, key, context);
  if (!v.is_string()) throw SchemaError(context + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

Label label_from_string(const std::string& s, const std::string& context) {
  if (s.size() != 1 || !is_valid_label(s[0])) {
    throw SchemaError(context + ": bad option label '" + s + "'");
  }
  return s[0];
}

}  // namespace

std::vector<OJson> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<OJson> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    OJson j = OJson::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": invalid JSON");
    }
    rows.push_back(std::move(j));
  }
  return rows;
}

std::string jsonl_to_string(const std::vector<OJson>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump();
    out += '\n';
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<OJson>& rows) {
  atomic_write_file(path, jsonl_to_string(rows));
}

OJson question_to_json(const Question& q) {
  OJson j;
  j["id"] = q.id;
  j["language"] = q.language.code;
  j["stem"] = q.stem;
  OJson opts = OJson::array();
  for (const auto& o : q.options) {
    OJson oj;
    oj["label"] = std::string(1, o.label);
    oj["text"] = o.text;
    opts.push_back(std::move(oj));
  }
  j["options"] = std::move(opts);
  if (q.ground_truth) {
    j["ground_truth"] = std::string(1, *q.ground_truth);
  } else {
    j["ground_truth"] = nullptr;
  }
  if (q.provenance.native()) {
    j["provenance"] = "native";
  } else {
    j["provenance"] = OJson{{"translated_from", q.provenance.translated_from->code}};
  }
  return j;
}

Question question_from_json(const OJson& j, const std::string& context) {
  Question q;
  q.id = require_string(j, "id", context);
  q.language = LanguageTag::parse(require_string(j, "language", context));
  q.stem = require_string(j, "stem", context);
  const OJson& opts = require(j, "options", context);
  if (!opts.is_array()) throw SchemaError(context + ": 'options' must be an array");
  for (const auto& oj : opts) {
    Option o;
    o.label = label_from_string(require_string(oj, "label", context), context);
    o.text = require_string(oj, "text", context);
    q.options.push_back(std::move(o));
  }
  const OJson& gt = require(j, "ground_truth", context);
  if (!gt.is_null()) {
    if (!gt.is_string()) throw SchemaError(context + ": 'ground_truth' must be string or null");
    q.ground_truth = label_from_string(gt.get<std::string>(), context);
  }
  const OJson& prov = require(j, "provenance", context);
  if (prov.is_string() && prov.get<std::string>() == "native") {
    q.provenance = Provenance::native_origin();
  } else if (prov.is_object() && prov.contains("translated_from")) {
    q.provenance = Provenance::translated(
        LanguageTag::parse(require_string(prov, "translated_from", context)));
  } else {
    throw SchemaError(context + ": bad 'provenance'");
  }
  return q;
}

OJson sample_to_json(const CotSample& s) {
  OJson j;
  j["id"] = s.question_id;
  j["language"] = s.language.code;
  j["path"] = s.path_index;
  j["raw"] = s.raw;
  if (s.explanation) {
    j["explanation"] = *s.explanation;
  } else {
    j["explanation"] = nullptr;
  }
  if (s.answer) {
    j["answer"] = std::string(1, *s.answer);
  } else {
    j["answer"] = nullptr;
  }
  OJson d;
  d["temperature"] = s.decode.temperature;
  d["top_p"] = s.decode.top_p;
  d["max_new_tokens"] = s.decode.max_new_tokens;
  j["decode"] = std::move(d);
  return j;
}

CotSample sample_from_json(const OJson& j, const std::string& context) {
  CotSample s;
  s.question_id = require_string(j, "id", context);
  s.language = LanguageTag::parse(require_string(j, "language", context));
  const OJson& path = require(j, "path", context);
  if (!path.is_number_integer()) throw SchemaError(context + ": 'path' must be an integer");
  s.path_index = path.get<int>();
  s.raw = require_string(j, "raw", context);
  const OJson& expl = require(j, "explanation", context);
  if (!expl.is_null()) s.explanation = expl.get<std::string>();
  const OJson& ans = require(j, "answer", context);
  if (!ans.is_null()) s.answer = label_from_string(ans.get<std::string>(), context);
  const OJson& d = require(j, "decode", context);
  s.decode.temperature = require(d, "temperature", context).get<double>();
  s.decode.top_p = require(d, "top_p", context).get<double>();
  s.decode.max_new_tokens = require(d, "max_new_tokens", context).get<int>();
  return s;
}

OJson vote_to_json(const VoteResult& v) {
  OJson j;
  j["id"] = v.question_id;
  OJson counts = OJson::object();
  for (const auto& [label, n] : v.counts) counts[std::string(1, label)] = n;
  j["counts"] = std::move(counts);
  if (v.winner) {
    j["winner"] = std::string(1, *v.winner);
  } else {
    j["winner"] = nullptr;
  }
  j["tie"] = v.tie;
  j["abstain"] = v.abstain_count;
  OJson pos = OJson::array();
  for (const auto& r : v.positives) pos.push_back(r.str());
  j["positives"] = std::move(pos);
  OJson neg = OJson::array();
  for (const auto& r : v.negatives) neg.push_back(r.str());
  j["negatives"] = std::move(neg);
  return j;
}

VoteResult vote_from_json(const OJson& j, const std::string& context) {
  VoteResult v;
  v.question_id = require_string(j, "id", context);
  const OJson& counts = require(j, "counts", context);
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    v.counts[label_from_string(it.key(), context)] = it.value().get<int>();
  }
  const OJson& w = require(j, "winner", context);
  if (!w.is_null()) v.winner = label_from_string(w.get<std::string>(), context);
  v.tie = require(j, "tie", context).get<bool>();
  v.abstain_count = require(j, "abstain", context).get<int>();
  for (const auto& r : require(j, "positives", context)) {
    v.positives.push_back(SampleRef::parse(r.get<std::string>()));
  }
  for (const auto& r : require(j, "negatives", context)) {
    v.negatives.push_back(SampleRef::parse(r.get<std::string>()));
  }
  return v;
}

OJson evidence_to_json(const EvidenceBlock& e) {
  OJson j;
  j["id"] = e.question_id;
  j["language"] = e.language.code;
  j["passages"] = e.passages;
  return j;
}

EvidenceBlock evidence_from_json(const OJson& j, const std::string& context) {
  EvidenceBlock e;
  e.question_id = require_string(j, "id", context);
  e.language = LanguageTag::parse(require_string(j, "language", context));
  const OJson& p = require(j, "passages", context);
  if (!p.is_array() || p.empty()) {
    throw SchemaError(context + ": 'passages' must be a non-empty array");
  }
  for (const auto& passage : p) e.passages.push_back(passage.get<std::string>());
  return e;
}

}  // namespace xalign
