#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "xalign/types.hpp"

namespace xalign {

// All emitted artifacts preserve key insertion order, so every record schema
// below is byte-stable across runs.
using OJson = nlohmann::ordered_json;

std::vector<OJson> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<OJson>& rows);
std::string jsonl_to_string(const std::vector<OJson>& rows);

// {"id","language","stem","options":[{"label","text"}],"ground_truth","provenance"}
OJson question_to_json(const Question& q);
Question question_from_json(const OJson& j, const std::string& context);

// {"id","language","path","raw","explanation","answer","decode"}
OJson sample_to_json(const CotSample& s);
CotSample sample_from_json(const OJson& j, const std::string& context);

// {"id","counts","winner","tie","abstain","positives","negatives"}
OJson vote_to_json(const VoteResult& v);
VoteResult vote_from_json(const OJson& j, const std::string& context);

// {"id","language","passages"}
OJson evidence_to_json(const EvidenceBlock& e);
EvidenceBlock evidence_from_json(const OJson& j, const std::string& context);

}  // namespace xalign
