#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "xalign/config.hpp"
#include "xalign/errors.hpp"
#include "xalign/pipeline.hpp"

namespace {

struct CliFlags {
  std::string config_path;
  std::string workspace_dir;
  bool force = false;
  bool skip_ties = false;
  bool gt_filter = false;
  std::string strategy;
  int cap = -1;  // -1 = not given, 0 = unlimited
  std::string languages_csv;
  std::string mode;
  std::string evidence_path;
};

void apply_overrides(xalign::RunConfig& config, const CliFlags& flags) {
  if (flags.skip_ties) config.pairs.skip_ties = true;
  if (flags.gt_filter) config.pairs.gt_filter = true;
  if (!flags.strategy.empty()) {
    config.pairs.strategy = xalign::pair_strategy_from_string(flags.strategy);
  }
  if (flags.cap == 0) {
    config.pairs.cap_per_question = std::nullopt;
  } else if (flags.cap > 0) {
    config.pairs.cap_per_question = flags.cap;
  }
  if (!flags.languages_csv.empty()) {
    config.languages.clear();
    std::size_t start = 0;
    const std::string& csv = flags.languages_csv;
    while (start <= csv.size()) {
      std::size_t comma = csv.find(',', start);
      std::string item =
          csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!item.empty()) config.languages.push_back(xalign::LanguageTag::parse(item));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (!flags.mode.empty()) config.prompt.mode = xalign::prompt_mode_from_string(flags.mode);
  if (!flags.evidence_path.empty()) config.prompt.evidence_path = flags.evidence_path;
  xalign::validate_config(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xalign: cross-lingual self-alignment data pipeline"};
  app.require_subcommand(1);

  CliFlags flags;
  app.add_option("-c,--config", flags.config_path, "run configuration file")->required();
  app.add_option("-w,--workspace", flags.workspace_dir, "workspace directory")->required();
  app.add_flag("--force", flags.force, "recompute even if the manifest says up to date");
  app.add_flag("--skip-ties", flags.skip_ties, "drop tied questions from pair/sft construction");
  app.add_flag("--gt-filter", flags.gt_filter, "keep only records whose winner matches ground truth");
  app.add_option("--strategy", flags.strategy, "pairing strategy: cross-product|round-robin");
  app.add_option("--cap", flags.cap, "max pairs per question (0 = unlimited)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--languages", flags.languages_csv, "comma-separated language tags");
  app.add_option("--mode", flags.mode, "prompt mode: zero-shot|with-evidence");
  app.add_option("--evidence", flags.evidence_path, "evidence JSONL path");

  const char* stage_names[] = {"translate", "sample", "vote", "pairs", "sft", "eval", "report"};
  const char* stage_help[] = {
      "fill in missing language variants of the question set",
      "sample multi-path chain-of-thought generations per language",
      "majority-vote each question's pooled samples",
      "build preference pairs and the DPO trainer-config stub",
      "build supervised fine-tuning records from positive samples",
      "run per-language evaluation and write the metrics report",
      "write language-share statistics from the votes",
  };
  for (std::size_t i = 0; i < 7; ++i) {
    auto* sub = app.add_subcommand(stage_names[i], stage_help[i]);
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    xalign::Stage stage = xalign::stage_from_string(app.get_subcommands().front()->get_name());
    xalign::RunConfig config = xalign::load_config(flags.config_path);
    apply_overrides(config, flags);
    xalign::Workspace workspace{flags.workspace_dir};
    xalign::run_stage(stage, config, workspace, flags.force);
    return 0;
  } catch (const xalign::TransportError& e) {
    std::cerr << "network failure: " << e.what() << "\n";
    return 2;
  } catch (const xalign::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
