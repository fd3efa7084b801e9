#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "xalign/config.hpp"
#include "xalign/jsonl.hpp"

namespace xalign {

enum class Stage { Translate, Sample, Vote, Pairs, Sft, Eval, Report };

Stage stage_from_string(const std::string& name);
std::string stage_name(Stage stage);

// A directory of line-delimited artifacts plus manifest.json. One process
// owns a workspace at a time via a pid lock file; a lock left by a dead
// process is reclaimed.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path dir);
  ~Workspace();
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file(const std::string& name) const { return dir_ / name; }

  // stage name -> manifest entry
  std::map<std::string, OJson> load_manifest() const;
  void save_manifest(const std::map<std::string, OJson>& stages) const;

 private:
  std::filesystem::path dir_;
  std::filesystem::path lock_path_;
  bool locked_ = false;
};

// Runs one stage. A stage whose recorded inputs, parameters, and outputs all
// match the manifest is a no-op unless force is set. Throws
// MissingPrerequisiteError when an upstream artifact is absent.
void run_stage(Stage stage, const RunConfig& config, Workspace& workspace, bool force = false);

}  // namespace xalign
