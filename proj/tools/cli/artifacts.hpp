#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridstack/orchestrator.hpp"

namespace gridstack::cli {

/// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

std::string read_bytes(const std::filesystem::path& path);

/// Output directory built under a sibling staging path and moved into place
/// by commit(). Destroyed without commit, it removes the staging path so a
/// failed run leaves nothing behind.
class ArtifactDir {
 public:
  explicit ArtifactDir(std::filesystem::path target);
  ~ArtifactDir();
  ArtifactDir(const ArtifactDir&) = delete;
  ArtifactDir& operator=(const ArtifactDir&) = delete;

  const std::filesystem::path& path() const { return staging_; }
  /// Writes manifest.json listing every file with its hash, then replaces
  /// the target. Throws std::runtime_error when the target exists and was
  /// not written by this tool.
  void commit(nlohmann::json manifest);

 private:
  std::filesystem::path target_;
  std::filesystem::path staging_;
  bool committed_ = false;
};

/// Fails early when `target` exists and does not look like a previous run.
void check_target(const std::filesystem::path& target);

void write_text(const std::filesystem::path& path, const std::string& text);

/// One line per message: owner, cycle, step, direction and kind.
std::string transcript_text(const NetworkModel& net, const std::vector<std::vector<TranscriptEntry>>& transcripts);

/// Stage summary rows without timings, so reruns give identical bytes.
std::string stage_summary_tsv(const std::vector<std::pair<std::string, const StageResult*>>& stages);

/// Per storage bus: demand, storage injection and resulting net load.
std::string net_load_csv(const NetworkModel& net, const Scenario& scen, const ScheduleSet& s);

}  // namespace gridstack::cli
