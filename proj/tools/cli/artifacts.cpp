#include "artifacts.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridstack::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::string> relative_files(const fs::path& root) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root).generic_string());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void check_target(const fs::path& target) {
  if (fs::exists(target) && !fs::is_empty(target) && !fs::exists(target / "manifest.json"))
    throw std::runtime_error(target.string() + " exists and is not a gridstack output directory");
}

ArtifactDir::ArtifactDir(fs::path target) : target_(std::move(target)) {
  check_target(target_);
  staging_ = target_;
  staging_ += ".partial";
  fs::remove_all(staging_);
  fs::create_directories(staging_);
}

ArtifactDir::~ArtifactDir() {
  if (committed_) return;
  std::error_code ec;
  fs::remove_all(staging_, ec);
}

void ArtifactDir::commit(nlohmann::json manifest) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& rel : relative_files(staging_))
    files.push_back({{"path", rel}, {"fnv1a64", fnv1a_hex(read_bytes(staging_ / rel))}});
  manifest["files"] = std::move(files);
  write_text(staging_ / "manifest.json", manifest.dump(2) + "\n");
  check_target(target_);
  fs::remove_all(target_);
  if (target_.has_parent_path()) fs::create_directories(target_.parent_path());
  fs::rename(staging_, target_);
  committed_ = true;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string transcript_text(const NetworkModel& net, const std::vector<std::vector<TranscriptEntry>>& transcripts) {
  std::ostringstream out;
  for (std::size_t k = 0; k < transcripts.size(); ++k)
    for (const TranscriptEntry& e : transcripts[k])
      out << "storage=" << net.storage.at(k).id << " cycle=" << e.time.cycle << " step=" << e.time.step
          << " dir=" << (e.direction == Direction::TepoToDepo ? "tepo->depo" : "depo->tepo") << " kind=" << e.kind
          << '\n';
  return out.str();
}

std::string stage_summary_tsv(const std::vector<std::pair<std::string, const StageResult*>>& stages) {
  std::ostringstream out;
  out << "stage\tobjective\toperating_cost\tcurtailed_mwh\tgap\n";
  for (const auto& [name, r] : stages)
    out << name << '\t' << num(r->schedule.objective) << '\t' << num(r->schedule.operating_cost()) << '\t'
        << num(r->schedule.curtailed_energy) << '\t' << num(r->relative_gap) << '\n';
  return out.str();
}

std::string net_load_csv(const NetworkModel& net, const Scenario& scen, const ScheduleSet& s) {
  std::ostringstream out;
  out << "t";
  for (const auto& dev : net.storage)
    out << ",bus" << dev.bus << "_demand,storage" << dev.id << "_injection,bus" << dev.bus << "_net_load";
  out << '\n';
  for (std::size_t t = 0; t < static_cast<std::size_t>(s.intervals); ++t) {
    out << t;
    for (std::size_t k = 0; k < net.storage.size(); ++k) {
      const double demand = scen.demand.at(static_cast<std::size_t>(net.storage[k].bus))[t];
      const double injection = s.discharge[k][t] - s.charge[k][t];
      out << ',' << num(demand) << ',' << num(injection) << ',' << num(demand - injection);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace gridstack::cli
