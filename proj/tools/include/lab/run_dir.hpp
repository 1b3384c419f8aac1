#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace lab {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string sha256_file(const fs::path& path);
std::string sha256_text(const std::string& text);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
void write_json(const fs::path& path, const json& value);
json read_json(const fs::path& path);

// Comma separated table with a header row; numbers to 17 significant digits.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  void write(const fs::path& path) const;
  static Table read(const fs::path& path);
  std::vector<double> column(const std::string& name) const;
};

struct StageRecord {
  std::string name;
  std::string status;  // done | failed
  double seconds = 0.0;
  std::vector<std::string> outputs;  // relative to the run directory
  std::string error;
  std::string config_hash;  // configuration the stage ran under
};

// manifest.json: config hash, tool version, per-stage wall clock, warnings and a checksummed inventory.
class RunManifest {
 public:
  RunManifest(fs::path root, std::string config_hash);
  // Earlier stage records are kept; only records made under the same configuration count as complete.
  static RunManifest load_or_create(const fs::path& root, const std::string& config_hash);

  const fs::path& root() const noexcept { return root_; }
  fs::path path(const std::string& relative) const { return root_ / relative; }

  // True if the stage finished under the current configuration and every listed output still has its
  // recorded checksum.
  bool stage_complete(const std::string& name) const;
  void record(const StageRecord& stage);
  void warn(const std::string& message);
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void save() const;

 private:
  fs::path root_;
  std::string config_hash_;
  std::vector<StageRecord> stages_;
  std::vector<std::string> warnings_;
  std::map<std::string, std::string> files_;
};

}  // namespace lab
