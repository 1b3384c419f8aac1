#include "lab/run_dir.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lle/error.hpp"

namespace lab {
namespace {

std::string hex(const unsigned char* data, unsigned n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < n; ++i) {
    out += digits[data[i] >> 4];
    out += digits[data[i] & 15];
  }
  return out;
}

class Digest {
 public:
  Digest() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      lle::fail(lle::ErrorCode::Io, "sha256 initialization failed");
  }
  ~Digest() { EVP_MD_CTX_free(ctx_); }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  std::string finish() {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned n = 0;
    EVP_DigestFinal_ex(ctx_, out, &n);
    return hex(out, n);
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) lle::fail(lle::ErrorCode::Io, "cannot read " + path.string());
  Digest d;
  std::array<char, 1 << 16> buf;
  while (f) {
    f.read(buf.data(), buf.size());
    d.update(buf.data(), static_cast<std::size_t>(f.gcount()));
  }
  return d.finish();
}

std::string sha256_text(const std::string& text) {
  Digest d;
  d.update(text.data(), text.size());
  return d.finish();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) lle::fail(lle::ErrorCode::Io, "cannot write " + path.string());
  f << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) lle::fail(lle::ErrorCode::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    lle::fail(lle::ErrorCode::Io, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

void Table::write(const fs::path& path) const {
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + columns[j];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + format_double(row[j]);
    out += "\n";
  }
  write_text(path, out);
}

Table Table::read(const fs::path& path) {
  std::istringstream in(read_text(path));
  Table t;
  std::string line;
  if (!std::getline(in, line)) lle::fail(lle::ErrorCode::Io, "empty table " + path.string());
  std::stringstream header(line);
  for (std::string c; std::getline(header, c, ',');) t.columns.push_back(c);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) row.push_back(std::stod(c));
    if (row.size() != t.columns.size()) lle::fail(lle::ErrorCode::Io, "ragged row in " + path.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<double> Table::column(const std::string& name) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] != name) continue;
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
  }
  lle::fail(lle::ErrorCode::InvalidArgument, "no column '" + name + "'");
}

RunManifest::RunManifest(fs::path root, std::string config_hash)
    : root_(std::move(root)), config_hash_(std::move(config_hash)) {}

RunManifest RunManifest::load_or_create(const fs::path& root, const std::string& config_hash) {
  RunManifest m(root, config_hash);
  const fs::path file = root / "manifest.json";
  if (!fs::exists(file)) return m;
  const json j = read_json(file);
  for (const auto& s : j.at("stages")) {
    StageRecord r;
    r.name = s.at("name");
    r.status = s.at("status");
    r.seconds = s.value("seconds", 0.0);
    r.outputs = s.value("outputs", std::vector<std::string>{});
    r.error = s.value("error", "");
    r.config_hash = s.value("config_hash", "");
    m.stages_.push_back(r);
  }
  m.warnings_ = j.value("warnings", std::vector<std::string>{});
  m.files_ = j.value("files", std::map<std::string, std::string>{});
  return m;
}

bool RunManifest::stage_complete(const std::string& name) const {
  for (const auto& s : stages_) {
    if (s.name != name) continue;
    if (s.status != "done" || s.config_hash != config_hash_) return false;
    for (const auto& out : s.outputs) {
      const auto it = files_.find(out);
      if (it == files_.end() || !fs::exists(root_ / out) || sha256_file(root_ / out) != it->second) return false;
    }
    return true;
  }
  return false;
}

void RunManifest::record(const StageRecord& stage) {
  std::erase_if(stages_, [&](const StageRecord& s) { return s.name == stage.name; });
  stages_.push_back(stage);
  stages_.back().config_hash = config_hash_;
  for (const auto& out : stage.outputs)
    if (fs::exists(root_ / out)) files_[out] = sha256_file(root_ / out);
  save();
}

void RunManifest::warn(const std::string& message) {
  if (std::find(warnings_.begin(), warnings_.end(), message) == warnings_.end()) warnings_.push_back(message);
}

void RunManifest::save() const {
  json j;
  j["tool"] = "lle-lab";
  j["version"] = "0.1.0";
  j["config_hash"] = config_hash_;
  j["stages"] = json::array();
  for (const auto& s : stages_) {
    json e = {{"name", s.name}, {"status", s.status}, {"seconds", s.seconds}, {"outputs", s.outputs},
             {"config_hash", s.config_hash}};
    if (!s.error.empty()) e["error"] = s.error;
    j["stages"].push_back(e);
  }
  j["warnings"] = warnings_;
  j["files"] = files_;
  fs::create_directories(root_);
  const fs::path tmp = root_ / "manifest.json.tmp";
  write_json(tmp, j);
  fs::rename(tmp, root_ / "manifest.json");
}

}  // namespace lab
