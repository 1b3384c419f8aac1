#include "lle/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "lle/error.hpp"

namespace lle {
namespace {

void write_doubles(std::ofstream& out, const std::vector<double>& data) {
  for (double x : data) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

std::vector<double> read_doubles(std::ifstream& in, std::size_t n) {
  std::vector<double> data(n);
  for (auto& x : data) {
    std::uint64_t bits;
    in.read(reinterpret_cast<char*>(&bits), sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    std::memcpy(&x, &bits, sizeof x);
  }
  return data;
}

}  // namespace

void write_field(const std::filesystem::path& path, const RealPairField& field, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write field file " + path.string());
  const auto& g = field.grid();
  nlohmann::json header = {{"N", g.num_points()}, {"M", g.num_cells()}, {"T", g.cell_period()},
                           {"t", time}};
  out << header.dump() << '\n';
  write_doubles(out, field.component(0));
  write_doubles(out, field.component(1));
  if (!out) fail(ErrorCode::Io, "failed writing field file " + path.string());
}

FieldSnapshot read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open field file " + path.string());
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Io, "malformed field header in " + path.string() + ": " + e.what());
  }
  const auto n = header.at("N").get<std::size_t>();
  const auto m = header.at("M").get<std::size_t>();
  PeriodicGrid grid(n, header.at("T").get<double>(), m);
  auto re = read_doubles(in, n);
  auto im = read_doubles(in, n);
  if (!in) fail(ErrorCode::Io, "truncated field file " + path.string());
  return {RealPairField::from_components(grid, re, im), header.at("t").get<double>()};
}

}  // namespace lle
