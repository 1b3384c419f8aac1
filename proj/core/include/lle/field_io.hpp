#pragma once

#include <filesystem>

#include "lle/grid.hpp"

namespace lle {

struct FieldSnapshot {
  RealPairField field;
  double time = 0.0;
};

// One JSON header line {"N","M","T","t"} followed by N little-endian doubles of u_r, then N of u_i.
void write_field(const std::filesystem::path& path, const RealPairField& field, double time);
FieldSnapshot read_field(const std::filesystem::path& path);

}  // namespace lle
