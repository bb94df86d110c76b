#pragma once

#include "lae/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace lae {

/// A network plus the stage-1 validation MAE when it is known.
struct Checkpoint {
  Network network;
  std::optional<double> anchor_mae;
};

/// Binary container, little-endian:
///
///   magic        8 bytes  "LAECKPT\0"
///   version      u32      1
///   num_dims     u32      L + 1 for L layers
///   dims         u64[num_dims]   d_in, h1, ..., K
///   freeze       u8       0 | 1
///   has_anchor   u8       0 | 1
///   anchor_mae   f64      present only when has_anchor == 1
///   per layer:   activation u8 (0 none, 1 relu),
///                weights f64[out * in] row-major, bias f64[out]
///
/// Nothing may follow the last layer.
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace lae
