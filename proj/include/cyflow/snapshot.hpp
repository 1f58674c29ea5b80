#pragma once

#include <filesystem>
#include <iosfwd>

#include "cyflow/field.hpp"

namespace cyflow {

// Binary field snapshot, all integers and floats little-endian:
//   "CYF1" | u32 2n | 2n x u32 N_i | 2n x f64 L_i | prod(N_i) x f64 values
// Values are row-major with axis 1 outermost.

void write_snapshot(std::ostream& out, const ScalarField& field);
void write_snapshot(const std::filesystem::path& path, const ScalarField& field);

ScalarField read_snapshot(std::istream& in);
ScalarField read_snapshot(const std::filesystem::path& path);

/// Reads a snapshot and requires it to match `grid` exactly.
ScalarField read_snapshot(const std::filesystem::path& path,
                          const GridPtr& grid);

}  // namespace cyflow
