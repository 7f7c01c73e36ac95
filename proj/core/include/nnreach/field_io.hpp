#pragma once

#include <filesystem>
#include <iosfwd>

#include "nnreach/grid.hpp"

namespace nnreach {

/// CSV with header i0..,x0..,value and one row per node in flat order.
/// Values are written with 17 significant digits.
void write_field_csv(const ScalarField& field, std::ostream& out);
void write_field_csv(const ScalarField& field, const std::filesystem::path& path);
/// Reads a CSV written by write_field_csv back onto `grid`.
ScalarField read_field_csv(const GridPtr& grid, const std::filesystem::path& path, double time_tag = 0.0);

/// CSV with header i0..,x0..,inside.
void write_mask_csv(const Mask& mask, const std::filesystem::path& path);

}  // namespace nnreach
