#include "nnreach/field_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nnreach/errors.hpp"

namespace nnreach {

namespace {

void write_header(const Grid& g, std::ostream& out, const char* last) {
  for (int d = 0; d < g.dims(); ++d) out << 'i' << d << ',';
  for (int d = 0; d < g.dims(); ++d) out << 'x' << d << ',';
  out << last << '\n';
}

void write_node_prefix(const Grid& g, std::size_t flat, std::ostream& out) {
  int idx[kMaxDims];
  g.multi_index(flat, std::span<int>(idx, g.dims()));
  for (int d = 0; d < g.dims(); ++d) out << idx[d] << ',';
  for (int d = 0; d < g.dims(); ++d) out << g.coordinate(d, idx[d]) << ',';
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_field_csv(const ScalarField& field, std::ostream& out) {
  const Grid& g = field.grid();
  out << std::setprecision(17);
  write_header(g, out, "value");
  for (std::size_t i = 0; i < field.size(); ++i) {
    write_node_prefix(g, i, out);
    out << field[i] << '\n';
  }
}

void write_field_csv(const ScalarField& field, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_field_csv(field, out);
}

ScalarField read_field_csv(const GridPtr& grid, const std::filesystem::path& path, double time_tag) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> values;
  values.reserve(grid->num_nodes());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto pos = line.find_last_of(',');
    if (pos == std::string::npos) throw FormatError("field csv: malformed row in " + path.string());
    values.push_back(std::stod(line.substr(pos + 1)));
  }
  if (values.size() != grid->num_nodes()) {
    throw FormatError("field csv: " + path.string() + " has " + std::to_string(values.size()) + " rows, expected " +
                      std::to_string(grid->num_nodes()));
  }
  return ScalarField(grid, std::move(values), time_tag);
}

void write_mask_csv(const Mask& mask, const std::filesystem::path& path) {
  auto out = open_out(path);
  const Grid& g = *mask.grid;
  out << std::setprecision(17);
  write_header(g, out, "inside");
  for (std::size_t i = 0; i < mask.size(); ++i) {
    write_node_prefix(g, i, out);
    out << (mask[i] ? 1 : 0) << '\n';
  }
}

}  // namespace nnreach
