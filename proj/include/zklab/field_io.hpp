#pragma once

#include <string>
#include <vector>

#include "zklab/grid.hpp"

namespace zk {

// Little-endian: 8-byte magic, int32 N1, int32 N2, float64 L1, float64 L2,
// then N1*N2 float64 values with the second index fastest.
inline constexpr char kFieldMagic[9] = "ZKFIELD1";

void write_field(const std::string& path, const PlanarField& f);
// The header carries no origin; callers pass it (box-centred by default).
PlanarField read_field(const std::string& path);
PlanarField read_field(const std::string& path, double origin1, double origin2);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t column(const std::string& name) const;
};

void write_csv(const std::string& path, const CsvTable& t);
CsvTable read_csv(const std::string& path);
// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace zk
