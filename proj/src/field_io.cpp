#include "zklab/field_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "zklab/error.hpp"

static_assert(std::endian::native == std::endian::little, "field container assumes a little-endian host");

namespace zk {

void write_field(const std::string& path, const PlanarField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  const std::int32_t n1 = f.grid.n1, n2 = f.grid.n2;
  out.write(kFieldMagic, 8);
  out.write(reinterpret_cast<const char*>(&n1), 4);
  out.write(reinterpret_cast<const char*>(&n2), 4);
  out.write(reinterpret_cast<const char*>(&f.grid.length1), 8);
  out.write(reinterpret_cast<const char*>(&f.grid.length2), 8);
  out.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * 8));
  if (!out) throw ConfigError("write failed: " + path);
}

PlanarField read_field(const std::string& path, double origin1, double origin2) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("missing field file " + path);
  char magic[8];
  std::int32_t n1 = 0, n2 = 0;
  double l1 = 0.0, l2 = 0.0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&n1), 4);
  in.read(reinterpret_cast<char*>(&n2), 4);
  in.read(reinterpret_cast<char*>(&l1), 8);
  in.read(reinterpret_cast<char*>(&l2), 8);
  if (!in || std::memcmp(magic, kFieldMagic, 8) != 0) throw ConfigError("not a field file: " + path);
  PlanarField f(PlanarGrid(l1, l2, n1, n2, origin1, origin2));
  in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * 8));
  if (!in) throw ConfigError("truncated field file: " + path);
  return f;
}

PlanarField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("missing field file " + path);
  char head[32];
  in.read(head, 32);
  if (!in) throw ConfigError("not a field file: " + path);
  double l1, l2;
  std::memcpy(&l1, head + 16, 8);
  std::memcpy(&l2, head + 24, 8);
  return read_field(path, -0.5 * l1, -0.5 * l2);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  throw ConfigError("csv column missing: " + name);
}

void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  for (std::size_t k = 0; k < t.header.size(); ++k) out << (k ? "," : "") << t.header[k];
  out << "\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw PreconditionError("csv row width mismatch");
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
    out << "\n";
  }
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("missing csv file " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty csv: " + path);
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("bad csv cell '" + cell + "' in " + path);
      }
    }
    if (row.size() != t.header.size()) throw ConfigError("csv row width mismatch in " + path);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace zk
