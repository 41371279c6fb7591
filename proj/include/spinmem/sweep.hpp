// spinmem: tabulated sweep results and their CSV form.
#pragma once

#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "spinmem/core.hpp"

namespace spinmem {

inline constexpr const char* version_string = "spinmem 1.0.0";

struct SweepResult {
  std::string x_name = "x";
  std::vector<double> x;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::map<std::string, std::string> metadata;

  void add_column(std::string name, std::vector<double> values) {
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
  }

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return columns[i];
    throw Error("sweep has no column '" + name + "'");
  }

  void validate() const {
    for (const auto& c : columns)
      if (c.size() != x.size()) throw Error("sweep columns must have equal length");
  }
};

/// Metadata as '#' comment lines, then a header row and one row per grid point.
inline void write_csv(const SweepResult& r, std::ostream& os) {
  r.validate();
  for (const auto& [k, v] : r.metadata) os << "# " << k << ": " << v << '\n';
  os << r.x_name;
  for (const auto& n : r.names) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    os << fmt::format("{:.12g}", r.x[i]);
    for (const auto& c : r.columns) os << ',' << fmt::format("{:.12g}", c[i]);
    os << '\n';
  }
}

inline void write_csv(const SweepResult& r, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open output file " + path);
  write_csv(r, os);
  if (!os) throw Error("failed writing " + path);
}

}  // namespace spinmem
