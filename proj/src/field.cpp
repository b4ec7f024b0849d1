#include "ldp/field.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "ldp/error.hpp"

namespace ldp {

const std::vector<double>& Field::at(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] == t) return values[i];
  fail(ErrorKind::InvalidArgument, fmt::format("field: no snapshot at t = {}", t));
}

std::string format_csv_number(double v) { return fmt::format("{:.12g}", v); }

void write_field_csv(const Field& f, std::ostream& out) {
  out << "x,t,value\n";
  for (std::size_t s = 0; s < f.times.size(); ++s)
    for (std::size_t i = 0; i < f.x.size(); ++i)
      out << format_csv_number(f.x[i]) << ',' << format_csv_number(f.times[s]) << ','
          << format_csv_number(f.values[s][i]) << '\n';
}

void write_field_csv(const Field& f, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + path);
  write_field_csv(f, out);
  require(static_cast<bool>(out), ErrorKind::Io, "write failed: " + path);
}

Field read_field_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Io, "field csv: empty input");
  require(line == "x,t,value", ErrorKind::MissingColumns, "field csv: expected header x,t,value");
  std::map<double, std::vector<std::pair<double, double>>> by_time;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double x, t, v;
    char c1, c2;
    require(static_cast<bool>(row >> x >> c1 >> t >> c2 >> v) && c1 == ',' && c2 == ',',
            ErrorKind::Io, "field csv: malformed row: " + line);
    by_time[t].emplace_back(x, v);
  }
  Field f;
  for (auto& [t, rows] : by_time) {
    if (f.x.empty())
      for (const auto& r : rows) f.x.push_back(r.first);
    require(rows.size() == f.x.size(), ErrorKind::GridMismatch, "field csv: ragged snapshots");
    f.times.push_back(t);
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.second);
    f.values.push_back(std::move(v));
  }
  return f;
}

}  // namespace ldp
