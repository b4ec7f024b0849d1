#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ldp {

// Snapshots of a 1-D grid function.
struct Field {
  std::vector<double> x;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[snapshot][node]
  double dt = 0.0;                          // time step used to produce it

  double h() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
  const std::vector<double>& at(double t) const;  // exact snapshot time
};

// Long format with header "x,t,value", 12 significant digits.
void write_field_csv(const Field& f, std::ostream& out);
void write_field_csv(const Field& f, const std::string& path);
Field read_field_csv(std::istream& in);

// Shortest decimal text with 12 significant digits.
std::string format_csv_number(double v);

}  // namespace ldp
