#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoctl/core/linalg.hpp"
#include "geoctl/extremals/arc.hpp"

namespace geoctl {

using Json = nlohmann::ordered_json;

/// Decimal text with 17 significant digits; -0 prints as 0.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// Comma-separated table with a header row.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<std::string> header) : os_(os), cols_(header.size()) {
    write_row(header);
  }

  void row(const std::vector<double>& values) {
    if (values.size() != cols_) throw DimensionMismatch("csv row length differs from header");
    std::vector<std::string> s;
    for (double v : values) s.push_back(format_double(v));
    write_row(s);
  }

 private:
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

  std::ostream& os_;
  std::size_t cols_;
};

/// Columns t, states, costates, controls, residuals (the constraint group).
inline void write_arc_csv(std::ostream& os, const BiExtremalArc& arc, const std::vector<std::string>& state_names,
                          const std::vector<std::string>& control_names) {
  std::vector<std::string> h{"t"};
  for (const auto& n : state_names) h.push_back(n);
  for (const auto& n : state_names) h.push_back("p_" + n);
  for (const auto& n : control_names) h.push_back(n);
  const std::size_t nc = arc.constraints.empty() ? 0 : static_cast<std::size_t>(arc.constraints.front().size());
  for (std::size_t i = 0; i < nc; ++i) h.push_back("r" + std::to_string(i + 1));
  CsvWriter w(os, h);
  for (std::size_t k = 0; k < arc.size(); ++k) {
    std::vector<double> r{arc.times[k]};
    for (const Vec* v : {&arc.states[k], &arc.costates[k], &arc.controls[k]})
      for (Eigen::Index i = 0; i < v->size(); ++i) r.push_back((*v)(i));
    if (nc)
      for (Eigen::Index i = 0; i < arc.constraints[k].size(); ++i) r.push_back(arc.constraints[k](i));
    w.row(r);
  }
}

}  // namespace geoctl
