#ifndef STICKYSS_IO_HPP
#define STICKYSS_IO_HPP

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace stickyss {

using json = nlohmann::json;

inline std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_profile_csv(std::ostream& os, const Profile& f) {
  os << "x,value\n";
  os << std::setprecision(17);
  for (int i = 0; i < f.size(); ++i) os << f.grid().x(i) << ',' << f[i] << '\n';
}

inline json profile_json(const Profile& f) {
  return json{{"grid", {{"L", f.grid().half_width()}, {"N", f.grid().size()}}},
              {"gamma", f.gamma()},
              {"c", f.c()},
              {"values", f.values()}};
}

inline Profile profile_from_json(const json& j) {
  Grid grid(j.at("grid").at("L").get<double>(), j.at("grid").at("N").get<int>());
  return Profile(grid, j.at("values").get<std::vector<double>>(), j.value("gamma", 0.0),
                 j.value("c", 0.25));
}

// Reads an `x,value` CSV and checks the abscissae against the grid.
inline Profile read_profile_csv(std::istream& is, const Grid& grid) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,value", 0) != 0)
    throw std::invalid_argument("profile csv must start with header x,value");
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("malformed profile csv row");
    double x = std::stod(line.substr(0, comma));
    double v = std::stod(line.substr(comma + 1));
    int i = static_cast<int>(values.size());
    if (i >= grid.size() || std::abs(x - grid.x(i)) > 1e-9 * grid.half_width())
      throw GridMismatch("profile csv does not match the configured grid");
    values.push_back(v);
  }
  if (static_cast<int>(values.size()) != grid.size())
    throw GridMismatch("profile csv has the wrong number of rows");
  return Profile(grid, std::move(values));
}

inline Profile read_profile_file(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open profile file " + path);
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
    json j = json::parse(in);
    Profile p = profile_from_json(j);
    require_same_grid(p.grid(), grid);
    return p;
  }
  return read_profile_csv(in, grid);
}

} // namespace stickyss

#endif
