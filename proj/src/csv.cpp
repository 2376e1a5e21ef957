#include "vecchia/csv.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "vecchia/errors.hpp"

namespace vecchia {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw input_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    std::fprintf(f, "%s%s", header[i].c_str(), i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      std::fprintf(f, "%.17g%s", row[i], i + 1 < row.size() ? "," : "\n");
  }
  std::fclose(f);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open: " + path);
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (lineno == 1) {
      t.header = cells;
      continue;
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      try {
        std::size_t used = 0;
        double v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("");
        row.push_back(v);
      } catch (const std::exception&) {
        throw input_error(path + ":" + std::to_string(lineno) + ": cannot parse field " +
                          std::to_string(c + 1) + " ('" + cells[c] + "')");
      }
    }
    if (row.size() != t.header.size())
      throw input_error(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields, got " +
                        std::to_string(row.size()));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw input_error(path + ": empty file");
  return t;
}

PointData read_point_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int xcol = -1, ycol = -1, zcol = -1;
  for (int c = 0; c < static_cast<int>(t.header.size()); ++c) {
    if (t.header[c] == "x") xcol = c;
    if (t.header[c] == "y") ycol = c;
    if (t.header[c] == "z") zcol = c;
  }
  if (xcol < 0) throw input_error(path + ": missing required column 'x'");

  PointData d;
  d.dim = ycol >= 0 ? 2 : 1;
  d.points.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    Point p{row[xcol], ycol >= 0 ? row[ycol] : 0.0};
    if (!std::isfinite(p[0]) || (ycol >= 0 && !std::isfinite(p[1])))
      throw input_error(path + ":" + std::to_string(r + 2) + ": non-finite coordinate");
    d.points.push_back(p);
    double z = zcol >= 0 ? row[zcol] : std::numeric_limits<double>::quiet_NaN();
    d.z.push_back(z);
    d.has_z.push_back(std::isfinite(z));
  }
  return d;
}

}  // namespace vecchia
