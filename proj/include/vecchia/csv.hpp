#pragma once

#include <string>
#include <vector>

#include "vecchia/geometry.hpp"

namespace vecchia {

/// Numeric CSV writer; 17 significant digits so round-trips are lossless.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // NaN marks an empty cell
};

CsvTable read_csv(const std::string& path);

/// Point data: header x[,y][,z]; a missing/empty z marks a prediction row.
struct PointData {
  int dim = 0;
  std::vector<Point> points;
  std::vector<bool> has_z;
  std::vector<double> z;  // aligned with points; NaN where absent
};

PointData read_point_csv(const std::string& path);

}  // namespace vecchia
