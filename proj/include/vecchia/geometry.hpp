#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace vecchia {

/// A location in R^d, d in {1,2}. 1-D points keep the second coordinate at 0.
using Point = std::array<double, 2>;

inline double squared_distance(const Point& a, const Point& b) {
  double dx = a[0] - b[0];
  double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

inline double distance(const Point& a, const Point& b) {
  return std::sqrt(squared_distance(a, b));
}

enum class Ordering { maxmin, coordinate, none };

/// Locations plus the observed/prediction split, in final (ordered) indexing.
class GeometryModel {
 public:
  GeometryModel() = default;

  /// Orders `points` and builds the model. `is_prediction[i]` marks the raw
  /// point i as a prediction location. `op_restrict` places observed locations
  /// first (required by all schemes except the autoregressive one).
  static GeometryModel build(int dim, const std::vector<Point>& points,
                             const std::vector<bool>& is_prediction,
                             Ordering ordering, bool op_restrict = true);

  int dim = 2;
  std::vector<Point> locations;   // ordered
  std::vector<int> observed;      // o: ordered indices of observed locations
  std::vector<int> prediction;    // p
  std::vector<int> permutation;   // locations[k] == raw_points[permutation[k]]
  std::vector<int> obs_rank_of;   // per location: rank within o, -1 if prediction
  Ordering ordering = Ordering::none;
  bool op_restricted = false;

  int n() const { return static_cast<int>(locations.size()); }
  int n_obs() const { return static_cast<int>(observed.size()); }
  int n_pred() const { return static_cast<int>(prediction.size()); }
  bool is_observed(int loc) const { return obs_rank_of[loc] >= 0; }
};

/// Maxmin ordering with the prediction-last constraint: observed points are
/// exhausted before any prediction point; the first point of the leading
/// group is the one nearest its group centroid; every later point maximizes
/// its minimum distance to all previously ordered points. Distance ties break
/// on the lowest original index. Exact O(n^2).
std::vector<int> maxmin_order(int dim, const std::vector<Point>& points,
                              const std::vector<bool>& is_prediction);

/// Ascending-coordinate ordering; 1-D only.
std::vector<int> coordinate_order(int dim, const std::vector<Point>& points);

/// The min(m,|candidates|) candidates closest to `query`, sorted by distance
/// then index; ties on distance break to the lower index.
std::vector<int> nearest_neighbors(const Point& query, const std::vector<Point>& points,
                                   const std::vector<int>& candidates, int m);

/// Greedy thinning: keeps points in input order, dropping any point closer
/// than `min_sep` to an already-kept point. Returns kept indices.
std::vector<int> min_separation_filter(const std::vector<Point>& points, double min_sep);

/// Exact k-nearest-neighbor index over an insertable subset of a fixed point
/// set. Uniform grid with ring expansion; falls back to a linear scan for
/// small sets. Matches nearest_neighbors() ties and ordering exactly.
class KnnIndex {
 public:
  KnnIndex(int dim, const std::vector<Point>& points);

  void insert(int id);
  int size() const { return inserted_count_; }

  /// m nearest inserted points to `query` (sorted by distance then index).
  void query(const Point& query, int m, std::vector<int>& out) const;

 private:
  struct Cell {
    std::vector<int> ids;
  };
  int cell_of(const Point& p, int& cx, int& cy) const;

  int dim_;
  const std::vector<Point>* points_;
  int inserted_count_ = 0;
  std::vector<int> all_inserted_;  // insertion order, for the linear-scan path
  // grid
  bool use_grid_ = false;
  double x0_ = 0, y0_ = 0, cell_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<Cell> cells_;
};

}  // namespace vecchia
