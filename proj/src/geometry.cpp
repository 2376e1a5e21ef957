#include "vecchia/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "vecchia/errors.hpp"

namespace vecchia {

namespace {

// (squared distance, index) comparator used by every neighbor path so the
// grid index and the brute-force scan agree bit for bit.
inline bool closer(double d2a, int ia, double d2b, int ib) {
  if (d2a != d2b) return d2a < d2b;
  return ia < ib;
}

int centroid_nearest(const std::vector<Point>& points, const std::vector<int>& group) {
  Point c = {0, 0};
  for (int i : group) {
    c[0] += points[i][0];
    c[1] += points[i][1];
  }
  c[0] /= static_cast<double>(group.size());
  c[1] /= static_cast<double>(group.size());
  int best = group[0];
  double best_d2 = squared_distance(points[best], c);
  for (int i : group) {
    double d2 = squared_distance(points[i], c);
    if (closer(d2, i, best_d2, best)) {
      best = i;
      best_d2 = d2;
    }
  }
  return best;
}

}  // namespace

std::vector<int> maxmin_order(int dim, const std::vector<Point>& points,
                              const std::vector<bool>& is_prediction) {
  (void)dim;
  const int n = static_cast<int>(points.size());
  if (n == 0) throw input_error("maxmin_order: empty point set");
  if (static_cast<int>(is_prediction.size()) != n)
    throw input_error("maxmin_order: prediction mask size mismatch");

  std::vector<int> obs, pred;
  for (int i = 0; i < n; ++i) (is_prediction[i] ? pred : obs).push_back(i);

  std::vector<int> order;
  order.reserve(n);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);

  auto take = [&](int id) {
    taken[id] = 1;
    order.push_back(id);
    const Point& q = points[id];
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
      if (taken[j]) continue;
      double d2 = squared_distance(points[j], q);
      if (d2 < min_d2[j]) min_d2[j] = d2;
    }
  };

  auto run_group = [&](const std::vector<int>& group, bool seed_by_centroid) {
    if (group.empty()) return;
    std::size_t done = 0;
    if (seed_by_centroid) {
      take(centroid_nearest(points, group));
      ++done;
    }
    for (; done < group.size(); ++done) {
      int best = -1;
      double best_d2 = -1;
      for (int j : group) {
        if (taken[j]) continue;
        if (best < 0 || min_d2[j] > best_d2 || (min_d2[j] == best_d2 && j < best)) {
          best = j;
          best_d2 = min_d2[j];
        }
      }
      take(best);
    }
  };

  // Observed first. The very first point is centroid-seeded; once observed
  // points exist, prediction points extend the same min-distance recursion.
  run_group(obs, true);
  run_group(pred, obs.empty());
  return order;
}

std::vector<int> coordinate_order(int dim, const std::vector<Point>& points) {
  if (dim != 1) throw config_error("coordinate_order: only 1-D domains are supported");
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return points[a][0] < points[b][0]; });
  return order;
}

std::vector<int> nearest_neighbors(const Point& query, const std::vector<Point>& points,
                                   const std::vector<int>& candidates, int m) {
  if (m <= 0) return {};
  std::vector<std::pair<double, int>> scored;
  scored.reserve(candidates.size());
  for (int id : candidates) scored.emplace_back(squared_distance(points[id], query), id);
  auto cmp = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
    return closer(a.first, a.second, b.first, b.second);
  };
  std::size_t k = std::min<std::size_t>(m, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), cmp);
  std::vector<int> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = scored[i].second;
  return out;
}

std::vector<int> min_separation_filter(const std::vector<Point>& points, double min_sep) {
  std::vector<int> kept;
  double sep2 = min_sep * min_sep;
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    bool ok = true;
    for (int j : kept) {
      if (squared_distance(points[i], points[j]) < sep2) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(i);
  }
  return kept;
}

GeometryModel GeometryModel::build(int dim, const std::vector<Point>& points,
                                   const std::vector<bool>& is_prediction,
                                   Ordering ordering, bool op_restrict) {
  if (dim != 1 && dim != 2) throw config_error("GeometryModel: dim must be 1 or 2");
  if (points.empty()) throw input_error("GeometryModel: no locations");
  if (points.size() != is_prediction.size())
    throw input_error("GeometryModel: prediction mask size mismatch");

  std::vector<int> perm;
  switch (ordering) {
    case Ordering::maxmin:
      perm = maxmin_order(dim, points, is_prediction);
      break;
    case Ordering::coordinate: {
      if (op_restrict) {
        // observed ascending, then prediction ascending
        std::vector<int> obs, pred;
        for (int i = 0; i < static_cast<int>(points.size()); ++i)
          (is_prediction[i] ? pred : obs).push_back(i);
        auto by_x = [&](int a, int b) { return points[a][0] < points[b][0]; };
        std::stable_sort(obs.begin(), obs.end(), by_x);
        std::stable_sort(pred.begin(), pred.end(), by_x);
        perm = obs;
        perm.insert(perm.end(), pred.begin(), pred.end());
        if (dim != 1) throw config_error("coordinate ordering: only 1-D domains are supported");
      } else {
        perm = coordinate_order(dim, points);
      }
      break;
    }
    case Ordering::none: {
      if (op_restrict) {
        std::vector<int> obs, pred;
        for (int i = 0; i < static_cast<int>(points.size()); ++i)
          (is_prediction[i] ? pred : obs).push_back(i);
        perm = obs;
        perm.insert(perm.end(), pred.begin(), pred.end());
      } else {
        perm.resize(points.size());
        std::iota(perm.begin(), perm.end(), 0);
      }
      break;
    }
  }

  GeometryModel g;
  g.dim = dim;
  g.ordering = ordering;
  g.permutation = perm;
  g.locations.reserve(points.size());
  g.obs_rank_of.assign(points.size(), -1);
  for (int k = 0; k < static_cast<int>(perm.size()); ++k) {
    g.locations.push_back(points[perm[k]]);
    if (is_prediction[perm[k]]) {
      g.prediction.push_back(k);
    } else {
      g.obs_rank_of[k] = static_cast<int>(g.observed.size());
      g.observed.push_back(k);
    }
  }
  g.op_restricted = true;
  for (int k = 0; k < g.n_obs(); ++k)
    if (g.obs_rank_of[k] < 0) g.op_restricted = false;
  return g;
}

KnnIndex::KnnIndex(int dim, const std::vector<Point>& points) : dim_(dim), points_(&points) {
  const int n = static_cast<int>(points.size());
  use_grid_ = n >= 1000;
  if (!use_grid_) return;

  double xmin = points[0][0], xmax = points[0][0];
  double ymin = points[0][1], ymax = points[0][1];
  for (const Point& p : points) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  double ext_x = std::max(xmax - xmin, 1e-12);
  double ext_y = std::max(ymax - ymin, 1e-12);
  if (dim_ == 1) {
    nx_ = std::max(1, n / 4);
    ny_ = 1;
    cell_ = ext_x / nx_;
  } else {
    // ~4 points per cell on average
    int side = std::max(1, static_cast<int>(std::sqrt(n / 4.0)));
    nx_ = ny_ = side;
    cell_ = std::max(ext_x / side, ext_y / side);
    nx_ = std::max(1, static_cast<int>(ext_x / cell_) + 1);
    ny_ = std::max(1, static_cast<int>(ext_y / cell_) + 1);
  }
  x0_ = xmin;
  y0_ = ymin;
  cells_.resize(static_cast<std::size_t>(nx_) * ny_);
}

int KnnIndex::cell_of(const Point& p, int& cx, int& cy) const {
  cx = std::clamp(static_cast<int>((p[0] - x0_) / cell_), 0, nx_ - 1);
  cy = dim_ == 1 ? 0 : std::clamp(static_cast<int>((p[1] - y0_) / cell_), 0, ny_ - 1);
  return cy * nx_ + cx;
}

void KnnIndex::insert(int id) {
  ++inserted_count_;
  if (!use_grid_) {
    all_inserted_.push_back(id);
    return;
  }
  int cx, cy;
  cells_[cell_of((*points_)[id], cx, cy)].ids.push_back(id);
}

void KnnIndex::query(const Point& query, int m, std::vector<int>& out) const {
  out.clear();
  if (m <= 0 || inserted_count_ == 0) return;

  if (!use_grid_) {
    out = nearest_neighbors(query, *points_, all_inserted_, m);
    return;
  }

  // best-m kept as a sorted insertion buffer; m is small
  std::vector<std::pair<double, int>> best;
  best.reserve(m + 1);
  auto offer = [&](int id) {
    double d2 = squared_distance((*points_)[id], query);
    if (static_cast<int>(best.size()) == m &&
        !closer(d2, id, best.back().first, best.back().second))
      return;
    auto it = std::upper_bound(best.begin(), best.end(), std::make_pair(d2, id),
                               [](const auto& a, const auto& b) {
                                 return closer(a.first, a.second, b.first, b.second);
                               });
    best.insert(it, {d2, id});
    if (static_cast<int>(best.size()) > m) best.pop_back();
  };

  int cx, cy;
  cell_of(query, cx, cy);
  int max_ring = std::max({nx_, ny_, 1});
  for (int ring = 0; ring < max_ring + 1; ++ring) {
    // points in a farther ring are at least (ring-1)*cell away
    if (static_cast<int>(best.size()) == m) {
      double lower = (ring - 1) * cell_;
      if (lower > 0 && lower * lower > best.back().first) break;
    }
    int xlo = cx - ring, xhi = cx + ring;
    int ylo = dim_ == 1 ? 0 : cy - ring, yhi = dim_ == 1 ? 0 : cy + ring;
    for (int gy = ylo; gy <= yhi; ++gy) {
      if (gy < 0 || gy >= ny_) continue;
      for (int gx = xlo; gx <= xhi; ++gx) {
        if (gx < 0 || gx >= nx_) continue;
        bool on_ring = (std::abs(gx - cx) == ring || std::abs(gy - cy) == ring);
        if (!on_ring) continue;
        for (int id : cells_[static_cast<std::size_t>(gy) * nx_ + gx].ids) offer(id);
      }
    }
  }
  out.resize(best.size());
  for (std::size_t i = 0; i < best.size(); ++i) out[i] = best[i].second;
}

}  // namespace vecchia
