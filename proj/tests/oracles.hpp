#pragma once

// Independent reference computations for the test suites. Everything here is
// written the slow, obvious way on purpose and must not call into the code
// paths it checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vecchia/conditioning.hpp"
#include "vecchia/covariance.hpp"
#include "vecchia/geometry.hpp"

namespace oracle {

using vecchia::GeometryModel;
using vecchia::MaternParams;
using vecchia::NoiseModel;
using vecchia::Point;

inline double dist(const Point& a, const Point& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

// greedy maxmin with plain double loops
inline std::vector<int> maxmin_bruteforce(const std::vector<Point>& pts,
                                          const std::vector<bool>& is_pred) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> order;
  std::vector<char> used(n, 0);

  auto centroid_first = [&](const std::vector<int>& group) {
    double cx = 0, cy = 0;
    for (int i : group) {
      cx += pts[i][0];
      cy += pts[i][1];
    }
    cx /= group.size();
    cy /= group.size();
    int best = -1;
    double bd = 0;
    for (int i : group) {
      double d = std::hypot(pts[i][0] - cx, pts[i][1] - cy);
      if (best < 0 || d < bd || (d == bd && i < best)) {
        best = i;
        bd = d;
      }
    }
    return best;
  };

  std::vector<int> obs, pred;
  for (int i = 0; i < n; ++i) (is_pred[i] ? pred : obs).push_back(i);

  auto grow = [&](const std::vector<int>& group, bool seed) {
    std::size_t start = 0;
    if (seed && !group.empty()) {
      int f = centroid_first(group);
      used[f] = 1;
      order.push_back(f);
      start = 1;
    }
    for (std::size_t step = start; step < group.size(); ++step) {
      int best = -1;
      double bd = -1;
      for (int i : group) {
        if (used[i]) continue;
        double mind = std::numeric_limits<double>::infinity();
        for (int j : order) mind = std::min(mind, dist(pts[i], pts[j]));
        if (best < 0 || mind > bd || (mind == bd && i < best)) {
          best = i;
          bd = mind;
        }
      }
      used[best] = 1;
      order.push_back(best);
    }
  };
  grow(obs, true);
  grow(pred, obs.empty());
  return order;
}

inline std::vector<int> knn_bruteforce(const Point& q, const std::vector<Point>& pts,
                                       const std::vector<int>& candidates, int m) {
  std::vector<int> c = candidates;
  std::sort(c.begin(), c.end(), [&](int a, int b) {
    double da = dist(pts[a], q), db = dist(pts[b], q);
    if (da != db) return da < db;
    return a < b;
  });
  if (static_cast<int>(c.size()) > m) c.resize(m);
  return c;
}

inline Eigen::MatrixXd model_cov_matrix(const vecchia::ConditioningPlan& plan,
                                        const GeometryModel& geom, const MaternParams& p,
                                        const NoiseModel& noise) {
  const int N = plan.x_size();
  Eigen::MatrixXd C(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) C(i, j) = vecchia::plan_model_cov(plan, geom, p, noise, i, j);
  return C;
}

// dense reverse Cholesky built from Eigen only
inline Eigen::MatrixXd rchol_eigen(const Eigen::MatrixXd& W) {
  const int n = static_cast<int>(W.rows());
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = W(n - 1 - i, n - 1 - j);
  Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(R).matrixL();
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) V(i, j) = L(n - 1 - i, n - 1 - j);
  return V;
}

// conditional mean/variance of variable i given an index set, from a dense
// covariance and values
inline std::pair<double, double> dense_conditional(const Eigen::MatrixXd& C,
                                                   const Eigen::VectorXd& values, int i,
                                                   const std::vector<int>& given) {
  if (given.empty()) return {0.0, C(i, i)};
  const int k = static_cast<int>(given.size());
  Eigen::MatrixXd Cgg(k, k);
  Eigen::VectorXd cgi(k), vg(k);
  for (int a = 0; a < k; ++a) {
    cgi(a) = C(given[a], i);
    vg(a) = values(given[a]);
    for (int b = 0; b < k; ++b) Cgg(a, b) = C(given[a], given[b]);
  }
  Eigen::VectorXd w = Cgg.llt().solve(cgi);
  return {w.dot(vg), C(i, i) - w.dot(cgi)};
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

inline double max_abs_diff(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  return (A - B).cwiseAbs().maxCoeff();
}

inline double rel_frob(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  double nb = B.norm();
  return nb == 0 ? A.norm() : (A - B).norm() / nb;
}

}  // namespace oracle
