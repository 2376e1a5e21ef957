#include "vecchia/simulate.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "vecchia/errors.hpp"
#include "vecchia/rng.hpp"

namespace vecchia {

void generate_locations(int dim, int n_obs, int n_pred, double min_sep, std::uint64_t seed,
                        std::vector<Point>& points, std::vector<bool>& is_pred) {
  if (dim != 1 && dim != 2) throw config_error("generate_locations: dim must be 1 or 2");
  if (n_obs < 0 || n_pred < 0 || n_obs + n_pred == 0)
    throw config_error("generate_locations: need at least one location");

  points.clear();
  is_pred.clear();

  // prediction grid first (it is fixed), then uniform observed draws
  if (dim == 1) {
    for (int k = 0; k < n_pred; ++k) {
      points.push_back({(k + 0.5) / n_pred, 0.0});
      is_pred.push_back(true);
    }
  } else if (n_pred > 0) {
    int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_pred))));
    if (side * side != n_pred)
      throw config_error("generate_locations: 2-D n_pred must be a perfect square");
    for (int a = 0; a < side; ++a)
      for (int b = 0; b < side; ++b) {
        points.push_back({(a + 0.5) / side, (b + 0.5) / side});
        is_pred.push_back(true);
      }
  }

  RandomStream rs(seed, 0);
  double sep2 = min_sep * min_sep;
  for (int k = 0; k < n_obs; ++k) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 5000)
        throw input_error("generate_locations: cannot satisfy the minimum separation");
      Point p{rs.next_uniform(), dim == 2 ? rs.next_uniform() : 0.0};
      bool ok = true;
      for (const Point& q : points)
        if (squared_distance(p, q) < sep2) {
          ok = false;
          break;
        }
      if (ok) {
        points.push_back(p);
        is_pred.push_back(false);
        break;
      }
    }
  }
}

std::vector<double> sample_gp(const GeometryModel& geom, const MaternParams& params,
                              std::uint64_t seed) {
  const int n = geom.n();
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = params.variance;
    for (int j = i + 1; j < n; ++j) {
      double v = matern(distance(geom.locations[i], geom.locations[j]), params);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw numerical_error("sample_gp: kernel matrix not positive definite");
  Eigen::MatrixXd L = llt.matrixL();

  RandomStream rs(seed, 1);
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps(i) = rs.normal(i);
  Eigen::VectorXd y = L * eps;
  return std::vector<double>(y.data(), y.data() + n);
}

SimulatedData simulate_dataset(const SimulationSpec& spec, std::uint64_t seed) {
  spec.params.validate();
  if (spec.n_obs + spec.n_pred > spec.dense_cap)
    throw config_error(
        "simulate_dataset: size exceeds the dense sampling cap; subsample a grid instead");

  std::vector<Point> points;
  std::vector<bool> is_pred;
  generate_locations(spec.dim, spec.n_obs, spec.n_pred, spec.min_separation,
                     derive_seed(seed, 0), points, is_pred);

  SimulatedData out;
  out.geom = GeometryModel::build(spec.dim, points, is_pred, spec.ordering, spec.op_restrict);
  out.y = sample_gp(out.geom, spec.params, derive_seed(seed, 1));

  RandomStream rs(derive_seed(seed, 2), 2);
  double tau = std::sqrt(spec.tau2);
  out.z_obs.resize(out.geom.n_obs());
  for (int r = 0; r < out.geom.n_obs(); ++r)
    out.z_obs[r] = out.y[out.geom.observed[r]] + tau * rs.normal(r);
  return out;
}

}  // namespace vecchia
