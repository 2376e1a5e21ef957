#include "vecchia/covariance.hpp"

#include <cmath>
#include <limits>

#include "vecchia/errors.hpp"

namespace vecchia {

void MaternParams::validate() const {
  if (!(variance > 0) || !std::isfinite(variance) || !(range > 0) || !std::isfinite(range) ||
      !(smoothness > 0) || !std::isfinite(smoothness))
    throw input_error("MaternParams: variance, range, smoothness must be positive and finite");
}

NoiseModel NoiseModel::constant(double tau2) {
  if (!(tau2 >= 0) || !std::isfinite(tau2)) throw input_error("NoiseModel: nugget must be >= 0");
  NoiseModel n;
  n.tau2_ = tau2;
  return n;
}

NoiseModel NoiseModel::per_observation(std::vector<double> tau2) {
  for (double t : tau2)
    if (!(t >= 0) || !std::isfinite(t))
      throw input_error("NoiseModel: every nugget must be >= 0");
  NoiseModel n;
  n.values_ = std::move(tau2);
  return n;
}

bool NoiseModel::all_zero() const {
  if (values_.empty()) return tau2_ == 0.0;
  for (double t : values_)
    if (t != 0.0) return false;
  return true;
}

double matern(double d, const MaternParams& params) {
  params.validate();
  if (!(d >= 0) || !std::isfinite(d)) throw input_error("matern: distance must be >= 0 and finite");
  if (d == 0) return params.variance;

  const double nu = params.smoothness;
  const double x = std::sqrt(2.0 * nu) * d / params.range;

  // closed forms for the half-integer cases
  if (nu == 0.5) return params.variance * std::exp(-d / params.range);
  if (nu == 1.5) {
    double a = std::sqrt(3.0) * d / params.range;
    return params.variance * (1.0 + a) * std::exp(-a);
  }
  if (nu == 2.5) {
    double a = std::sqrt(5.0) * d / params.range;
    return params.variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
  }

  double v = params.variance * std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(x, nu) *
             std::cyl_bessel_k(nu, x);
  if (!std::isfinite(v)) v = 0.0;  // K_nu underflows for large x
  return v;
}

double effective_range_to_rho(double r_eff, double nu) {
  if (!(r_eff > 0) || !std::isfinite(r_eff))
    throw input_error("effective_range_to_rho: r_eff must be positive");
  const double target = 0.05;
  MaternParams p{1.0, 1.0, nu};
  auto corr = [&](double rho) {
    p.range = rho;
    return matern(r_eff, p);
  };
  // correlation at fixed distance increases with rho; bracket the root
  double lo = r_eff * 1e-6, hi = r_eff;
  while (corr(hi) < target) {
    hi *= 2;
    if (hi > r_eff * 1e8) throw numerical_error("effective_range_to_rho: failed to bracket");
  }
  while (corr(lo) > target) {
    lo *= 0.5;
    if (lo < r_eff * 1e-12) throw numerical_error("effective_range_to_rho: failed to bracket");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (corr(mid) < target ? lo : hi) = mid;
    if (hi - lo <= 1e-10 * hi) break;
  }
  return 0.5 * (lo + hi);
}

double model_cov(VarKind kind_i, int loc_i, VarKind kind_j, int loc_j,
                 const GeometryModel& geom, const MaternParams& params,
                 const NoiseModel& noise) {
  double k = matern(distance(geom.locations[loc_i], geom.locations[loc_j]), params);
  if (kind_i == VarKind::response && kind_j == VarKind::response && loc_i == loc_j)
    k += noise.at(geom.obs_rank_of[loc_i]);
  return k;
}

}  // namespace vecchia
