#pragma once

#include <vector>

#include "vecchia/geometry.hpp"

namespace vecchia {

/// Isotropic Matern kernel parameters. Convention: with x = sqrt(2 nu) d / range,
///   k(d) = variance * 2^(1-nu)/Gamma(nu) * x^nu * K_nu(x),  k(0) = variance.
struct MaternParams {
  double variance = 1.0;
  double range = 1.0;
  double smoothness = 0.5;

  void validate() const;
};

/// Observation-noise (nugget) variances: one shared value or one per observed
/// location, indexed by observed rank.
class NoiseModel {
 public:
  static NoiseModel constant(double tau2);
  static NoiseModel per_observation(std::vector<double> tau2);

  double at(int obs_rank) const {
    return values_.empty() ? tau2_ : values_[static_cast<std::size_t>(obs_rank)];
  }
  bool is_constant() const { return values_.empty(); }
  double constant_value() const { return tau2_; }
  int size() const { return static_cast<int>(values_.size()); }
  bool all_zero() const;

 private:
  double tau2_ = 0.0;
  std::vector<double> values_;
};

/// Matern covariance at distance d.
double matern(double d, const MaternParams& params);

/// Solves matern(r_eff; variance=1, rho, nu) = 0.05 for rho by bisection.
double effective_range_to_rho(double r_eff, double nu);

enum class VarKind { latent, response };

/// Covariance between two variables of the joint model: latent pairs and
/// latent/response crosses take the kernel value; response pairs at the same
/// location add the nugget.
double model_cov(VarKind kind_i, int loc_i, VarKind kind_j, int loc_j,
                 const GeometryModel& geom, const MaternParams& params,
                 const NoiseModel& noise);

}  // namespace vecchia
