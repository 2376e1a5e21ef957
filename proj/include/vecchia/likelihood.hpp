#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "vecchia/conditioning.hpp"
#include "vecchia/prediction.hpp"
#include "vecchia/sparse_engine.hpp"

namespace vecchia {

struct GaussianDist {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// log f^(z_o) from the factors of an observed-only plan:
/// -2 log f^ = -2 sum log U_ii + 2 sum log V_ii + z~'z~ - |V^{-1} U_{l,.} z~|^2
///             + n_obs log 2pi,  with z~ = U_{r,.}' z_o.
double vecchia_loglik(const SparseTriangularFactor& U, const SparseTriangularFactor& V,
                      const ConditioningPlan& plan, const std::vector<double>& z_obs);

/// Exact dense posterior of y given z_o (small n).
GaussianDist exact_posterior(const GeometryModel& geom, const MaternParams& params,
                             const NoiseModel& noise, const std::vector<double>& z_obs);

/// Dense joint y | z_o implied by the factors (small n). Rows and columns at
/// collapsed locations are deterministic (zero covariance).
GaussianDist vecchia_implied_joint(const SparseTriangularFactor& U,
                                   const SparseTriangularFactor& V,
                                   const ConditioningPlan& plan,
                                   const std::vector<double>& z_obs);

/// Closed-form KL(P || Q) between Gaussians; Q must be nonsingular.
double gaussian_kl(const GaussianDist& P, const GaussianDist& Q);

/// KL(f(x) || f^(x)) by the chain-rule identity
///   KL = 1/2 sum_i log[ var(x_i|x_g(i)) / var(x_i|x_1..i-1) ].
double ckl_vecchia(const ConditioningPlan& plan, const GeometryModel& geom,
                   const MaternParams& params, const NoiseModel& noise);

/// The conditional divergences named for the individual schemes. Targets other
/// than joint_x are valid only where the scheme's ordering can be rearranged
/// with the target block last.
enum class CklTarget {
  joint_x,            // KL(f(x) || f^(x)) - all schemes
  pred_given_rest,    // CKL(y_p | y_o, z_o) - all OP schemes
  latents_given_data, // CKL(y | z_o)       - response-first schemes
  pred_given_data     // CKL(y_p | z_o)     - rf-stand, rf-ind
};
double ckl_scheme(const ConditioningPlan& plan, const GeometryModel& geom,
                  const MaternParams& params, const NoiseModel& noise, CklTarget target);

struct KLReport {
  double joint_pred = 0, joint_obs = 0, marginal_pred = 0, marginal_obs = 0;
  int replicates = 0;
};

/// Monte-Carlo average (over simulated z_o) of the closed-form divergences
/// between the exact and approximate conditionals. Covariance parts are
/// replicate-independent; only the mean terms vary.
KLReport kl_report(const Scheme& scheme, const GeometryModel& geom, const MaternParams& params,
                   const NoiseModel& noise, int replicates, std::uint64_t seed);

struct FitOptions {
  MaternParams init{1.0, 0.2, 0.5};
  double init_tau2 = 0.1;
  // bounds in natural parameter space; lower == upper pins a parameter
  double lo_variance = 1e-6, hi_variance = 1e6;
  double lo_range = 1e-6, hi_range = 1e6;
  double lo_smoothness = 0.05, hi_smoothness = 10.0;
  double lo_tau2 = 1e-8, hi_tau2 = 1e6;
  int max_iterations = 400;
  double tolerance = 1e-8;
};

struct FitResult {
  MaternParams params;
  double tau2 = 0;
  double loglik = 0;
  bool converged = false;
  int evaluations = 0;
};

/// Maximizes the Vecchia likelihood over (log) kernel parameters with a
/// derivative-free simplex search. Geometry must contain only observed
/// locations.
FitResult fit_parameters(const GeometryModel& geom, const std::vector<double>& z_obs,
                         const Scheme& scheme, const FitOptions& options);

}  // namespace vecchia
