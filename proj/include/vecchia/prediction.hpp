#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "vecchia/conditioning.hpp"
#include "vecchia/sparse_engine.hpp"

namespace vecchia {

enum class VarianceMode { fast, exact };

/// Posterior summaries over the latent field, indexed by ordered location.
struct PredictionResult {
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<std::vector<double>> samples;  // samples[k] is one field draw
};

/// Posterior mean E(y|z_o), full length. Uses the submatrix shortcut for
/// response-first plans and the general two-solve route otherwise; both
/// reduce to -W^{-1} U_{l,.} U_{r,.}' z_o.
std::vector<double> posterior_mean(const SparseTriangularFactor& U,
                                   const SparseTriangularFactor& V,
                                   const ConditioningPlan& plan,
                                   const std::vector<double>& z_obs);

/// Marginal posterior variances. fast = selected inversion on the factor
/// pattern; exact = per-column triangular solves.
std::vector<double> posterior_variances(const SparseTriangularFactor& V,
                                        const ConditioningPlan& plan, VarianceMode mode);

struct LincombResult {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  Eigen::MatrixXd cov;  // empty in variance-only mode
};

/// Joint distribution of H y | z_o. H columns are indexed by ordered location.
/// Full-covariance mode caps the row count at 5000.
LincombResult lincomb_distribution(const SparseTriangularFactor& V,
                                   const ConditioningPlan& plan,
                                   const std::vector<double>& mean_full,
                                   const Eigen::MatrixXd& H, bool variance_only);

/// Conditional simulation: count independent posterior field draws.
std::vector<std::vector<double>> conditional_sample(const SparseTriangularFactor& V,
                                                    const ConditioningPlan& plan,
                                                    const std::vector<double>& mean_full,
                                                    int count, std::uint64_t seed);

/// One draw from supplied standard normals (length n_free); test hook.
std::vector<double> sample_with_normals(const SparseTriangularFactor& V,
                                        const ConditioningPlan& plan,
                                        const std::vector<double>& mean_full,
                                        const std::vector<double>& normals);

/// Response-space prediction: adds nugget variance, means unchanged.
PredictionResult predict_response(PredictionResult latent, double tau2);
PredictionResult predict_response(PredictionResult latent, const std::vector<double>& tau2);

/// Prediction-only fast path for rf-stand: touches only the trailing
/// prediction-latent columns of U. Returns vectors over prediction locations
/// (ordered as in the geometry's p).
PredictionResult predict_rf_stand_ponly(const SparseTriangularFactor& U,
                                        const ConditioningPlan& plan,
                                        const std::vector<double>& z_obs,
                                        VarianceMode mode = VarianceMode::fast);

/// W^{-1} b through the factor's permutation.
std::vector<double> w_solve(const SparseTriangularFactor& V, const std::vector<double>& b);

}  // namespace vecchia
