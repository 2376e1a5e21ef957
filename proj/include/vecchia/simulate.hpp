#pragma once

#include <cstdint>
#include <vector>

#include "vecchia/covariance.hpp"
#include "vecchia/geometry.hpp"

namespace vecchia {

struct SimulatedData {
  GeometryModel geom;
  std::vector<double> y;      // latent field, ordered-location indexing
  std::vector<double> z_obs;  // noisy data, observed-rank indexing
};

struct SimulationSpec {
  int dim = 2;
  int n_obs = 100;
  int n_pred = 100;
  MaternParams params;
  double tau2 = 0.1;
  Ordering ordering = Ordering::maxmin;
  bool op_restrict = true;
  double min_separation = 1e-4;
  int dense_cap = 10000;
};

/// Observation locations drawn uniformly on the unit domain, prediction
/// locations on an equidistant grid (perfect square in 2-D). Points violating
/// the minimum separation are redrawn deterministically.
void generate_locations(int dim, int n_obs, int n_pred, double min_sep, std::uint64_t seed,
                        std::vector<Point>& points, std::vector<bool>& is_pred);

/// y ~ N(0, K) over the ordered locations via a dense factorization.
std::vector<double> sample_gp(const GeometryModel& geom, const MaternParams& params,
                              std::uint64_t seed);

/// Full pipeline: locations, ordering, latent field, noisy observations.
SimulatedData simulate_dataset(const SimulationSpec& spec, std::uint64_t seed);

}  // namespace vecchia
