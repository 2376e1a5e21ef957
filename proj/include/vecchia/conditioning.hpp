#pragma once

#include <string>
#include <vector>

#include "vecchia/covariance.hpp"
#include "vecchia/geometry.hpp"

namespace vecchia {

enum class SchemeKind { rf_full, rf_stand, rf_ind, lf_full, lf_ind, lf_auto };

const char* scheme_name(SchemeKind k);
SchemeKind scheme_from_name(const std::string& name);  // "rf-full", "lf-auto", ...

struct Scheme {
  SchemeKind kind = SchemeKind::rf_full;
  int m = 10;
  /// Response-first schemes: when set, data entries condition on the m nearest
  /// earlier data entries (the standard Vecchia likelihood); when unset they
  /// condition on nothing, which leaves y|z_o untouched and is cheaper.
  bool likelihood_mode = false;
};

/// One entry of the stacked vector x = z_o u y.
struct PlanEntry {
  VarKind kind = VarKind::latent;
  int loc = 0;            // location index in the ordered geometry
  std::vector<int> cond;  // g(i): earlier x positions, ascending
};

/// The ordering of x and the per-entry conditioning sets for one scheme.
/// Observed locations with a zero nugget are "collapsed": the data value
/// equals the latent value, so only a single (response) entry represents the
/// location and downstream predictions at it are deterministic.
struct ConditioningPlan {
  SchemeKind scheme = SchemeKind::rf_full;
  int m = 0;
  bool likelihood_mode = false;
  int n = 0, n_obs = 0, n_pred = 0;

  std::vector<PlanEntry> entries;

  std::vector<int> latent_pos;          // free-latent positions in x, ascending
  std::vector<int> free_latent_loc;     // location of each free latent
  std::vector<int> response_pos;        // x position of the data entry, by observed rank
  std::vector<bool> collapsed;          // per location
  std::vector<int> free_index_of_loc;   // location -> index into latent_pos, -1 if none

  int x_size() const { return static_cast<int>(entries.size()); }
  int n_free() const { return static_cast<int>(latent_pos.size()); }
  bool response_first() const {
    return scheme == SchemeKind::rf_full || scheme == SchemeKind::rf_stand ||
           scheme == SchemeKind::rf_ind;
  }
};

/// Builds the conditioning plan for a scheme over an ordered geometry.
ConditioningPlan build_plan(const Scheme& scheme, const GeometryModel& geom,
                            const NoiseModel& noise);

/// Covariance between x entries i and j under the true model.
double plan_model_cov(const ConditioningPlan& plan, const GeometryModel& geom,
                      const MaternParams& params, const NoiseModel& noise, int i, int j);

struct PlanStatistics {
  int n_latent = 0;
  int n_response = 0;
  int max_g_latent = 0;
  int max_g_response = 0;
  long long total_conditioning = 0;
  int dag_depth = 0;
};

PlanStatistics plan_statistics(const ConditioningPlan& plan);

/// Throws if structural invariants are violated (used by tests and debug paths).
void validate_plan(const ConditioningPlan& plan);

}  // namespace vecchia
