#include "vecchia/conditioning.hpp"

#include <algorithm>
#include <iostream>

#include "vecchia/errors.hpp"

namespace vecchia {

const char* scheme_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::rf_full: return "rf-full";
    case SchemeKind::rf_stand: return "rf-stand";
    case SchemeKind::rf_ind: return "rf-ind";
    case SchemeKind::lf_full: return "lf-full";
    case SchemeKind::lf_ind: return "lf-ind";
    case SchemeKind::lf_auto: return "lf-auto";
  }
  return "?";
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "rf-full") return SchemeKind::rf_full;
  if (name == "rf-stand") return SchemeKind::rf_stand;
  if (name == "rf-ind") return SchemeKind::rf_ind;
  if (name == "lf-full") return SchemeKind::lf_full;
  if (name == "lf-ind") return SchemeKind::lf_ind;
  if (name == "lf-auto") return SchemeKind::lf_auto;
  throw config_error("unknown scheme: " + name);
}

namespace {

struct Layout {
  std::vector<int> latent_role_pos;    // x position standing in for y_loc
  std::vector<int> response_role_pos;  // x position of z_loc, -1 if unobserved
};

}  // namespace

ConditioningPlan build_plan(const Scheme& scheme, const GeometryModel& geom,
                            const NoiseModel& noise) {
  const int n = geom.n();
  const int n_obs = geom.n_obs();
  if (scheme.m < 0) throw config_error("build_plan: m must be >= 0");
  if (!noise.is_constant() && noise.size() != n_obs)
    throw config_error("build_plan: per-observation nugget length must equal n_obs");

  const bool rf = scheme.kind == SchemeKind::rf_full || scheme.kind == SchemeKind::rf_stand ||
                  scheme.kind == SchemeKind::rf_ind;
  if (scheme.kind == SchemeKind::lf_auto) {
    if (geom.ordering != Ordering::coordinate || geom.op_restricted)
      std::cerr << "warning: lf-auto is intended for 1-D coordinate ordering "
                   "without the observed-first restriction\n";
  } else if (!geom.op_restricted && n_obs > 0 && geom.n_pred() > 0) {
    throw config_error(std::string(scheme_name(scheme.kind)) +
                       " requires observed-first ordering");
  }

  ConditioningPlan plan;
  plan.scheme = scheme.kind;
  plan.m = scheme.m;
  plan.likelihood_mode = scheme.likelihood_mode;
  plan.n = n;
  plan.n_obs = n_obs;
  plan.n_pred = geom.n_pred();
  plan.collapsed.assign(n, false);
  plan.free_index_of_loc.assign(n, -1);

  for (int loc = 0; loc < n; ++loc)
    if (geom.is_observed(loc) && noise.at(geom.obs_rank_of[loc]) == 0.0)
      plan.collapsed[loc] = true;

  // x layout.
  //   response-first: data entries by observed rank, then free latents by location
  //   latent-first:   one entry per location (free latent, or the collapsed data
  //                   entry standing in for it), then data entries of noisy locations
  Layout lay;
  lay.latent_role_pos.assign(n, -1);
  lay.response_role_pos.assign(n, -1);
  int x_size = 0;
  if (rf) {
    for (int loc = 0; loc < n; ++loc)
      if (geom.is_observed(loc)) lay.response_role_pos[loc] = geom.obs_rank_of[loc];
    int next = n_obs;
    for (int loc = 0; loc < n; ++loc) {
      if (plan.collapsed[loc]) {
        lay.latent_role_pos[loc] = lay.response_role_pos[loc];
      } else {
        lay.latent_role_pos[loc] = next++;
      }
    }
    x_size = next;
  } else {
    for (int loc = 0; loc < n; ++loc) lay.latent_role_pos[loc] = loc;
    int next = n;
    for (int loc = 0; loc < n; ++loc) {
      if (!geom.is_observed(loc)) continue;
      lay.response_role_pos[loc] = plan.collapsed[loc] ? loc : next++;
    }
    x_size = next;
  }

  plan.entries.assign(x_size, PlanEntry{});
  for (int loc = 0; loc < n; ++loc) {
    if (!plan.collapsed[loc]) {
      PlanEntry& e = plan.entries[lay.latent_role_pos[loc]];
      e.kind = VarKind::latent;
      e.loc = loc;
    }
    if (geom.is_observed(loc)) {
      PlanEntry& z = plan.entries[lay.response_role_pos[loc]];
      z.kind = VarKind::response;
      z.loc = loc;
    }
  }

  // Neighbor pools. prefix_* structures grow as locations are processed.
  KnnIndex static_obs(geom.dim, geom.locations);
  for (int loc : geom.observed) static_obs.insert(loc);
  KnnIndex prefix_all(geom.dim, geom.locations);
  KnnIndex prefix_obs(geom.dim, geom.locations);

  std::vector<int> nbrs;
  auto as_latent_role = [&](int j) { return lay.latent_role_pos[j]; };
  auto as_response = [&](int j) { return lay.response_role_pos[j]; };

  for (int loc = 0; loc < n; ++loc) {
    const bool observed = geom.is_observed(loc);

    // conditioning of the latent-role entry
    std::vector<int>* latent_g = nullptr;
    if (!plan.collapsed[loc]) {
      latent_g = &plan.entries[lay.latent_role_pos[loc]].cond;
    } else if (!rf) {
      // collapsed latent-first entry keeps the latent-style conditioning
      latent_g = &plan.entries[lay.latent_role_pos[loc]].cond;
    }

    if (latent_g) {
      switch (scheme.kind) {
        case SchemeKind::rf_full:
          if (observed) {
            static_obs.query(geom.locations[loc], scheme.m, nbrs);
            for (int j : nbrs)
              latent_g->push_back(j < loc && !plan.collapsed[j] ? as_latent_role(j)
                                                                : as_response(j));
          } else {
            prefix_all.query(geom.locations[loc], scheme.m, nbrs);
            for (int j : nbrs) latent_g->push_back(as_latent_role(j));
          }
          break;
        case SchemeKind::rf_stand:
          // observed latents behave exactly as in rf-full; only prediction
          // latents replace observed-latent neighbors with their responses
          if (observed) {
            static_obs.query(geom.locations[loc], scheme.m, nbrs);
            for (int j : nbrs)
              latent_g->push_back(j < loc && !plan.collapsed[j] ? as_latent_role(j)
                                                                : as_response(j));
          } else {
            prefix_all.query(geom.locations[loc], scheme.m, nbrs);
            for (int j : nbrs)
              latent_g->push_back(geom.is_observed(j) ? as_response(j) : as_latent_role(j));
          }
          break;
        case SchemeKind::rf_ind:
          static_obs.query(geom.locations[loc], scheme.m, nbrs);
          for (int j : nbrs) latent_g->push_back(as_response(j));
          break;
        case SchemeKind::lf_full:
          prefix_all.query(geom.locations[loc], scheme.m, nbrs);
          for (int j : nbrs) latent_g->push_back(as_latent_role(j));
          break;
        case SchemeKind::lf_ind:
          prefix_obs.query(geom.locations[loc], scheme.m, nbrs);
          for (int j : nbrs) latent_g->push_back(as_latent_role(j));
          break;
        case SchemeKind::lf_auto:
          for (int j = std::max(0, loc - scheme.m); j < loc; ++j)
            latent_g->push_back(as_latent_role(j));
          break;
      }
      std::sort(latent_g->begin(), latent_g->end());
    }

    // conditioning of the data entry
    if (observed && (rf || !plan.collapsed[loc])) {
      std::vector<int>& g = plan.entries[lay.response_role_pos[loc]].cond;
      if (rf) {
        if (scheme.likelihood_mode) {
          prefix_obs.query(geom.locations[loc], scheme.m, nbrs);
          for (int j : nbrs) g.push_back(as_response(j));
          std::sort(g.begin(), g.end());
        }
      } else {
        g.push_back(lay.latent_role_pos[loc]);
      }
    }

    prefix_all.insert(loc);
    if (observed) prefix_obs.insert(loc);
  }

  for (int pos = 0; pos < x_size; ++pos) {
    const PlanEntry& e = plan.entries[pos];
    if (e.kind == VarKind::latent) {
      plan.free_index_of_loc[e.loc] = static_cast<int>(plan.latent_pos.size());
      plan.latent_pos.push_back(pos);
      plan.free_latent_loc.push_back(e.loc);
    }
  }
  plan.response_pos.assign(n_obs, -1);
  for (int loc = 0; loc < n; ++loc)
    if (geom.is_observed(loc)) plan.response_pos[geom.obs_rank_of[loc]] = lay.response_role_pos[loc];

  return plan;
}

double plan_model_cov(const ConditioningPlan& plan, const GeometryModel& geom,
                      const MaternParams& params, const NoiseModel& noise, int i, int j) {
  const PlanEntry& a = plan.entries[i];
  const PlanEntry& b = plan.entries[j];
  return model_cov(a.kind, a.loc, b.kind, b.loc, geom, params, noise);
}

PlanStatistics plan_statistics(const ConditioningPlan& plan) {
  PlanStatistics s;
  std::vector<int> depth(plan.x_size(), 1);
  for (int pos = 0; pos < plan.x_size(); ++pos) {
    const PlanEntry& e = plan.entries[pos];
    int g = static_cast<int>(e.cond.size());
    s.total_conditioning += g;
    if (e.kind == VarKind::latent) {
      ++s.n_latent;
      s.max_g_latent = std::max(s.max_g_latent, g);
    } else {
      ++s.n_response;
      s.max_g_response = std::max(s.max_g_response, g);
    }
    for (int j : e.cond) depth[pos] = std::max(depth[pos], depth[j] + 1);
    s.dag_depth = std::max(s.dag_depth, depth[pos]);
  }
  return s;
}

void validate_plan(const ConditioningPlan& plan) {
  std::vector<int> latent_of_loc(plan.n, -1), response_of_loc(plan.n, -1);
  for (int pos = 0; pos < plan.x_size(); ++pos) {
    const PlanEntry& e = plan.entries[pos];
    (e.kind == VarKind::latent ? latent_of_loc : response_of_loc)[e.loc] = pos;
    int prev = -1;
    for (int j : e.cond) {
      if (j <= prev) throw numerical_error("plan: conditioning set not strictly ascending");
      if (j >= pos) throw numerical_error("plan: conditioning on a non-predecessor");
      prev = j;
    }
  }
  for (int pos = 0; pos < plan.x_size(); ++pos) {
    const PlanEntry& e = plan.entries[pos];
    std::vector<int> locs;
    for (int j : e.cond) locs.push_back(plan.entries[j].loc);
    std::sort(locs.begin(), locs.end());
    if (std::adjacent_find(locs.begin(), locs.end()) != locs.end())
      throw numerical_error("plan: conditions on two entries at one location");
    if (e.kind == VarKind::latent && static_cast<int>(e.cond.size()) > plan.m)
      throw numerical_error("plan: latent conditioning set exceeds m");
  }
}

}  // namespace vecchia
