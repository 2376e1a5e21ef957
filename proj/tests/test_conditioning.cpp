#include <algorithm>

#include "doctest.h"
#include "oracles.hpp"
#include "vecchia/conditioning.hpp"
#include "vecchia/errors.hpp"
#include "vecchia/rng.hpp"

using namespace vecchia;

namespace {

GeometryModel collinear_geometry() {
  // observed on a dyadic grid (ties are exact in floating point), one
  // prediction point midway between the second and third
  std::vector<Point> pts{{0.125, 0}, {0.25, 0}, {0.375, 0}, {0.5, 0}, {0.625, 0}, {0.3125, 0}};
  std::vector<bool> is_pred{false, false, false, false, false, true};
  return GeometryModel::build(1, pts, is_pred, Ordering::coordinate, true);
}

GeometryModel random_geometry(int n_obs, int n_pred, std::uint64_t seed, int dim = 2) {
  RandomStream rs(seed);
  std::vector<Point> pts;
  std::vector<bool> is_pred;
  for (int i = 0; i < n_obs + n_pred; ++i) {
    pts.push_back({rs.next_uniform(), dim == 2 ? rs.next_uniform() : 0.0});
    is_pred.push_back(i >= n_obs);
  }
  return GeometryModel::build(dim, pts, is_pred,
                              dim == 1 ? Ordering::coordinate : Ordering::maxmin, true);
}

}  // namespace

TEST_CASE("lf-auto: autoregressive conditioning sets") {
  std::vector<Point> pts{{0.1, 0}, {0.3, 0}, {0.6, 0}, {0.8, 0}};
  GeometryModel g =
      GeometryModel::build(1, pts, {false, false, false, false}, Ordering::coordinate, false);
  NoiseModel noise = NoiseModel::constant(0.1);
  ConditioningPlan plan = build_plan({SchemeKind::lf_auto, 2}, g, noise);
  validate_plan(plan);

  CHECK(plan.entries[0].cond.empty());
  CHECK(plan.entries[1].cond == std::vector<int>{0});
  CHECK(plan.entries[2].cond == std::vector<int>{0, 1});
  CHECK(plan.entries[3].cond == std::vector<int>{1, 2});
  // responses condition on their own latent only
  for (int r = 0; r < plan.n_obs; ++r)
    CHECK(plan.entries[plan.response_pos[r]].cond ==
          std::vector<int>{plan.entries[plan.response_pos[r]].loc});
}

TEST_CASE("rf-ind: latents condition on responses only") {
  GeometryModel g = random_geometry(30, 10, 21);
  NoiseModel noise = NoiseModel::constant(0.2);
  ConditioningPlan plan = build_plan({SchemeKind::rf_ind, 4}, g, noise);
  validate_plan(plan);

  for (int f = 0; f < plan.n_free(); ++f) {
    const PlanEntry& e = plan.entries[plan.latent_pos[f]];
    CHECK(static_cast<int>(e.cond.size()) == std::min(4, plan.n_obs));
    std::vector<int> locs;
    for (int c : e.cond) {
      CHECK(plan.entries[c].kind == VarKind::response);
      locs.push_back(plan.entries[c].loc);
    }
    // the m nearest observed locations (self included for observed latents)
    auto want = oracle::knn_bruteforce(g.locations[e.loc], g.locations, g.observed, 4);
    std::sort(want.begin(), want.end());
    std::sort(locs.begin(), locs.end());
    CHECK(locs == want);
  }
}

TEST_CASE("rf-full: hand enumeration on collinear points") {
  GeometryModel g = collinear_geometry();
  NoiseModel noise = NoiseModel::constant(0.1);
  ConditioningPlan plan = build_plan({SchemeKind::rf_full, 2}, g, noise);
  validate_plan(plan);

  // x = (z_0..z_4, y_0..y_4, y_5); positions 0..4 data, 5..9 observed latents,
  // 10 the prediction latent
  CHECK(plan.x_size() == 11);
  CHECK(plan.latent_pos == std::vector<int>{5, 6, 7, 8, 9, 10});
  CHECK(plan.entries[5].cond == std::vector<int>{0, 1});   // z_0, z_1
  CHECK(plan.entries[6].cond == std::vector<int>{1, 5});   // z_1, y_0
  CHECK(plan.entries[7].cond == std::vector<int>{2, 6});   // z_2, y_1
  CHECK(plan.entries[8].cond == std::vector<int>{3, 7});   // z_3, y_2
  CHECK(plan.entries[9].cond == std::vector<int>{4, 8});   // z_4, y_3
  CHECK(plan.entries[10].cond == std::vector<int>{6, 7});  // y_1, y_2
  for (int r = 0; r < 5; ++r) CHECK(plan.entries[r].cond.empty());  // prediction mode
}

TEST_CASE("rf-stand: prediction latents avoid observed latents") {
  GeometryModel g = collinear_geometry();
  NoiseModel noise = NoiseModel::constant(0.1);
  ConditioningPlan plan = build_plan({SchemeKind::rf_stand, 2}, g, noise);
  validate_plan(plan);

  // observed latents keep the rf-full conditioning
  CHECK(plan.entries[5].cond == std::vector<int>{0, 1});
  CHECK(plan.entries[6].cond == std::vector<int>{1, 5});
  // the prediction latent swaps observed latents for their responses
  CHECK(plan.entries[10].cond == std::vector<int>{1, 2});  // z_1, z_2

  GeometryModel g2 = random_geometry(40, 20, 33);
  ConditioningPlan p2 = build_plan({SchemeKind::rf_stand, 6}, g2, noise);
  for (int f = 0; f < p2.n_free(); ++f) {
    const PlanEntry& e = p2.entries[p2.latent_pos[f]];
    if (e.loc < p2.n_obs) continue;
    for (int c : e.cond) {
      const PlanEntry& ce = p2.entries[c];
      bool obs_latent = ce.kind == VarKind::latent && ce.loc < p2.n_obs;
      CHECK(!obs_latent);
    }
  }
}

TEST_CASE("rf-stand conditions on the same locations as rf-full") {
  GeometryModel g = random_geometry(35, 15, 77);
  NoiseModel noise = NoiseModel::constant(0.15);
  ConditioningPlan full = build_plan({SchemeKind::rf_full, 5}, g, noise);
  ConditioningPlan stand = build_plan({SchemeKind::rf_stand, 5}, g, noise);
  for (int f = 0; f < full.n_free(); ++f) {
    std::vector<int> la, lb;
    for (int c : full.entries[full.latent_pos[f]].cond) la.push_back(full.entries[c].loc);
    for (int c : stand.entries[stand.latent_pos[f]].cond) lb.push_back(stand.entries[c].loc);
    std::sort(la.begin(), la.end());
    std::sort(lb.begin(), lb.end());
    CHECK(la == lb);
  }
}

TEST_CASE("lf-full and lf-ind structure") {
  GeometryModel g = collinear_geometry();
  NoiseModel noise = NoiseModel::constant(0.1);
  ConditioningPlan plan = build_plan({SchemeKind::lf_full, 2}, g, noise);
  validate_plan(plan);

  // x = (y_0..y_5, z_0..z_4); the prediction latent sits at position 5
  CHECK(plan.x_size() == 11);
  CHECK(plan.entries[0].cond.empty());
  CHECK(plan.entries[1].cond == std::vector<int>{0});
  CHECK(plan.entries[2].cond == std::vector<int>{0, 1});
  CHECK(plan.entries[3].cond == std::vector<int>{1, 2});
  CHECK(plan.entries[4].cond == std::vector<int>{2, 3});
  CHECK(plan.entries[5].cond == std::vector<int>{1, 2});  // prediction latent at 0.25
  for (int r = 0; r < plan.n_obs; ++r) {
    CHECK(plan.entries[plan.response_pos[r]].cond.size() == 1);
    CHECK(plan.entries[plan.response_pos[r]].cond[0] ==
          plan.entries[plan.response_pos[r]].loc);
  }

  GeometryModel g2 = random_geometry(30, 20, 13);
  ConditioningPlan ind = build_plan({SchemeKind::lf_ind, 4}, g2, noise);
  validate_plan(ind);
  for (int f = 0; f < ind.n_free(); ++f)
    for (int c : ind.entries[ind.latent_pos[f]].cond) CHECK(ind.entries[c].loc < ind.n_obs);
}

TEST_CASE("conditioning sets nest as m grows") {
  GeometryModel g = random_geometry(25, 15, 44);
  NoiseModel noise = NoiseModel::constant(0.1);
  for (auto kind : {SchemeKind::rf_full, SchemeKind::rf_stand, SchemeKind::rf_ind,
                    SchemeKind::lf_full, SchemeKind::lf_ind}) {
    for (int m = 1; m <= 6; ++m) {
      ConditioningPlan a = build_plan({kind, m, true}, g, noise);
      ConditioningPlan b = build_plan({kind, m + 1, true}, g, noise);
      for (int f = 0; f < a.n_free(); ++f) {
        const auto& ga = a.entries[a.latent_pos[f]].cond;
        const auto& gb = b.entries[b.latent_pos[f]].cond;
        CHECK(std::includes(gb.begin(), gb.end(), ga.begin(), ga.end()));
      }
    }
  }
}

TEST_CASE("m = n-1 gives full conditioning") {
  GeometryModel g = random_geometry(12, 6, 3);
  NoiseModel noise = NoiseModel::constant(0.1);
  int n = g.n();
  for (auto kind : {SchemeKind::rf_full, SchemeKind::rf_stand, SchemeKind::lf_full}) {
    ConditioningPlan plan = build_plan({kind, n - 1, true}, g, noise);
    for (int f = 0; f < plan.n_free(); ++f) {
      const PlanEntry& e = plan.entries[plan.latent_pos[f]];
      // all predecessors up to the latent/response equivalence: one variable
      // per location that has any predecessor entry
      std::vector<int> locs;
      for (int c : e.cond) locs.push_back(plan.entries[c].loc);
      std::sort(locs.begin(), locs.end());
      std::vector<int> want;
      if (plan.response_first()) {
        if (e.loc < plan.n_obs) {
          for (int l = 0; l < plan.n_obs; ++l) want.push_back(l);
        } else {
          for (int l = 0; l < e.loc; ++l) want.push_back(l);
        }
      } else {
        for (int l = 0; l < e.loc; ++l) want.push_back(l);
      }
      CHECK(locs == want);
    }
  }
}

TEST_CASE("zero noise collapses duplicate variables") {
  GeometryModel g = random_geometry(20, 10, 55);
  NoiseModel zero = NoiseModel::constant(0.0);

  ConditioningPlan a = build_plan({SchemeKind::rf_full, 4}, g, zero);
  ConditioningPlan b = build_plan({SchemeKind::rf_stand, 4}, g, zero);
  ConditioningPlan c = build_plan({SchemeKind::lf_full, 4}, g, zero);
  validate_plan(a);
  validate_plan(c);

  CHECK(a.x_size() == g.n());      // one entry per location
  CHECK(a.n_free() == g.n_pred());

  auto conds = [](const ConditioningPlan& p) {
    std::vector<std::vector<int>> out;
    for (int f = 0; f < p.n_free(); ++f) out.push_back(p.entries[p.latent_pos[f]].cond);
    return out;
  };
  // the three convergent schemes produce the same collapsed conditioning;
  // layouts coincide because data entries come first in both families here
  CHECK(conds(a) == conds(b));
  CHECK(conds(a) == conds(c));

  ConditioningPlan i1 = build_plan({SchemeKind::rf_ind, 4}, g, zero);
  ConditioningPlan i2 = build_plan({SchemeKind::lf_ind, 4}, g, zero);
  CHECK(conds(i1) == conds(i2));

  // mixed noise: only the zero-nugget locations collapse
  std::vector<double> tau2(g.n_obs(), 0.3);
  tau2[3] = 0.0;
  tau2[7] = 0.0;
  ConditioningPlan mixed = build_plan({SchemeKind::rf_full, 4}, g, NoiseModel::per_observation(tau2));
  validate_plan(mixed);
  CHECK(mixed.n_free() == g.n() - 2);
  CHECK(mixed.collapsed[3]);
  CHECK(!mixed.collapsed[2]);
}

TEST_CASE("likelihood mode bounds response conditioning by m") {
  GeometryModel g = random_geometry(40, 0, 91);
  NoiseModel noise = NoiseModel::constant(0.2);
  ConditioningPlan plan = build_plan({SchemeKind::rf_full, 3, true}, g, noise);
  PlanStatistics st = plan_statistics(plan);
  CHECK(st.max_g_response <= 3);
  CHECK(st.max_g_latent <= 3);
  CHECK(st.n_latent == 40);
  CHECK(st.n_response == 40);
  CHECK(st.dag_depth > 1);

  ConditioningPlan off = build_plan({SchemeKind::rf_full, 3, false}, g, noise);
  PlanStatistics st2 = plan_statistics(off);
  CHECK(st2.max_g_response == 0);
}

TEST_CASE("scheme/ordering mismatch is a configuration error") {
  RandomStream rs(1);
  std::vector<Point> pts;
  std::vector<bool> is_pred;
  for (int i = 0; i < 10; ++i) {
    pts.push_back({rs.next_uniform(), 0.0});
    is_pred.push_back(i % 2 == 0);
  }
  GeometryModel interleaved = GeometryModel::build(1, pts, is_pred, Ordering::coordinate, false);
  CHECK_THROWS_AS(build_plan({SchemeKind::rf_full, 2}, interleaved, NoiseModel::constant(0.1)),
                  config_error);
}

TEST_CASE("plan statistics on degenerate plans") {
  GeometryModel g = random_geometry(10, 5, 2);
  NoiseModel noise = NoiseModel::constant(0.1);
  ConditioningPlan p0 = build_plan({SchemeKind::rf_ind, 0}, g, noise);
  PlanStatistics st = plan_statistics(p0);
  CHECK(st.max_g_latent == 0);

  ConditioningPlan lf = build_plan({SchemeKind::lf_full, 10}, g, noise);
  for (int r = 0; r < lf.n_obs; ++r)
    CHECK(lf.entries[lf.response_pos[r]].cond.size() == 1);
}
