#include "vecchia/prediction.hpp"

#include <cmath>

#include "vecchia/errors.hpp"
#include "vecchia/rng.hpp"

namespace vecchia {

namespace {

// z value addressed by x position of a data entry
struct DataLookup {
  std::vector<int> rank_of_pos;  // x position -> observed rank, -1 otherwise
  DataLookup(const ConditioningPlan& plan) : rank_of_pos(plan.x_size(), -1) {
    for (int r = 0; r < plan.n_obs; ++r) rank_of_pos[plan.response_pos[r]] = r;
  }
};

std::vector<double> gather_perm(const SparseTriangularFactor& V, const std::vector<double>& b) {
  if (!V.has_perm()) return b;
  std::vector<double> t(b.size());
  for (int a = 0; a < V.dim; ++a) t[a] = b[V.perm[a]];
  return t;
}

std::vector<double> scatter_perm(const SparseTriangularFactor& V, const std::vector<double>& w) {
  if (!V.has_perm()) return w;
  std::vector<double> r(w.size());
  for (int a = 0; a < V.dim; ++a) r[V.perm[a]] = w[a];
  return r;
}

// s = U_{l,.} U_{r,.}' z  in free-latent coordinates
std::vector<double> information_vector(const SparseTriangularFactor& U,
                                       const ConditioningPlan& plan,
                                       const std::vector<double>& z_obs) {
  const DataLookup lk(plan);
  const int N = plan.x_size();
  std::vector<double> w(N, 0.0);  // U_{r,.}' z
  for (int c = 0; c < N; ++c) {
    double acc = 0.0;
    if (lk.rank_of_pos[c] >= 0) acc += U.diag[c] * z_obs[lk.rank_of_pos[c]];
    for (std::int64_t k = U.col_ptr[c]; k < U.col_ptr[c + 1]; ++k) {
      int rank = lk.rank_of_pos[U.row_idx[k]];
      if (rank >= 0) acc += U.val[k] * z_obs[rank];
    }
    w[c] = acc;
  }
  std::vector<int> free_of_pos(N, -1);
  for (int f = 0; f < plan.n_free(); ++f) free_of_pos[plan.latent_pos[f]] = f;
  std::vector<double> s(plan.n_free(), 0.0);
  for (int c = 0; c < N; ++c) {
    if (w[c] == 0.0) continue;
    if (free_of_pos[c] >= 0) s[free_of_pos[c]] += U.diag[c] * w[c];
    for (std::int64_t k = U.col_ptr[c]; k < U.col_ptr[c + 1]; ++k) {
      int f = free_of_pos[U.row_idx[k]];
      if (f >= 0) s[f] += U.val[k] * w[c];
    }
  }
  return s;
}

std::vector<double> full_from_free(const ConditioningPlan& plan,
                                   const std::vector<double>& free_values,
                                   const std::vector<double>& z_obs,
                                   bool collapsed_from_data) {
  std::vector<double> out(plan.n, 0.0);
  for (int f = 0; f < plan.n_free(); ++f) out[plan.free_latent_loc[f]] = free_values[f];
  if (collapsed_from_data) {
    for (int r = 0; r < plan.n_obs; ++r) {
      int loc = plan.entries[plan.response_pos[r]].loc;
      if (plan.collapsed[loc]) out[loc] = z_obs[r];
    }
  }
  return out;
}

}  // namespace

std::vector<double> w_solve(const SparseTriangularFactor& V, const std::vector<double>& b) {
  auto t = gather_perm(V, b);
  t = solve_upper(V, std::move(t));
  t = solve_upper_transpose(V, std::move(t));
  return scatter_perm(V, t);
}

std::vector<double> posterior_mean(const SparseTriangularFactor& U,
                                   const SparseTriangularFactor& V,
                                   const ConditioningPlan& plan,
                                   const std::vector<double>& z_obs) {
  if (static_cast<int>(z_obs.size()) != plan.n_obs)
    throw input_error("posterior_mean: z_obs length mismatch");

  std::vector<double> mu_free;
  if (plan.response_first() && !V.has_perm()) {
    // mu = -(U_rl U_ll^{-1})' z: one transposed solve on V = U_ll
    const DataLookup lk(plan);
    std::vector<double> s(plan.n_free(), 0.0);
    for (int f = 0; f < plan.n_free(); ++f) {
      int c = plan.latent_pos[f];
      double acc = 0.0;
      for (std::int64_t k = U.col_ptr[c]; k < U.col_ptr[c + 1]; ++k) {
        int rank = lk.rank_of_pos[U.row_idx[k]];
        if (rank >= 0) acc += U.val[k] * z_obs[rank];
      }
      s[f] = -acc;
    }
    mu_free = solve_upper_transpose(V, std::move(s));
  } else {
    std::vector<double> s = information_vector(U, plan, z_obs);
    for (double& v : s) v = -v;
    mu_free = w_solve(V, s);
  }
  return full_from_free(plan, mu_free, z_obs, true);
}

std::vector<double> posterior_variances(const SparseTriangularFactor& V,
                                        const ConditioningPlan& plan, VarianceMode mode) {
  std::vector<double> var_free(plan.n_free(), 0.0);
  if (mode == VarianceMode::fast) {
    SelectedInverse S = selected_inverse(V, SelInvMode::fast);
    var_free = S.diagonal();
  } else {
    // diag(W^{-1}) = ((V^{-1} I) o (V^{-1} I))' 1, one column per latent
    std::vector<int> factor_of(V.dim);
    for (int a = 0; a < V.dim; ++a) factor_of[V.has_perm() ? V.perm[a] : a] = a;
    std::vector<double> e(V.dim, 0.0);
    for (int f = 0; f < plan.n_free(); ++f) {
      e.assign(V.dim, 0.0);
      e[factor_of[f]] = 1.0;
      auto col = solve_upper(V, e);
      double acc = 0.0;
      for (double v : col) acc += v * v;
      var_free[f] = acc;
    }
  }
  std::vector<double> out(plan.n, 0.0);
  for (int f = 0; f < plan.n_free(); ++f) out[plan.free_latent_loc[f]] = var_free[f];
  return out;
}

LincombResult lincomb_distribution(const SparseTriangularFactor& V,
                                   const ConditioningPlan& plan,
                                   const std::vector<double>& mean_full,
                                   const Eigen::MatrixXd& H, bool variance_only) {
  if (H.cols() != plan.n) throw input_error("lincomb_distribution: H must have n columns");
  const int rows = static_cast<int>(H.rows());
  if (!variance_only && rows > 5000)
    throw config_error("lincomb_distribution: full covariance capped at 5000 rows");

  LincombResult out;
  out.mean.resize(rows);
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int c = 0; c < plan.n; ++c) acc += H(r, c) * mean_full[c];
    out.mean(r) = acc;
  }

  Eigen::MatrixXd B;
  if (!variance_only) B.resize(V.dim, rows);
  out.var.resize(rows);
  std::vector<double> h(V.dim);
  for (int r = 0; r < rows; ++r) {
    for (int a = 0; a < V.dim; ++a) {
      int f = V.has_perm() ? V.perm[a] : a;
      h[a] = H(r, plan.free_latent_loc[f]);
    }
    auto col = solve_upper(V, h);
    double acc = 0.0;
    for (double v : col) acc += v * v;
    out.var(r) = acc;
    if (!variance_only)
      for (int a = 0; a < V.dim; ++a) B(a, r) = col[a];
  }
  if (!variance_only) out.cov = B.transpose() * B;
  return out;
}

std::vector<double> sample_with_normals(const SparseTriangularFactor& V,
                                        const ConditioningPlan& plan,
                                        const std::vector<double>& mean_full,
                                        const std::vector<double>& normals) {
  if (static_cast<int>(normals.size()) != V.dim)
    throw input_error("sample_with_normals: need n_free normals");
  auto u = solve_upper_transpose(V, normals);
  u = scatter_perm(V, u);
  std::vector<double> y = mean_full;
  for (int f = 0; f < plan.n_free(); ++f) y[plan.free_latent_loc[f]] += u[f];
  return y;
}

std::vector<std::vector<double>> conditional_sample(const SparseTriangularFactor& V,
                                                    const ConditioningPlan& plan,
                                                    const std::vector<double>& mean_full,
                                                    int count, std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  out.reserve(count);
  std::vector<double> a(V.dim);
  for (int s = 0; s < count; ++s) {
    RandomStream rs(seed, static_cast<std::uint64_t>(s));
    for (int i = 0; i < V.dim; ++i) a[i] = rs.normal(i);
    out.push_back(sample_with_normals(V, plan, mean_full, a));
  }
  return out;
}

PredictionResult predict_response(PredictionResult latent, double tau2) {
  for (double& v : latent.variance) v += tau2;
  return latent;
}

PredictionResult predict_response(PredictionResult latent, const std::vector<double>& tau2) {
  if (tau2.size() != latent.variance.size())
    throw input_error("predict_response: nugget vector length mismatch");
  for (std::size_t i = 0; i < tau2.size(); ++i) latent.variance[i] += tau2[i];
  return latent;
}

PredictionResult predict_rf_stand_ponly(const SparseTriangularFactor& U,
                                        const ConditioningPlan& plan,
                                        const std::vector<double>& z_obs,
                                        VarianceMode mode) {
  if (plan.scheme != SchemeKind::rf_stand)
    throw config_error("predict_rf_stand_ponly: plan is not rf-stand");

  // prediction latents are the trailing free latents
  int first_p = plan.n_free();
  for (int f = 0; f < plan.n_free(); ++f)
    if (plan.free_latent_loc[f] >= plan.n_obs) {
      first_p = f;
      break;
    }
  const int np = plan.n_free() - first_p;
  const int pos_off = plan.latent_pos.empty() ? 0 : plan.latent_pos[0];
  (void)pos_off;

  SparseTriangularFactor Vpp;
  Vpp.role = SparseTriangularFactor::Role::V;
  Vpp.dim = np;
  Vpp.diag.resize(np);
  Vpp.col_ptr.assign(np + 1, 0);
  const DataLookup lk(plan);
  std::vector<double> s(np, 0.0);
  const int first_p_pos = np > 0 ? plan.latent_pos[first_p] : 0;
  std::vector<std::vector<int>> rows(np);
  std::vector<std::vector<double>> vals(np);
  for (int t = 0; t < np; ++t) {
    int c = plan.latent_pos[first_p + t];
    Vpp.diag[t] = U.diag[c];
    double acc = 0.0;
    for (std::int64_t k = U.col_ptr[c]; k < U.col_ptr[c + 1]; ++k) {
      int r = U.row_idx[k];
      int rank = lk.rank_of_pos[r];
      if (rank >= 0) {
        acc += U.val[k] * z_obs[rank];
      } else if (r >= first_p_pos) {
        rows[t].push_back(r - first_p_pos);
        vals[t].push_back(U.val[k]);
      }
      // rows at observed latents cannot occur under rf-stand
    }
    s[t] = -acc;
  }
  for (int t = 0; t < np; ++t) Vpp.col_ptr[t + 1] = Vpp.col_ptr[t] + static_cast<std::int64_t>(rows[t].size());
  Vpp.row_idx.resize(Vpp.col_ptr[np]);
  Vpp.val.resize(Vpp.col_ptr[np]);
  for (int t = 0; t < np; ++t) {
    std::copy(rows[t].begin(), rows[t].end(), Vpp.row_idx.begin() + Vpp.col_ptr[t]);
    std::copy(vals[t].begin(), vals[t].end(), Vpp.val.begin() + Vpp.col_ptr[t]);
  }

  PredictionResult out;
  out.mean = solve_upper_transpose(Vpp, std::move(s));
  if (mode == VarianceMode::fast) {
    out.variance = selected_inverse(Vpp, SelInvMode::fast).diagonal();
  } else {
    out.variance.assign(np, 0.0);
    std::vector<double> e(np, 0.0);
    for (int t = 0; t < np; ++t) {
      e.assign(np, 0.0);
      e[t] = 1.0;
      auto col = solve_upper(Vpp, e);
      double acc = 0.0;
      for (double v : col) acc += v * v;
      out.variance[t] = acc;
    }
  }
  return out;
}

}  // namespace vecchia
