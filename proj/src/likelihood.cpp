#include "vecchia/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vecchia/errors.hpp"
#include "vecchia/rng.hpp"

namespace vecchia {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Eigen::MatrixXd kernel_gram(const GeometryModel& geom, const MaternParams& params) {
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
  return K;
}

}  // namespace

double vecchia_loglik(const SparseTriangularFactor& U, const SparseTriangularFactor& V,
                      const ConditioningPlan& plan, const std::vector<double>& z_obs) {
  if (static_cast<int>(z_obs.size()) != plan.n_obs)
    throw input_error("vecchia_loglik: z_obs length mismatch");
  const int N = plan.x_size();

  std::vector<int> rank_of_pos(N, -1);
  for (int r = 0; r < plan.n_obs; ++r) rank_of_pos[plan.response_pos[r]] = r;

  // z~ = U_{r,.}' z_o
  std::vector<double> ztil(N, 0.0);
  for (int c = 0; c < N; ++c) {
    double acc = 0.0;
    if (rank_of_pos[c] >= 0) acc += U.diag[c] * z_obs[rank_of_pos[c]];
    for (std::int64_t k = U.col_ptr[c]; k < U.col_ptr[c + 1]; ++k) {
      int r = rank_of_pos[U.row_idx[k]];
      if (r >= 0) acc += U.val[k] * z_obs[r];
    }
    ztil[c] = acc;
  }
  double quad_full = 0.0;
  for (double v : ztil) quad_full += v * v;

  // U_{l,.} z~ in free-latent coordinates
  std::vector<int> free_of_pos(N, -1);
  for (int f = 0; f < plan.n_free(); ++f) free_of_pos[plan.latent_pos[f]] = f;
  std::vector<double> s(plan.n_free(), 0.0);
  for (int c = 0; c < N; ++c) {
    if (ztil[c] == 0.0) continue;
    if (free_of_pos[c] >= 0) s[free_of_pos[c]] += U.diag[c] * ztil[c];
    for (std::int64_t k = U.col_ptr[c]; k < U.col_ptr[c + 1]; ++k) {
      int f = free_of_pos[U.row_idx[k]];
      if (f >= 0) s[f] += U.val[k] * ztil[c];
    }
  }

  double quad_latent = 0.0;
  if (plan.n_free() > 0) {
    std::vector<double> t(V.dim);
    for (int a = 0; a < V.dim; ++a) t[a] = s[V.has_perm() ? V.perm[a] : a];
    t = solve_upper(V, std::move(t));
    for (double v : t) quad_latent += v * v;
  }

  double logdet_u = 0.0;
  for (int i = 0; i < N; ++i) {
    if (!(U.diag[i] > 0)) throw numerical_error("vecchia_loglik: nonpositive U diagonal");
    logdet_u += std::log(U.diag[i]);
  }
  double logdet_v = 0.0;
  for (int i = 0; i < V.dim; ++i) {
    if (!(V.diag[i] > 0)) throw numerical_error("vecchia_loglik: nonpositive V diagonal");
    logdet_v += std::log(V.diag[i]);
  }

  double minus2 = -2.0 * logdet_u + 2.0 * logdet_v + quad_full - quad_latent +
                  plan.n_obs * kLog2Pi;
  return -0.5 * minus2;
}

GaussianDist exact_posterior(const GeometryModel& geom, const MaternParams& params,
                             const NoiseModel& noise, const std::vector<double>& z_obs) {
  const int n = geom.n();
  const int no = geom.n_obs();
  if (n > 2000) throw config_error("exact_posterior: dense path capped at 2000 locations");
  if (static_cast<int>(z_obs.size()) != no)
    throw input_error("exact_posterior: z_obs length mismatch");

  Eigen::MatrixXd K = kernel_gram(geom, params);
  Eigen::MatrixXd Coo(no, no);
  for (int a = 0; a < no; ++a)
    for (int b = 0; b < no; ++b) Coo(a, b) = K(geom.observed[a], geom.observed[b]);
  for (int a = 0; a < no; ++a) Coo(a, a) += noise.at(a);

  Eigen::LLT<Eigen::MatrixXd> llt(Coo);
  if (llt.info() != Eigen::Success)
    throw numerical_error("exact_posterior: observation covariance not positive definite");

  Eigen::MatrixXd Kno(n, no);
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < no; ++b) Kno(i, b) = K(i, geom.observed[b]);

  Eigen::VectorXd z(no);
  for (int b = 0; b < no; ++b) z(b) = z_obs[b];

  GaussianDist out;
  out.mean = Kno * llt.solve(z);
  out.cov = K - Kno * llt.solve(Kno.transpose());
  return out;
}

GaussianDist vecchia_implied_joint(const SparseTriangularFactor& U,
                                   const SparseTriangularFactor& V,
                                   const ConditioningPlan& plan,
                                   const std::vector<double>& z_obs) {
  if (plan.n > 2000) throw config_error("vecchia_implied_joint: dense path capped at 2000");
  GaussianDist out;
  auto mu = posterior_mean(U, V, plan, z_obs);
  out.mean.resize(plan.n);
  for (int i = 0; i < plan.n; ++i) out.mean(i) = mu[i];

  out.cov = Eigen::MatrixXd::Zero(plan.n, plan.n);
  if (plan.n_free() > 0) {
    Eigen::MatrixXd W = densify_normal_matrix(V);
    Eigen::MatrixXd Sigma = W.llt().solve(Eigen::MatrixXd::Identity(W.rows(), W.cols()));
    for (int a = 0; a < plan.n_free(); ++a)
      for (int b = 0; b < plan.n_free(); ++b)
        out.cov(plan.free_latent_loc[a], plan.free_latent_loc[b]) = Sigma(a, b);
  }
  return out;
}

double gaussian_kl(const GaussianDist& P, const GaussianDist& Q) {
  const int k = static_cast<int>(P.mean.size());
  if (Q.mean.size() != k || P.cov.rows() != k || Q.cov.rows() != k)
    throw input_error("gaussian_kl: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> lltQ(Q.cov);
  if (lltQ.info() != Eigen::Success)
    throw numerical_error("gaussian_kl: Q covariance is singular");
  Eigen::LLT<Eigen::MatrixXd> lltP(P.cov);
  if (lltP.info() != Eigen::Success)
    throw numerical_error("gaussian_kl: P covariance is singular");

  double logdet_q = 0, logdet_p = 0;
  for (int i = 0; i < k; ++i) {
    logdet_q += 2.0 * std::log(lltQ.matrixLLT()(i, i));
    logdet_p += 2.0 * std::log(lltP.matrixLLT()(i, i));
  }
  double trace = lltQ.solve(P.cov).trace();
  Eigen::VectorXd d = Q.mean - P.mean;
  double quad = d.dot(lltQ.solve(d));
  return 0.5 * (trace + quad - k + logdet_q - logdet_p);
}

namespace {

struct CklProblem {
  // variables in the evaluation order
  std::vector<VarKind> kind;
  std::vector<int> loc;
  // targets: position in the order plus conditioning positions
  std::vector<int> target_pos;
  std::vector<std::vector<int>> target_cond;
};

double ckl_evaluate(const CklProblem& prob, const GeometryModel& geom,
                    const MaternParams& params, const NoiseModel& noise) {
  const int N = static_cast<int>(prob.kind.size());
  Eigen::MatrixXd C(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      double v = model_cov(prob.kind[i], prob.loc[i], prob.kind[j], prob.loc[j], geom, params,
                           noise);
      C(i, j) = v;
      C(j, i) = v;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success)
    throw numerical_error("ckl: joint covariance not positive definite");
  Eigen::MatrixXd L = llt.matrixL();

  double total = 0.0;
  Eigen::MatrixXd Cg;
  Eigen::VectorXd cg;
  for (std::size_t t = 0; t < prob.target_pos.size(); ++t) {
    int i = prob.target_pos[t];
    const auto& g = prob.target_cond[t];
    double numer = C(i, i);
    if (!g.empty()) {
      const int k = static_cast<int>(g.size());
      Cg.resize(k, k);
      cg.resize(k);
      for (int a = 0; a < k; ++a) {
        cg(a) = C(g[a], i);
        for (int b = a; b < k; ++b) {
          Cg(a, b) = C(g[a], g[b]);
          Cg(b, a) = Cg(a, b);
        }
      }
      Eigen::LLT<Eigen::MatrixXd> lg(Cg);
      if (lg.info() != Eigen::Success)
        throw numerical_error("ckl: conditioning block not positive definite");
      numer -= cg.dot(lg.solve(cg));
    }
    double denom = L(i, i) * L(i, i);  // var(x_i | x_1..i-1)
    total += 0.5 * (std::log(numer) - std::log(denom));
  }
  return total;
}

// Rebuilds the plan's conditioning sets against a rearranged variable order.
CklProblem arrange(const ConditioningPlan& plan, const std::vector<int>& order,
                   const std::vector<int>& targets) {
  CklProblem prob;
  const int N = static_cast<int>(order.size());
  std::vector<int> new_pos(plan.x_size(), -1);
  prob.kind.resize(N);
  prob.loc.resize(N);
  for (int q = 0; q < N; ++q) {
    new_pos[order[q]] = q;
    prob.kind[q] = plan.entries[order[q]].kind;
    prob.loc[q] = plan.entries[order[q]].loc;
  }
  for (int pos : targets) {
    prob.target_pos.push_back(new_pos[pos]);
    std::vector<int> g;
    for (int c : plan.entries[pos].cond) {
      if (new_pos[c] < 0)
        throw config_error("ckl: conditioning variable missing from the arranged order");
      g.push_back(new_pos[c]);
    }
    prob.target_cond.push_back(std::move(g));
  }
  return prob;
}

}  // namespace

double ckl_vecchia(const ConditioningPlan& plan, const GeometryModel& geom,
                   const MaternParams& params, const NoiseModel& noise) {
  return ckl_scheme(plan, geom, params, noise, CklTarget::joint_x);
}

double ckl_scheme(const ConditioningPlan& plan, const GeometryModel& geom,
                  const MaternParams& params, const NoiseModel& noise, CklTarget target) {
  if (plan.x_size() + plan.n > 4000) throw config_error("ckl: dense path capacity exceeded");

  std::vector<int> order, targets;
  switch (target) {
    case CklTarget::joint_x: {
      order.resize(plan.x_size());
      std::iota(order.begin(), order.end(), 0);
      targets = order;
      break;
    }
    case CklTarget::pred_given_rest: {
      // prefix: everything except prediction latents, then y_p in plan order
      std::vector<int> pred;
      for (int pos = 0; pos < plan.x_size(); ++pos) {
        const PlanEntry& e = plan.entries[pos];
        bool is_pred_latent = e.kind == VarKind::latent && e.loc >= plan.n_obs;
        if (plan.scheme == SchemeKind::lf_auto)
          is_pred_latent = e.kind == VarKind::latent && !geom.is_observed(e.loc);
        (is_pred_latent ? pred : order).push_back(pos);
      }
      targets = pred;
      order.insert(order.end(), pred.begin(), pred.end());
      break;
    }
    case CklTarget::latents_given_data: {
      if (!plan.response_first())
        throw config_error("ckl latents_given_data: response-first schemes only");
      std::vector<int> lat;
      for (int pos = 0; pos < plan.x_size(); ++pos)
        (plan.entries[pos].kind == VarKind::latent ? lat : order).push_back(pos);
      targets = lat;
      order.insert(order.end(), lat.begin(), lat.end());
      break;
    }
    case CklTarget::pred_given_data: {
      if (plan.scheme != SchemeKind::rf_stand && plan.scheme != SchemeKind::rf_ind)
        throw config_error("ckl pred_given_data: rf-stand or rf-ind only");
      // drop observed latents entirely; their removal leaves f^(y_p|z_o) intact
      std::vector<int> pred;
      for (int pos = 0; pos < plan.x_size(); ++pos) {
        const PlanEntry& e = plan.entries[pos];
        if (e.kind == VarKind::response)
          order.push_back(pos);
        else if (e.loc >= plan.n_obs)
          pred.push_back(pos);
      }
      targets = pred;
      order.insert(order.end(), pred.begin(), pred.end());
      break;
    }
  }
  return ckl_evaluate(arrange(plan, order, targets), geom, params, noise);
}

KLReport kl_report(const Scheme& scheme, const GeometryModel& geom, const MaternParams& params,
                   const NoiseModel& noise, int replicates, std::uint64_t seed) {
  const int n = geom.n();
  const int no = geom.n_obs();
  if (n > 2000) throw config_error("kl_report: dense path capped at 2000 locations");
  if (replicates <= 0) throw config_error("kl_report: need at least one replicate");

  ConditioningPlan plan = build_plan(scheme, geom, noise);
  SparseTriangularFactor U = build_U(plan, geom, params, noise);
  SparseTriangularFactor V = derive_V(U, plan);

  // covariances are replicate-independent
  Eigen::MatrixXd K = kernel_gram(geom, params);
  Eigen::MatrixXd Coo(no, no);
  for (int a = 0; a < no; ++a)
    for (int b = 0; b < no; ++b) Coo(a, b) = K(geom.observed[a], geom.observed[b]);
  for (int a = 0; a < no; ++a) Coo(a, a) += noise.at(a);
  Eigen::LLT<Eigen::MatrixXd> lltC(Coo);
  if (lltC.info() != Eigen::Success)
    throw numerical_error("kl_report: observation covariance not positive definite");
  Eigen::MatrixXd Kno(n, no);
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < no; ++b) Kno(i, b) = K(i, geom.observed[b]);
  Eigen::MatrixXd A = Kno * lltC.solve(Eigen::MatrixXd::Identity(no, no));  // exact mean map
  Eigen::MatrixXd Sig_ex = K - Kno * lltC.solve(Kno.transpose());

  Eigen::MatrixXd Sig_v = Eigen::MatrixXd::Zero(n, n);
  {
    Eigen::MatrixXd W = densify_normal_matrix(V);
    Eigen::MatrixXd S = W.llt().solve(Eigen::MatrixXd::Identity(W.rows(), W.cols()));
    for (int a = 0; a < plan.n_free(); ++a)
      for (int b = 0; b < plan.n_free(); ++b)
        Sig_v(plan.free_latent_loc[a], plan.free_latent_loc[b]) = S(a, b);
  }

  // free (non-collapsed) coordinates per block
  std::vector<int> blk_p, blk_o;
  for (int i = 0; i < n; ++i) {
    if (plan.collapsed[i]) continue;
    (geom.is_observed(i) ? blk_o : blk_p).push_back(i);
  }

  struct JointConst {
    Eigen::LLT<Eigen::MatrixXd> llt2;
    double constant = 0;
    bool ok = false;
  };
  auto joint_setup = [&](const std::vector<int>& blk) {
    JointConst jc;
    const int k = static_cast<int>(blk.size());
    if (k == 0) return jc;
    Eigen::MatrixXd S1(k, k), S2(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        S1(a, b) = Sig_ex(blk[a], blk[b]);
        S2(a, b) = Sig_v(blk[a], blk[b]);
      }
    jc.llt2.compute(S2);
    if (jc.llt2.info() != Eigen::Success)
      throw numerical_error("kl_report: implied covariance not positive definite");
    Eigen::LLT<Eigen::MatrixXd> llt1(S1);
    if (llt1.info() != Eigen::Success)
      throw numerical_error("kl_report: exact covariance not positive definite");
    double logdet1 = 0, logdet2 = 0;
    for (int i = 0; i < k; ++i) {
      logdet1 += 2.0 * std::log(llt1.matrixLLT()(i, i));
      logdet2 += 2.0 * std::log(jc.llt2.matrixLLT()(i, i));
    }
    double trace = jc.llt2.solve(S1).trace();
    jc.constant = 0.5 * (trace - k + logdet2 - logdet1);
    jc.ok = true;
    return jc;
  };
  JointConst jp = joint_setup(blk_p), jo = joint_setup(blk_o);

  // marginal constants: 1/2 (s1/s2 - 1 + log(s2/s1)) averaged over the block
  auto marg_const = [&](const std::vector<int>& blk) {
    double acc = 0;
    for (int i : blk) {
      double s1 = Sig_ex(i, i), s2 = Sig_v(i, i);
      acc += 0.5 * (s1 / s2 - 1.0 + std::log(s2 / s1));
    }
    return blk.empty() ? 0.0 : acc / blk.size();
  };
  double mp_const = marg_const(blk_p), mo_const = marg_const(blk_o);

  Eigen::MatrixXd Lo = lltC.matrixL();
  KLReport rep;
  rep.replicates = replicates;
  double jp_acc = 0, jo_acc = 0, mp_acc = 0, mo_acc = 0;
  std::vector<double> z(no);
  for (int r = 0; r < replicates; ++r) {
    RandomStream rs(derive_seed(seed, r), 0);
    Eigen::VectorXd eps(no);
    for (int i = 0; i < no; ++i) eps(i) = rs.normal(i);
    Eigen::VectorXd zr = Lo * eps;
    for (int i = 0; i < no; ++i) z[i] = zr(i);

    auto mu_hat = posterior_mean(U, V, plan, z);
    Eigen::VectorXd mu_ex = A * zr;
    Eigen::VectorXd dmu(n);
    for (int i = 0; i < n; ++i) dmu(i) = mu_hat[i] - mu_ex(i);

    auto joint_quad = [&](const JointConst& jc, const std::vector<int>& blk) {
      if (!jc.ok) return 0.0;
      Eigen::VectorXd d(blk.size());
      for (std::size_t a = 0; a < blk.size(); ++a) d(a) = dmu(blk[a]);
      return 0.5 * d.dot(jc.llt2.solve(d));
    };
    jp_acc += jp.constant + joint_quad(jp, blk_p);
    jo_acc += jo.constant + joint_quad(jo, blk_o);

    auto marg_quad = [&](const std::vector<int>& blk) {
      if (blk.empty()) return 0.0;
      double acc = 0;
      for (int i : blk) acc += 0.5 * dmu(i) * dmu(i) / Sig_v(i, i);
      return acc / blk.size();
    };
    mp_acc += mp_const + marg_quad(blk_p);
    mo_acc += mo_const + marg_quad(blk_o);
  }

  auto clamp = [](double v) { return (v < 0 && v >= -1e-10) ? 0.0 : v; };
  rep.joint_pred = clamp(jp_acc / replicates);
  rep.joint_obs = clamp(jo_acc / replicates);
  rep.marginal_pred = clamp(mp_acc / replicates);
  rep.marginal_obs = clamp(mo_acc / replicates);
  return rep;
}

namespace {

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;
};

}  // namespace

FitResult fit_parameters(const GeometryModel& geom, const std::vector<double>& z_obs,
                         const Scheme& scheme, const FitOptions& options) {
  if (geom.n_pred() != 0)
    throw config_error("fit_parameters: geometry must contain only observed locations");
  options.init.validate();

  Scheme lk = scheme;
  lk.likelihood_mode = true;

  // parameter vector: (variance, range, smoothness, tau2); frozen where lo==hi
  std::array<double, 4> lo{options.lo_variance, options.lo_range, options.lo_smoothness,
                           options.lo_tau2};
  std::array<double, 4> hi{options.hi_variance, options.hi_range, options.hi_smoothness,
                           options.hi_tau2};
  std::array<double, 4> init{options.init.variance, options.init.range, options.init.smoothness,
                             options.init_tau2};
  std::vector<int> free_dims;
  for (int d = 0; d < 4; ++d) {
    if (lo[d] < hi[d]) {
      if (!(init[d] >= lo[d] && init[d] <= hi[d]))
        throw config_error("fit_parameters: init outside bounds");
      free_dims.push_back(d);
    } else {
      init[d] = lo[d];
    }
  }

  // the plan depends only on the geometry
  NoiseModel probe = NoiseModel::constant(init[3]);
  ConditioningPlan plan = build_plan(lk, geom, probe);

  int evals = 0;
  auto objective = [&](const Eigen::VectorXd& logp) {
    std::array<double, 4> th = init;
    for (std::size_t q = 0; q < free_dims.size(); ++q) th[free_dims[q]] = std::exp(logp(q));
    for (int d : free_dims)
      if (th[d] < lo[d] || th[d] > hi[d]) return std::numeric_limits<double>::infinity();
    MaternParams p{th[0], th[1], th[2]};
    NoiseModel nm = NoiseModel::constant(th[3]);
    ++evals;
    try {
      SparseTriangularFactor U = build_U(plan, geom, p, nm);
      SparseTriangularFactor V = derive_V(U, plan);
      return -vecchia_loglik(U, V, plan, z_obs);
    } catch (const numerical_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const int dim = static_cast<int>(free_dims.size());
  FitResult res;
  if (dim == 0) {
    Eigen::VectorXd empty(0);
    res.loglik = -objective(empty);
    res.params = MaternParams{init[0], init[1], init[2]};
    res.tau2 = init[3];
    res.converged = true;
    res.evaluations = evals;
    return res;
  }

  // Nelder-Mead in log-parameter space
  Simplex s;
  Eigen::VectorXd x0(dim);
  for (int q = 0; q < dim; ++q) x0(q) = std::log(init[free_dims[q]]);
  s.x.push_back(x0);
  for (int q = 0; q < dim; ++q) {
    Eigen::VectorXd xq = x0;
    xq(q) += 0.5;
    s.x.push_back(xq);
  }
  for (auto& xx : s.x) s.f.push_back(objective(xx));

  auto order_simplex = [&] {
    std::vector<int> idx(s.x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return s.f[a] < s.f[b]; });
    Simplex t;
    for (int i : idx) {
      t.x.push_back(s.x[i]);
      t.f.push_back(s.f[i]);
    }
    s = std::move(t);
  };

  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    order_simplex();
    if (std::abs(s.f.front() - s.f.back()) <
        options.tolerance * (1.0 + std::abs(s.f.front()))) {
      converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) centroid += s.x[i];
    centroid /= dim;

    Eigen::VectorXd xr = centroid + (centroid - s.x.back());
    double fr = objective(xr);
    if (fr < s.f.front()) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - s.x.back());
      double fe = objective(xe);
      if (fe < fr) {
        s.x.back() = xe;
        s.f.back() = fe;
      } else {
        s.x.back() = xr;
        s.f.back() = fr;
      }
    } else if (fr < s.f[dim - 1]) {
      s.x.back() = xr;
      s.f.back() = fr;
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (s.x.back() - centroid);
      double fc = objective(xc);
      if (fc < s.f.back()) {
        s.x.back() = xc;
        s.f.back() = fc;
      } else {
        for (std::size_t i = 1; i < s.x.size(); ++i) {
          s.x[i] = s.x.front() + 0.5 * (s.x[i] - s.x.front());
          s.f[i] = objective(s.x[i]);
        }
      }
    }
  }
  order_simplex();

  std::array<double, 4> th = init;
  for (int q = 0; q < dim; ++q) th[free_dims[q]] = std::exp(s.x.front()(q));
  res.params = MaternParams{th[0], th[1], th[2]};
  res.tau2 = th[3];
  res.loglik = -s.f.front();
  res.converged = converged;
  res.evaluations = evals;
  return res;
}

}  // namespace vecchia
