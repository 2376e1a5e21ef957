// Command-line front end: data simulation, scheme-comparison experiments,
// prediction on CSV data, cross-validation scoring, and timing benchmarks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vecchia/csv.hpp"
#include "vecchia/errors.hpp"
#include "vecchia/likelihood.hpp"
#include "vecchia/prediction.hpp"
#include "vecchia/rng.hpp"
#include "vecchia/simulate.hpp"
#include "vecchia/sparse_engine.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vecchia;

namespace {

constexpr int kMaxminCap = 300000;  // exact maxmin is quadratic; refuse beyond this
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(std::stod(item));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split_list(s)) out.push_back(std::stoi(item));
  return out;
}

struct Options {
  std::string data_path;
  std::string pred_path;
  std::string out_dir = ".";
  std::string schemes = "rf-full";
  std::string m_list = "10";
  std::string nu_list = "0.5";
  std::string snr_list = "10";
  std::string n_list = "10000";
  std::string ordering = "auto";  // auto | maxmin | coordinate
  std::string fold_mode = "random";
  std::string lf_perm = "amd";
  std::string dump_dir;
  int dim = 2;
  int n_obs = 100;
  int n_pred = 100;
  int replicates = 10;
  int folds = 5;
  int samples = 0;
  double range_eff = 0.15;
  double variance = 1.0;
  double range = 0.0;  // 0 = derive from range_eff
  double nu = 0.5;
  double tau2 = 0.1;
  double min_sep = 1e-4;
  std::uint64_t seed = 1;
  bool exact_variances = false;
  bool do_fit = false;
};

void apply_json_config(Options& o, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw input_error("config parse error: " + std::string(e.what()));
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("data", o.data_path);
  get("pred", o.pred_path);
  get("out", o.out_dir);
  get("schemes", o.schemes);
  get("m", o.m_list);
  get("nu", o.nu_list);
  get("snr", o.snr_list);
  get("n", o.n_list);
  get("ordering", o.ordering);
  get("fold_mode", o.fold_mode);
  get("lf_perm", o.lf_perm);
  get("dump_factors", o.dump_dir);
  get("dim", o.dim);
  get("n_obs", o.n_obs);
  get("n_pred", o.n_pred);
  get("replicates", o.replicates);
  get("folds", o.folds);
  get("samples", o.samples);
  get("range_eff", o.range_eff);
  get("variance", o.variance);
  get("range", o.range);
  get("smoothness", o.nu);
  get("tau2", o.tau2);
  get("min_sep", o.min_sep);
  get("exact_variances", o.exact_variances);
  get("fit", o.do_fit);
  if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
}

FillOrdering fill_ordering(const Options& o) {
  if (o.lf_perm == "amd") return FillOrdering::min_degree;
  if (o.lf_perm == "natural") return FillOrdering::natural;
  throw config_error("--lf-perm must be amd or natural");
}

Ordering ordering_for(const Options& o, SchemeKind kind, int dim) {
  if (o.ordering == "maxmin") return Ordering::maxmin;
  if (o.ordering == "coordinate") return Ordering::coordinate;
  if (o.ordering != "auto") throw config_error("--ordering must be auto, maxmin or coordinate");
  if (kind == SchemeKind::lf_auto) return Ordering::coordinate;
  return dim == 1 ? Ordering::coordinate : Ordering::maxmin;
}

MaternParams kernel_from(const Options& o, double nu) {
  double rho = o.range > 0 ? o.range : effective_range_to_rho(o.range_eff, nu);
  return MaternParams{o.variance, rho, nu};
}

GeometryModel build_geometry(const Options& o, SchemeKind kind, const std::vector<Point>& pts,
                             const std::vector<bool>& is_pred, int dim) {
  if (static_cast<int>(pts.size()) > kMaxminCap)
    throw config_error("exact maxmin ordering is capped at 300000 locations");
  Ordering ord = ordering_for(o, kind, dim);
  bool op = kind != SchemeKind::lf_auto;
  return GeometryModel::build(dim, pts, is_pred, ord, op);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Options& o) {
  SimulationSpec spec;
  spec.dim = o.dim;
  spec.n_obs = o.n_obs;
  spec.n_pred = o.n_pred;
  spec.params = kernel_from(o, o.nu);
  spec.tau2 = o.tau2;
  spec.min_separation = o.min_sep;
  spec.ordering = Ordering::none;
  SimulatedData data = simulate_dataset(spec, o.seed);

  fs::create_directories(o.out_dir);
  std::vector<std::vector<double>> rows, truth;
  const GeometryModel& g = data.geom;
  for (int i = 0; i < g.n(); ++i) {
    std::vector<double> row{g.locations[i][0]};
    if (o.dim == 2) row.push_back(g.locations[i][1]);
    row.push_back(g.is_observed(i) ? data.z_obs[g.obs_rank_of[i]]
                                   : std::numeric_limits<double>::quiet_NaN());
    rows.push_back(row);
    std::vector<double> trow{static_cast<double>(i), g.locations[i][0]};
    if (o.dim == 2) trow.push_back(g.locations[i][1]);
    trow.push_back(data.y[i]);
    truth.push_back(trow);
  }
  std::vector<std::string> header =
      o.dim == 2 ? std::vector<std::string>{"x", "y", "z"} : std::vector<std::string>{"x", "z"};
  write_csv(o.out_dir + "/data.csv", header, rows);
  std::vector<std::string> theader =
      o.dim == 2 ? std::vector<std::string>{"loc_id", "x", "y", "value"}
                 : std::vector<std::string>{"loc_id", "x", "value"};
  write_csv(o.out_dir + "/truth.csv", theader, truth);
  std::printf("simulate: wrote %s/data.csv (%d obs, %d pred) and truth.csv\n", o.out_dir.c_str(),
              o.n_obs, o.n_pred);
  return 0;
}

int cmd_compare(const Options& o) {
  auto schemes = split_list(o.schemes);
  auto ms = parse_ints(o.m_list);
  auto nus = parse_doubles(o.nu_list);
  auto snrs = parse_doubles(o.snr_list);
  if (o.n_obs + o.n_pred > 2000)
    throw config_error("compare: the exact-KL path is dense; keep n_obs + n_pred <= 2000");

  fs::create_directories(o.out_dir);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> srows;
  std::uint64_t cell = 0;
  for (const auto& sname : schemes) {
    SchemeKind kind = scheme_from_name(sname);
    if (kind == SchemeKind::lf_auto && o.dim != 1) {
      std::cerr << "compare: skipping lf-auto in dimension " << o.dim << "\n";
      continue;
    }
    for (double nu : nus) {
      Options onu = o;
      MaternParams params = kernel_from(onu, nu);
      for (double snr : snrs) {
        if (!(snr > 0)) throw config_error("compare: SNR must be positive");
        NoiseModel noise = NoiseModel::constant(1.0 / snr);
        for (int m : ms) {
          ++cell;
          KLReport total;
          // fresh locations and data each repetition
          for (int rep = 0; rep < o.replicates; ++rep) {
            std::uint64_t s = derive_seed(o.seed, cell, rep);
            std::vector<Point> pts;
            std::vector<bool> is_pred;
            generate_locations(o.dim, o.n_obs, o.n_pred, o.min_sep, s, pts, is_pred);
            GeometryModel g = build_geometry(o, kind, pts, is_pred, o.dim);
            KLReport r = kl_report({kind, m}, g, params, noise, 1, derive_seed(s, 1));
            total.joint_pred += r.joint_pred;
            total.joint_obs += r.joint_obs;
            total.marginal_pred += r.marginal_pred;
            total.marginal_obs += r.marginal_obs;
          }
          double inv = 1.0 / o.replicates;
          rows.push_back({static_cast<double>(m), nu, snr, total.joint_pred * inv,
                          total.joint_obs * inv, total.marginal_pred * inv,
                          total.marginal_obs * inv, static_cast<double>(o.replicates)});
          srows.push_back(sname);
          std::printf("compare: %s m=%d nu=%g snr=%g joint_pred=%.3e marg_pred=%.3e\n",
                      sname.c_str(), m, nu, snr, total.joint_pred * inv,
                      total.marginal_pred * inv);
        }
      }
    }
  }

  std::FILE* f = std::fopen((o.out_dir + "/kl.csv").c_str(), "w");
  if (!f) throw input_error("cannot open " + o.out_dir + "/kl.csv");
  std::fprintf(f, "scheme,m,nu,snr,joint_pred,joint_obs,marg_pred,marg_obs,replicates\n");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::fprintf(f, "%s", srows[i].c_str());
    for (double v : rows[i]) std::fprintf(f, ",%.17g", v);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
  std::printf("compare: wrote %s/kl.csv (%zu rows)\n", o.out_dir.c_str(), rows.size());
  return 0;
}

struct LoadedData {
  int dim = 0;
  std::vector<Point> points;
  std::vector<bool> is_pred;
  std::vector<double> z_raw;  // aligned with points, NaN on prediction rows
};

LoadedData load_data(const Options& o) {
  if (o.data_path.empty()) throw config_error("--data is required");
  PointData obs = read_point_csv(o.data_path);
  LoadedData d;
  d.dim = obs.dim;
  d.points = obs.points;
  d.z_raw = obs.z;
  for (std::size_t i = 0; i < obs.points.size(); ++i) d.is_pred.push_back(!obs.has_z[i]);
  if (!o.pred_path.empty()) {
    PointData pred = read_point_csv(o.pred_path);
    if (pred.dim != d.dim) throw input_error("prediction file dimension mismatch");
    for (std::size_t i = 0; i < pred.points.size(); ++i) {
      d.points.push_back(pred.points[i]);
      d.is_pred.push_back(true);
      d.z_raw.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return d;
}

FitResult fit_on_observed(const Options& o, const LoadedData& d, SchemeKind kind, int m) {
  std::vector<Point> obs_pts;
  std::vector<double> z_raw;
  for (std::size_t i = 0; i < d.points.size(); ++i)
    if (!d.is_pred[i]) {
      obs_pts.push_back(d.points[i]);
      z_raw.push_back(d.z_raw[i]);
    }
  GeometryModel g =
      build_geometry(o, kind, obs_pts, std::vector<bool>(obs_pts.size(), false), d.dim);
  std::vector<double> z(g.n());
  for (int q = 0; q < g.n(); ++q) z[q] = z_raw[g.permutation[q]];

  FitOptions fopt;
  fopt.init = kernel_from(o, o.nu);
  fopt.init_tau2 = o.tau2;
  FitResult fit = fit_parameters(g, z, {kind, m, true}, fopt);
  std::printf("fit: variance=%.6g range=%.6g smoothness=%.6g tau2=%.6g loglik=%.6g%s\n",
              fit.params.variance, fit.params.range, fit.params.smoothness, fit.tau2, fit.loglik,
              fit.converged ? "" : " (not converged)");
  return fit;
}

int cmd_predict(const Options& o) {
  LoadedData d = load_data(o);
  SchemeKind kind = scheme_from_name(split_list(o.schemes)[0]);
  int m = parse_ints(o.m_list)[0];
  double tau2 = o.tau2;
  MaternParams params = kernel_from(o, o.nu);
  if (o.do_fit) {
    FitResult fit = fit_on_observed(o, d, kind, m);
    params = fit.params;
    tau2 = fit.tau2;
  }
  NoiseModel noise = NoiseModel::constant(tau2);

  GeometryModel g = build_geometry(o, kind, d.points, d.is_pred, d.dim);
  std::vector<double> z_obs(g.n_obs());
  for (int q = 0; q < g.n(); ++q)
    if (g.is_observed(q)) z_obs[g.obs_rank_of[q]] = d.z_raw[g.permutation[q]];

  double t0 = now_seconds();
  ConditioningPlan plan = build_plan({kind, m}, g, noise);
  double t1 = now_seconds();
  SparseTriangularFactor U = build_U(plan, g, params, noise);
  double t2 = now_seconds();
  SparseTriangularFactor V = derive_V(U, plan, fill_ordering(o));
  double t3 = now_seconds();

  auto mean = posterior_mean(U, V, plan, z_obs);
  auto var = posterior_variances(V, plan,
                                 o.exact_variances ? VarianceMode::exact : VarianceMode::fast);
  std::vector<std::vector<double>> samples;
  if (o.samples > 0) samples = conditional_sample(V, plan, mean, o.samples, o.seed);
  double t4 = now_seconds();

  if (!o.dump_dir.empty()) {
    fs::create_directories(o.dump_dir);
    write_matrix_market(U, o.dump_dir + "/U.mtx");
    write_matrix_market(V, o.dump_dir + "/V.mtx");
  }

  fs::create_directories(o.out_dir);
  std::vector<std::string> header{"loc_id", "x"};
  if (d.dim == 2) header.push_back("y");
  header.push_back("mean");
  header.push_back("variance");
  for (int s = 0; s < o.samples; ++s) header.push_back("sample_" + std::to_string(s + 1));
  std::vector<std::vector<double>> rows;
  for (int q = 0; q < g.n(); ++q) {
    std::vector<double> row{static_cast<double>(g.permutation[q]), g.locations[q][0]};
    if (d.dim == 2) row.push_back(g.locations[q][1]);
    row.push_back(mean[q]);
    row.push_back(var[q]);
    for (int s = 0; s < o.samples; ++s) row.push_back(samples[s][q]);
    rows.push_back(row);
  }
  write_csv(o.out_dir + "/predictions.csv", header, rows);
  std::printf(
      "predict: n=%d (%d obs) m=%d nnz(U)=%lld nnz(V)=%lld plan=%.3fs U=%.3fs V=%.3fs "
      "post=%.3fs\n",
      g.n(), g.n_obs(), m, static_cast<long long>(U.nnz_off_diagonal() + U.dim),
      static_cast<long long>(V.nnz_off_diagonal() + V.dim), t1 - t0, t2 - t1, t3 - t2, t4 - t3);
  std::printf("predict: wrote %s/predictions.csv\n", o.out_dir.c_str());
  return 0;
}

int cmd_cv(const Options& o) {
  LoadedData d = load_data(o);
  std::vector<int> obs_rows;
  for (std::size_t i = 0; i < d.points.size(); ++i)
    if (!d.is_pred[i]) obs_rows.push_back(static_cast<int>(i));
  int n = static_cast<int>(obs_rows.size());
  if (o.folds < 2 || o.folds > n) throw config_error("cv: folds must be in [2, n_obs]");

  std::vector<int> fold_of(n);
  if (o.fold_mode == "random") {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    RandomStream rs(o.seed, 3);
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(rs.next_uniform() * (i + 1));
      std::swap(idx[i], idx[std::min(j, i)]);
    }
    for (int i = 0; i < n; ++i) fold_of[idx[i]] = i % o.folds;
  } else if (o.fold_mode == "bands") {
    // contiguous bands in the first coordinate: swath-style holdout
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return d.points[obs_rows[a]][0] < d.points[obs_rows[b]][0];
    });
    for (int i = 0; i < n; ++i) fold_of[idx[i]] = std::min(o.folds - 1, i * o.folds / n);
  } else {
    throw config_error("cv: fold mode must be random or bands");
  }

  auto schemes = split_list(o.schemes);
  auto ms = parse_ints(o.m_list);
  MaternParams params = kernel_from(o, o.nu);
  double tau2 = o.tau2;

  std::vector<std::string> out_scheme;
  std::vector<std::vector<double>> out_rows;
  std::vector<double> log_scores;
  for (const auto& sname : schemes) {
    SchemeKind kind = scheme_from_name(sname);
    for (int m : ms) {
      double sse = 0;
      long long n_test_total = 0;
      double log_score = 0;
      for (int fold = 0; fold < o.folds; ++fold) {
        std::vector<Point> pts;
        std::vector<bool> is_pred;
        for (int i = 0; i < n; ++i) {
          pts.push_back(d.points[obs_rows[i]]);
          is_pred.push_back(fold_of[i] == fold);
        }
        GeometryModel g = build_geometry(o, kind, pts, is_pred, d.dim);
        std::vector<double> z_obs(g.n_obs());
        std::vector<double> held(g.n_pred());
        for (int q = 0; q < g.n(); ++q) {
          double zval = d.z_raw[obs_rows[g.permutation[q]]];
          if (g.is_observed(q)) z_obs[g.obs_rank_of[q]] = zval;
        }
        for (int t = 0; t < g.n_pred(); ++t)
          held[t] = d.z_raw[obs_rows[g.permutation[g.prediction[t]]]];

        NoiseModel noise = NoiseModel::constant(tau2);
        ConditioningPlan plan = build_plan({kind, m}, g, noise);
        SparseTriangularFactor U = build_U(plan, g, params, noise);
        SparseTriangularFactor V = derive_V(U, plan, fill_ordering(o));
        auto mean = posterior_mean(U, V, plan, z_obs);

        int np = g.n_pred();
        n_test_total += np;
        Eigen::VectorXd resid(np);
        for (int q = 0; q < np; ++q) {
          double r = held[q] - mean[g.prediction[q]];
          resid(q) = r;
          sse += r * r;
        }

        if (np <= 5000) {
          // joint log score of the held-out responses
          Eigen::MatrixXd H = Eigen::MatrixXd::Zero(np, g.n());
          for (int q = 0; q < np; ++q) H(q, g.prediction[q]) = 1.0;
          LincombResult lc = lincomb_distribution(V, plan, mean, H, false);
          Eigen::MatrixXd C = lc.cov + tau2 * Eigen::MatrixXd::Identity(np, np);
          Eigen::LLT<Eigen::MatrixXd> llt(C);
          if (llt.info() != Eigen::Success)
            throw numerical_error("cv: predictive covariance not positive definite");
          double logdet = 0;
          for (int q = 0; q < np; ++q) logdet += 2.0 * std::log(llt.matrixLLT()(q, q));
          log_score += 0.5 * (logdet + resid.dot(llt.solve(resid)) + np * kLog2Pi);
        } else {
          std::cerr << "cv: fold too large for the joint log score; using marginals\n";
          auto var = posterior_variances(V, plan, VarianceMode::fast);
          for (int q = 0; q < np; ++q) {
            double s2 = var[g.prediction[q]] + tau2;
            log_score += 0.5 * (std::log(s2) + kLog2Pi + resid(q) * resid(q) / s2);
          }
        }
      }
      double rmse = std::sqrt(sse / std::max<long long>(1, n_test_total));
      out_scheme.push_back(sname);
      out_rows.push_back({static_cast<double>(m), rmse, log_score});
      log_scores.push_back(log_score);
      std::printf("cv: %s m=%d rmse=%.6g log_score=%.6g\n", sname.c_str(), m, rmse, log_score);
    }
  }

  double best = *std::min_element(log_scores.begin(), log_scores.end());
  fs::create_directories(o.out_dir);
  std::FILE* f = std::fopen((o.out_dir + "/cv.csv").c_str(), "w");
  if (!f) throw input_error("cannot open " + o.out_dir + "/cv.csv");
  std::fprintf(f, "scheme,m,fold_mode,folds,rmse,log_score,rel_log_score\n");
  for (std::size_t i = 0; i < out_rows.size(); ++i)
    std::fprintf(f, "%s,%d,%s,%d,%.17g,%.17g,%.17g\n", out_scheme[i].c_str(),
                 static_cast<int>(out_rows[i][0]), o.fold_mode.c_str(), o.folds, out_rows[i][1],
                 out_rows[i][2], out_rows[i][2] - best);
  std::fclose(f);
  std::printf("cv: wrote %s/cv.csv\n", o.out_dir.c_str());
  return 0;
}

int cmd_bench(const Options& o) {
  auto ns = parse_ints(o.n_list);
  auto ms = parse_ints(o.m_list);
  auto schemes = split_list(o.schemes);

  fs::create_directories(o.out_dir);
  std::FILE* f = std::fopen((o.out_dir + "/bench.csv").c_str(), "w");
  if (!f) throw input_error("cannot open " + o.out_dir + "/bench.csv");
  std::fprintf(f, "scheme,n,m,t_plan,t_build_u,t_derive_v,annzc_v,max_col_nnz_v\n");
  for (const auto& sname : schemes) {
    SchemeKind kind = scheme_from_name(sname);
    for (int n : ns) {
      for (int m : ms) {
        int n_obs = n / 2;
        RandomStream rs(derive_seed(o.seed, n, m));
        std::vector<Point> pts;
        std::vector<bool> is_pred;
        for (int i = 0; i < n; ++i) {
          pts.push_back({rs.next_uniform(), o.dim == 2 ? rs.next_uniform() : 0.0});
          is_pred.push_back(i >= n_obs);
        }
        GeometryModel g = build_geometry(o, kind, pts, is_pred, o.dim);
        NoiseModel noise = NoiseModel::constant(o.tau2);
        MaternParams params = kernel_from(o, o.nu);

        double t0 = now_seconds();
        ConditioningPlan plan = build_plan({kind, m}, g, noise);
        double t1 = now_seconds();
        SparseTriangularFactor U = build_U(plan, g, params, noise);
        double t2 = now_seconds();
        SparseTriangularFactor V = derive_V(U, plan, fill_ordering(o));
        double t3 = now_seconds();

        std::fprintf(f, "%s,%d,%d,%.6g,%.6g,%.6g,%.17g,%d\n", sname.c_str(), n, m, t1 - t0,
                     t2 - t1, t3 - t2, V.average_nnz_per_column(), V.max_col_nnz());
        std::printf("bench: %s n=%d m=%d plan=%.3fs U=%.3fs V=%.3fs annzc=%.2f\n", sname.c_str(),
                    n, m, t1 - t0, t2 - t1, t3 - t2, V.average_nnz_per_column());
      }
    }
  }
  std::fclose(f);
  std::printf("bench: wrote %s/bench.csv\n", o.out_dir.c_str());
  return 0;
}

int cmd_fit(const Options& o) {
  LoadedData d = load_data(o);
  SchemeKind kind = scheme_from_name(split_list(o.schemes)[0]);
  int m = parse_ints(o.m_list)[0];
  FitResult fit = fit_on_observed(o, d, kind, m);

  fs::create_directories(o.out_dir);
  json j{{"variance", fit.params.variance},
         {"range", fit.params.range},
         {"smoothness", fit.params.smoothness},
         {"tau2", fit.tau2},
         {"loglik", fit.loglik},
         {"converged", fit.converged},
         {"evaluations", fit.evaluations}};
  std::ofstream out(o.out_dir + "/fit.json");
  out << j.dump(2) << "\n";
  std::printf("fit: wrote %s/fit.json\n", o.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;

  // a config file provides defaults; explicit flags override them
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        apply_json_config(o, argv[i + 1]);
      } catch (const input_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
      }
    }
  }

  CLI::App app{"General Vecchia approximations for Gaussian-process prediction"};
  app.require_subcommand(1);
  std::string config_sink;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_sink, "JSON config; flags override its fields");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--scheme", o.schemes,
                    "scheme list (rf-full,rf-stand,rf-ind,lf-full,lf-ind,lf-auto)");
    sub->add_option("--m", o.m_list, "conditioning-set size list");
    sub->add_option("--nu", o.nu_list, "smoothness list (compare)");
    sub->add_option("--snr", o.snr_list, "signal-to-noise list, tau2 = 1/snr (compare)");
    sub->add_option("--range-eff", o.range_eff, "effective range (correlation 0.05)");
    sub->add_option("--range", o.range, "kernel range (overrides --range-eff)");
    sub->add_option("--variance", o.variance, "kernel variance");
    sub->add_option("--smoothness", o.nu, "kernel smoothness for single-model commands");
    sub->add_option("--tau2", o.tau2, "nugget variance");
    sub->add_option("--dim", o.dim, "domain dimension (1 or 2)");
    sub->add_option("--ordering", o.ordering, "auto | maxmin | coordinate");
    sub->add_option("--lf-perm", o.lf_perm,
                    "fill ordering for latent-first schemes: amd | natural");
    sub->add_option("--min-sep", o.min_sep, "minimum location separation");
  };

  CLI::App* sim = app.add_subcommand("simulate", "draw locations and a GP dataset");
  add_common(sim);
  sim->add_option("--n-obs", o.n_obs, "observed locations");
  sim->add_option("--n-pred", o.n_pred, "prediction locations");

  CLI::App* cmp = app.add_subcommand("compare", "KL-divergence scheme comparison");
  add_common(cmp);
  cmp->add_option("--n-obs", o.n_obs, "observed locations");
  cmp->add_option("--n-pred", o.n_pred, "prediction locations");
  cmp->add_option("--replicates", o.replicates, "simulation repetitions");

  CLI::App* prd = app.add_subcommand("predict", "posterior prediction on CSV data");
  add_common(prd);
  prd->add_option("--data", o.data_path, "CSV with x[,y],z; empty z marks prediction rows");
  prd->add_option("--pred", o.pred_path, "optional CSV of extra prediction locations");
  prd->add_flag("--fit", o.do_fit, "estimate parameters first");
  prd->add_flag("--exact-variances", o.exact_variances, "column-solve variances");
  prd->add_option("--samples", o.samples, "posterior sample count");
  prd->add_option("--dump-factors", o.dump_dir, "write U and V in Matrix Market format");

  CLI::App* cv = app.add_subcommand("cv", "cross-validation scoring");
  add_common(cv);
  cv->add_option("--data", o.data_path, "CSV with observed rows");
  cv->add_option("--folds", o.folds, "fold count");
  cv->add_option("--fold-mode", o.fold_mode, "random | bands");

  CLI::App* ben = app.add_subcommand("bench", "timing and sparsity benchmarks");
  add_common(ben);
  ben->add_option("--n", o.n_list, "total location counts");

  CLI::App* fit = app.add_subcommand("fit", "maximum-likelihood parameter estimation");
  add_common(fit);
  fit->add_option("--data", o.data_path, "CSV with observed rows");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("simulate")) return cmd_simulate(o);
    if (app.got_subcommand("compare")) return cmd_compare(o);
    if (app.got_subcommand("predict")) return cmd_predict(o);
    if (app.got_subcommand("cv")) return cmd_cv(o);
    if (app.got_subcommand("bench")) return cmd_bench(o);
    if (app.got_subcommand("fit")) return cmd_fit(o);
  } catch (const config_error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const input_error& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
