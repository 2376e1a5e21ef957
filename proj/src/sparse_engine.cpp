#include "vecchia/sparse_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vecchia/errors.hpp"

namespace vecchia {

SparseTriangularFactor build_U(const ConditioningPlan& plan, const GeometryModel& geom,
                               const MaternParams& params, const NoiseModel& noise) {
  params.validate();
  const int N = plan.x_size();
  SparseTriangularFactor U;
  U.role = SparseTriangularFactor::Role::U;
  U.dim = N;
  U.diag.assign(N, 0.0);
  U.col_ptr.assign(N + 1, 0);
  for (int i = 0; i < N; ++i)
    U.col_ptr[i + 1] = U.col_ptr[i] + static_cast<std::int64_t>(plan.entries[i].cond.size());
  U.row_idx.assign(U.col_ptr[N], 0);
  U.val.assign(U.col_ptr[N], 0.0);

  std::atomic<int> bad_index{-1};

#pragma omp parallel
  {
    Eigen::MatrixXd C;
    Eigen::VectorXd c, b;
#pragma omp for schedule(dynamic, 64)
    for (int i = 0; i < N; ++i) {
      if (bad_index.load(std::memory_order_relaxed) >= 0) continue;
      const std::vector<int>& g = plan.entries[i].cond;
      const int k = static_cast<int>(g.size());
      const double c_ii = plan_model_cov(plan, geom, params, noise, i, i);
      double d = c_ii;
      if (k > 0) {
        C.resize(k, k);
        c.resize(k);
        for (int a = 0; a < k; ++a) {
          c(a) = plan_model_cov(plan, geom, params, noise, g[a], i);
          C(a, a) = plan_model_cov(plan, geom, params, noise, g[a], g[a]);
          for (int bb = a + 1; bb < k; ++bb) {
            double v = plan_model_cov(plan, geom, params, noise, g[a], g[bb]);
            C(a, bb) = v;
            C(bb, a) = v;
          }
        }
        Eigen::LLT<Eigen::MatrixXd> llt(C);
        if (llt.info() != Eigen::Success) {
          bad_index.store(i);
          continue;
        }
        b = llt.solve(c);
        d = c_ii - b.dot(c);
      }
      if (!(d > 1e-12 * c_ii)) {
        bad_index.store(i);
        continue;
      }
      const double dinvsqrt = 1.0 / std::sqrt(d);
      U.diag[i] = dinvsqrt;
      std::int64_t base = U.col_ptr[i];
      for (int a = 0; a < k; ++a) {
        U.row_idx[base + a] = g[a];
        U.val[base + a] = -b(a) * dinvsqrt;
      }
    }
  }
  if (bad_index.load() >= 0)
    throw numerical_error("build_U: conditional variance vanished at x position " +
                          std::to_string(bad_index.load()) +
                          " (near-duplicate locations or indefinite kernel block)");
  return U;
}

SparseTriangularFactor extract_V_rf(const SparseTriangularFactor& U,
                                    const ConditioningPlan& plan) {
  if (!plan.response_first())
    throw config_error("extract_V_rf: plan is not response-first");
  const int offset = plan.n_obs;  // free latents occupy positions offset..x_size-1
  const int nf = plan.n_free();

  SparseTriangularFactor V;
  V.role = SparseTriangularFactor::Role::V;
  V.dim = nf;
  V.diag.resize(nf);
  V.col_ptr.assign(nf + 1, 0);
  for (int a = 0; a < nf; ++a) {
    int j = plan.latent_pos[a];
    V.diag[a] = U.diag[j];
    int cnt = 0;
    for (std::int64_t k = U.col_ptr[j]; k < U.col_ptr[j + 1]; ++k)
      if (U.row_idx[k] >= offset) ++cnt;
    V.col_ptr[a + 1] = V.col_ptr[a] + cnt;
  }
  V.row_idx.resize(V.col_ptr[nf]);
  V.val.resize(V.col_ptr[nf]);
  for (int a = 0; a < nf; ++a) {
    std::int64_t w = V.col_ptr[a];
    int j = plan.latent_pos[a];
    for (std::int64_t k = U.col_ptr[j]; k < U.col_ptr[j + 1]; ++k) {
      if (U.row_idx[k] < offset) continue;
      V.row_idx[w] = U.row_idx[k] - offset;
      V.val[w] = U.val[k];
      ++w;
    }
  }
  return V;
}

namespace {

// ---- sparse symmetric matrix in triplet-compressed form -------------------

struct SymSparse {
  int dim = 0;
  // upper triangle incl diagonal, CSC, rows ascending
  std::vector<std::int64_t> col_ptr;
  std::vector<int> row_idx;
  std::vector<double> val;
};

SymSparse compress_upper(int dim, std::vector<std::array<int, 2>>& ij, std::vector<double>& v) {
  std::vector<std::size_t> ord(ij.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
    if (ij[a][1] != ij[b][1]) return ij[a][1] < ij[b][1];
    return ij[a][0] < ij[b][0];
  });
  SymSparse M;
  M.dim = dim;
  M.col_ptr.assign(dim + 1, 0);
  int pi = -1, pj = -1;
  for (std::size_t t : ord) {
    int i = ij[t][0], j = ij[t][1];
    if (i == pi && j == pj) {
      M.val.back() += v[t];
    } else {
      M.row_idx.push_back(i);
      M.val.push_back(v[t]);
      ++M.col_ptr[j + 1];
      pi = i;
      pj = j;
    }
  }
  for (int j = 0; j < dim; ++j) M.col_ptr[j + 1] += M.col_ptr[j];
  return M;
}

// Basic minimum-degree elimination order on a symmetric pattern.
std::vector<int> min_degree_order(int n, const SymSparse& upper) {
  std::vector<std::vector<int>> adj(n);
  for (int j = 0; j < n; ++j) {
    for (std::int64_t k = upper.col_ptr[j]; k < upper.col_ptr[j + 1]; ++k) {
      int i = upper.row_idx[k];
      if (i == j) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  std::vector<char> gone(n, 0);
  std::vector<int> order;
  order.reserve(n);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    std::size_t best_deg = 0;
    for (int v = 0; v < n; ++v) {
      if (gone[v]) continue;
      if (best < 0 || adj[v].size() < best_deg) {
        best = v;
        best_deg = adj[v].size();
      }
    }
    gone[best] = 1;
    order.push_back(best);
    // connect the eliminated vertex's neighbors
    std::vector<int> nb;
    nb.swap(adj[best]);
    for (int u : nb) {
      if (gone[u]) continue;
      auto& au = adj[u];
      au.erase(std::remove(au.begin(), au.end(), best), au.end());
      for (int w : nb) {
        if (w == u || gone[w]) continue;
        if (!std::binary_search(au.begin(), au.end(), w)) {
          au.insert(std::upper_bound(au.begin(), au.end(), w), w);
        }
      }
    }
  }
  return order;
}

// Up-looking sparse Cholesky, CSparse style: returns lower L with LL' = A.
// A given as upper triangle incl diagonal. Throws on indefiniteness.
struct LowerFactor {
  int dim = 0;
  std::vector<std::vector<int>> rows;    // per column, ascending (rows arrive in order)
  std::vector<std::vector<double>> vals;
  std::vector<double> diag;
};

LowerFactor sparse_chol(const SymSparse& A) {
  const int n = A.dim;
  LowerFactor L;
  L.dim = n;
  L.rows.resize(n);
  L.vals.resize(n);
  L.diag.assign(n, 0.0);

  // elimination tree from the upper pattern
  std::vector<int> parent(n, -1), ancestor(n, -1);
  for (int k = 0; k < n; ++k) {
    for (std::int64_t p = A.col_ptr[k]; p < A.col_ptr[k + 1]; ++p) {
      int i = A.row_idx[p];
      while (i != -1 && i < k) {
        int next = ancestor[i];
        ancestor[i] = k;
        if (next == -1) parent[i] = k;
        i = next;
      }
    }
  }

  std::vector<int> mark(n, -1), reach;
  std::vector<double> x(n, 0.0);
  for (int k = 0; k < n; ++k) {
    reach.clear();
    double d = 0.0;
    mark[k] = k;
    for (std::int64_t p = A.col_ptr[k]; p < A.col_ptr[k + 1]; ++p) {
      int i = A.row_idx[p];
      if (i == k) {
        d = A.val[p];
        continue;
      }
      x[i] = A.val[p];
      // walk to the root collecting the row pattern
      for (int t = i; t != -1 && t < k && mark[t] != k; t = parent[t]) {
        mark[t] = k;
        reach.push_back(t);
      }
    }
    std::sort(reach.begin(), reach.end());
    for (int j : reach) {
      double lkj = x[j] / L.diag[j];
      x[j] = 0.0;
      const auto& rj = L.rows[j];
      const auto& vj = L.vals[j];
      for (std::size_t q = 0; q < rj.size(); ++q) x[rj[q]] -= vj[q] * lkj;
      d -= lkj * lkj;
      L.rows[j].push_back(k);
      L.vals[j].push_back(lkj);
    }
    if (!(d > 0)) throw numerical_error("sparse rchol: matrix not positive definite");
    L.diag[k] = std::sqrt(d);
  }
  return L;
}

}  // namespace

SparseTriangularFactor assemble_V_lf(const SparseTriangularFactor& U,
                                     const ConditioningPlan& plan, FillOrdering fill) {
  if (plan.response_first() || plan.scheme == SchemeKind::lf_auto)
    throw config_error("assemble_V_lf: plan is not a latent-first OP plan");

  const int nf = plan.n_free();
  // free latents at observed locations come first (OP ordering)
  int n_fo = 0;
  for (int a = 0; a < nf; ++a)
    if (plan.free_latent_loc[a] < plan.n_obs) ++n_fo;
  const int n_fp = nf - n_fo;

  // x position -> free index; positions 0..n-1 are the latent block
  auto free_of_pos = [&](int pos) -> int {
    if (pos >= plan.n) return -1;
    return plan.free_index_of_loc[pos];
  };

  // M_oo = sum over non-prediction columns of the observed-free row segments
  std::vector<std::array<int, 2>> trip_ij;
  std::vector<double> trip_v;
  std::vector<int> seg_rows;
  std::vector<double> seg_vals;
  const int first_pred_pos = plan.n_obs;  // latent block is location-indexed
  for (int j = 0; j < U.dim; ++j) {
    bool pred_latent_col = j < plan.n && j >= first_pred_pos;
    if (pred_latent_col) continue;
    seg_rows.clear();
    seg_vals.clear();
    auto consider = [&](int row, double v) {
      int f = free_of_pos(row);
      if (f >= 0 && f < n_fo) {
        seg_rows.push_back(f);
        seg_vals.push_back(v);
      }
    };
    consider(j, U.diag[j]);
    for (std::int64_t k = U.col_ptr[j]; k < U.col_ptr[j + 1]; ++k)
      consider(U.row_idx[k], U.val[k]);
    for (std::size_t a = 0; a < seg_rows.size(); ++a)
      for (std::size_t b = a; b < seg_rows.size(); ++b) {
        int ra = seg_rows[a], rb = seg_rows[b];
        trip_ij.push_back({std::min(ra, rb), std::max(ra, rb)});
        trip_v.push_back(seg_vals[a] * seg_vals[b]);
      }
  }
  SymSparse M = compress_upper(n_fo, trip_ij, trip_v);

  // elimination order: chol on the reversed matrix eliminates the factor's
  // last coordinate first, so the fill order maps straight onto tau
  std::vector<int> tau(n_fo);  // chol step k eliminates external free index tau[k]
  if (fill == FillOrdering::min_degree && n_fo > 0) {
    tau = min_degree_order(n_fo, M);
  } else {
    for (int k = 0; k < n_fo; ++k) tau[k] = n_fo - 1 - k;
  }
  std::vector<int> tau_inv(n_fo);
  for (int k = 0; k < n_fo; ++k) tau_inv[tau[k]] = k;

  // A = M permuted into chol coordinates
  std::vector<std::array<int, 2>> aij;
  std::vector<double> av;
  aij.reserve(M.row_idx.size());
  av.reserve(M.row_idx.size());
  for (int j = 0; j < n_fo; ++j)
    for (std::int64_t k = M.col_ptr[j]; k < M.col_ptr[j + 1]; ++k) {
      int a = tau_inv[M.row_idx[k]], b = tau_inv[j];
      aij.push_back({std::min(a, b), std::max(a, b)});
      av.push_back(M.val[k]);
    }
  SymSparse A = compress_upper(n_fo, aij, av);
  LowerFactor L = n_fo > 0 ? sparse_chol(A) : LowerFactor{};

  // V layout: factor coordinate a < n_fo holds external free index
  // perm[a] = tau[n_fo-1-a]; the prediction tail keeps its indices.
  SparseTriangularFactor V;
  V.role = SparseTriangularFactor::Role::V;
  V.dim = nf;
  V.diag.assign(nf, 0.0);
  V.perm.resize(nf);
  for (int a = 0; a < n_fo; ++a) V.perm[a] = tau[n_fo - 1 - a];
  for (int t = 0; t < n_fp; ++t) V.perm[n_fo + t] = n_fo + t;
  bool identity = true;
  for (int a = 0; a < nf; ++a) identity = identity && V.perm[a] == a;
  if (identity) V.perm.clear();

  std::vector<std::vector<int>> cols_rows(nf);
  std::vector<std::vector<double>> cols_vals(nf);

  // observed block: V column a = reversed chol column j = n_fo-1-a
  for (int jc = 0; jc < n_fo; ++jc) {
    int a = n_fo - 1 - jc;
    V.diag[a] = L.diag[jc];
    auto& rows = cols_rows[a];
    auto& vals = cols_vals[a];
    for (std::size_t q = 0; q < L.rows[jc].size(); ++q) {
      rows.push_back(n_fo - 1 - L.rows[jc][q]);
      vals.push_back(L.vals[jc][q]);
    }
    // chol rows arrive ascending -> reversed descending; flip
    std::reverse(rows.begin(), rows.end());
    std::reverse(vals.begin(), vals.end());
  }

  // prediction block: copied from U (through the observed permutation)
  std::vector<int> factor_of_free(nf);
  for (int a = 0; a < nf; ++a) factor_of_free[a] = a;
  if (!V.perm.empty()) {
    for (int a = 0; a < nf; ++a) factor_of_free[V.perm[a]] = a;
  }
  for (int t = 0; t < n_fp; ++t) {
    int f = n_fo + t;
    int pos = plan.latent_pos[f];
    V.diag[f] = U.diag[pos];
    auto& rows = cols_rows[f];
    auto& vals = cols_vals[f];
    for (std::int64_t k = U.col_ptr[pos]; k < U.col_ptr[pos + 1]; ++k) {
      int fr = free_of_pos(U.row_idx[k]);
      if (fr < 0) continue;  // row at a collapsed data entry: not part of W
      rows.push_back(factor_of_free[fr]);
      vals.push_back(U.val[k]);
    }
    // permuting the observed block may unsort the rows
    std::vector<std::size_t> ord(rows.size());
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](std::size_t x, std::size_t y) { return rows[x] < rows[y]; });
    std::vector<int> r2(rows.size());
    std::vector<double> v2(rows.size());
    for (std::size_t q = 0; q < ord.size(); ++q) {
      r2[q] = rows[ord[q]];
      v2[q] = vals[ord[q]];
    }
    rows.swap(r2);
    vals.swap(v2);
  }

  V.col_ptr.assign(nf + 1, 0);
  for (int a = 0; a < nf; ++a) V.col_ptr[a + 1] = V.col_ptr[a] + static_cast<std::int64_t>(cols_rows[a].size());
  V.row_idx.resize(V.col_ptr[nf]);
  V.val.resize(V.col_ptr[nf]);
  for (int a = 0; a < nf; ++a) {
    std::copy(cols_rows[a].begin(), cols_rows[a].end(), V.row_idx.begin() + V.col_ptr[a]);
    std::copy(cols_vals[a].begin(), cols_vals[a].end(), V.val.begin() + V.col_ptr[a]);
  }
  return V;
}

SparseTriangularFactor banded_rchol(const BandedMatrix& W) {
  const int n = W.dim;
  const int bw = W.bandwidth;
  BandedMatrix work = W;
  SparseTriangularFactor V;
  V.role = SparseTriangularFactor::Role::V;
  V.dim = n;
  V.diag.assign(n, 0.0);
  std::vector<std::vector<int>> rows(n);
  std::vector<std::vector<double>> vals(n);
  for (int j = n - 1; j >= 0; --j) {
    double d = work.at(j, j);
    if (!(d > 0)) throw numerical_error("banded_rchol: matrix not positive definite");
    double s = std::sqrt(d);
    V.diag[j] = s;
    int lo = std::max(0, j - bw);
    for (int i = lo; i < j; ++i) {
      double v = work.at(i, j) / s;
      if (v != 0.0) {
        rows[j].push_back(i);
        vals[j].push_back(v);
      }
      work.at(i, j) = v;  // keep for the rank-1 update below
    }
    for (int a = lo; a < j; ++a) {
      double va = work.at(a, j);
      if (va == 0.0) continue;
      for (int b = a; b < j; ++b) work.at(a, b) -= va * work.at(b, j);
    }
  }
  V.col_ptr.assign(n + 1, 0);
  for (int j = 0; j < n; ++j) V.col_ptr[j + 1] = V.col_ptr[j] + static_cast<std::int64_t>(rows[j].size());
  V.row_idx.resize(V.col_ptr[n]);
  V.val.resize(V.col_ptr[n]);
  for (int j = 0; j < n; ++j) {
    std::copy(rows[j].begin(), rows[j].end(), V.row_idx.begin() + V.col_ptr[j]);
    std::copy(vals[j].begin(), vals[j].end(), V.val.begin() + V.col_ptr[j]);
  }
  return V;
}

Eigen::MatrixXd rchol_dense_reference(const Eigen::MatrixXd& W) {
  const int n = static_cast<int>(W.rows());
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = W(n - 1 - i, n - 1 - j);
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success)
    throw numerical_error("rchol_dense_reference: matrix not positive definite");
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) V(i, j) = L(n - 1 - i, n - 1 - j);
  return V;
}

namespace {

SparseTriangularFactor derive_V_lf_auto(const SparseTriangularFactor& U,
                                        const ConditioningPlan& plan) {
  const int nf = plan.n_free();
  // band of W in free-index space; column contributions stay within the band
  BandedMatrix W(nf, plan.m);
  std::vector<int> seg_rows;
  std::vector<double> seg_vals;
  for (int j = 0; j < U.dim; ++j) {
    seg_rows.clear();
    seg_vals.clear();
    auto consider = [&](int row, double v) {
      if (row < plan.n) {
        int f = plan.free_index_of_loc[plan.entries[row].loc];
        if (f >= 0) {
          seg_rows.push_back(f);
          seg_vals.push_back(v);
        }
      }
    };
    consider(j, U.diag[j]);
    for (std::int64_t k = U.col_ptr[j]; k < U.col_ptr[j + 1]; ++k)
      consider(U.row_idx[k], U.val[k]);
    for (std::size_t a = 0; a < seg_rows.size(); ++a)
      for (std::size_t b = a; b < seg_rows.size(); ++b) {
        int ra = std::min(seg_rows[a], seg_rows[b]);
        int rb = std::max(seg_rows[a], seg_rows[b]);
        W.at(ra, rb) += seg_vals[a] * seg_vals[b];
      }
  }
  return banded_rchol(W);
}

}  // namespace

SparseTriangularFactor derive_V(const SparseTriangularFactor& U, const ConditioningPlan& plan,
                                FillOrdering fill) {
  if (plan.response_first()) return extract_V_rf(U, plan);
  if (plan.scheme == SchemeKind::lf_auto) return derive_V_lf_auto(U, plan);
  return assemble_V_lf(U, plan, fill);
}

std::optional<double> SelectedInverse::entry(int i, int j) const {
  int a = ext_to_factor_.empty() ? i : ext_to_factor_[i];
  int b = ext_to_factor_.empty() ? j : ext_to_factor_[j];
  // reversed-factor coordinates
  int ra = dim_ - 1 - a, rb = dim_ - 1 - b;
  if (ra > rb) std::swap(ra, rb);
  const auto& rows = z_rows_[rb];
  auto it = std::lower_bound(rows.begin(), rows.end(), ra);
  if (it == rows.end() || *it != ra) return std::nullopt;
  return z_vals_[rb][it - rows.begin()];
}

SelectedInverse selected_inverse(const SparseTriangularFactor& V, SelInvMode mode) {
  const int n = V.dim;
  if (mode == SelInvMode::exact_padded && n > 4000)
    throw config_error("selected_inverse: exact_padded capped at dimension 4000");

  // reversed view: L = rev(V) is lower triangular with LL' = rev(W~).
  // L column c corresponds to V column n-1-c with reversed row indices.
  std::vector<std::vector<int>> Lrows(n);
  std::vector<std::vector<double>> Lvals(n);
  std::vector<double> Ldiag(n);
  for (int c = 0; c < n; ++c) {
    int j = n - 1 - c;
    Ldiag[c] = V.diag[j];
    std::int64_t lo = V.col_ptr[j], hi = V.col_ptr[j + 1];
    Lrows[c].reserve(hi - lo);
    Lvals[c].reserve(hi - lo);
    for (std::int64_t k = hi - 1; k >= lo; --k) {  // reversed => ascending rows
      Lrows[c].push_back(n - 1 - V.row_idx[k]);
      Lvals[c].push_back(V.val[k]);
    }
  }

  // Z pattern per column j: row i <= j kept if L(j,i) != 0 (fast) or all (padded)
  std::vector<std::vector<int>> pat(n);
  if (mode == SelInvMode::fast) {
    for (int c = 0; c < n; ++c)
      for (int r : Lrows[c]) pat[r].push_back(c);
    for (int j = 0; j < n; ++j) {
      pat[j].push_back(j);
      std::sort(pat[j].begin(), pat[j].end());
    }
  } else {
    for (int j = 0; j < n; ++j) {
      pat[j].resize(j + 1);
      std::iota(pat[j].begin(), pat[j].end(), 0);
    }
  }

  SelectedInverse S;
  S.dim_ = n;
  if (V.has_perm()) S.ext_to_factor_ = V.inverse_perm();
  S.z_rows_ = std::move(pat);
  S.z_vals_.resize(n);

  auto lookup = [&](const std::vector<int>& rows, const std::vector<double>& vals,
                    int r) -> double {
    auto it = std::lower_bound(rows.begin(), rows.end(), r);
    if (it == rows.end() || *it != r) return 0.0;
    return vals[it - rows.begin()];
  };

  // Takahashi recursions on A = LL': for i <= j,
  //   Z_ij = delta_ij / L_ii^2 - sum_{k>i, L_ki != 0} (L_ki/L_ii) Z_(k,j)
  for (int j = n - 1; j >= 0; --j) {
    const auto& rows = S.z_rows_[j];
    S.z_vals_[j].assign(rows.size(), 0.0);
    for (int q = static_cast<int>(rows.size()) - 1; q >= 0; --q) {
      int i = rows[q];
      double acc = (i == j) ? 1.0 / (Ldiag[i] * Ldiag[i]) : 0.0;
      const auto& ci = Lrows[i];
      const auto& vi = Lvals[i];
      for (std::size_t t = 0; t < ci.size(); ++t) {
        int k = ci[t];
        double lki = vi[t] / Ldiag[i];
        double z;
        if (k <= j) {
          z = lookup(S.z_rows_[j], S.z_vals_[j], k);
        } else {
          z = lookup(S.z_rows_[k], S.z_vals_[k], j);
        }
        acc -= lki * z;
      }
      S.z_vals_[j][q] = acc;
    }
  }

  S.diag_external_.assign(n, 0.0);
  for (int a = 0; a < n; ++a) {
    int rj = n - 1 - a;
    double z = lookup(S.z_rows_[rj], S.z_vals_[rj], rj);
    int ext = V.has_perm() ? V.perm[a] : a;
    S.diag_external_[ext] = z;
  }
  return S;
}

Eigen::MatrixXd densify_normal_matrix(const SparseTriangularFactor& V) {
  const int n = V.dim;
  Eigen::MatrixXd Vd = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    Vd(j, j) = V.diag[j];
    for (std::int64_t k = V.col_ptr[j]; k < V.col_ptr[j + 1]; ++k)
      Vd(V.row_idx[k], j) = V.val[k];
  }
  Eigen::MatrixXd Wt = Vd * Vd.transpose();
  if (!V.has_perm()) return Wt;
  Eigen::MatrixXd W(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) W(V.perm[a], V.perm[b]) = Wt(a, b);
  return W;
}

}  // namespace vecchia
