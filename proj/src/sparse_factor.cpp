#include "vecchia/sparse_factor.hpp"

#include <algorithm>
#include <cstdio>

#include "vecchia/errors.hpp"

namespace vecchia {

int SparseTriangularFactor::max_col_nnz() const {
  int mx = 0;
  for (int j = 0; j < dim; ++j) mx = std::max(mx, col_nnz(j));
  return mx;
}

double SparseTriangularFactor::average_nnz_per_column() const {
  if (dim == 0) return 0;
  return (static_cast<double>(row_idx.size()) + dim) / dim;
}

std::vector<int> SparseTriangularFactor::inverse_perm() const {
  std::vector<int> inv(perm.size());
  for (int a = 0; a < static_cast<int>(perm.size()); ++a) inv[perm[a]] = a;
  return inv;
}

std::vector<double> solve_upper(const SparseTriangularFactor& V, std::vector<double> b) {
  if (static_cast<int>(b.size()) != V.dim) throw numerical_error("solve_upper: size mismatch");
  for (int j = V.dim - 1; j >= 0; --j) {
    if (V.diag[j] == 0) throw numerical_error("solve_upper: zero diagonal");
    double xj = b[j] / V.diag[j];
    b[j] = xj;
    for (std::int64_t k = V.col_ptr[j]; k < V.col_ptr[j + 1]; ++k)
      b[V.row_idx[k]] -= V.val[k] * xj;
  }
  return b;
}

std::vector<double> solve_upper_transpose(const SparseTriangularFactor& V,
                                          std::vector<double> b) {
  if (static_cast<int>(b.size()) != V.dim)
    throw numerical_error("solve_upper_transpose: size mismatch");
  for (int j = 0; j < V.dim; ++j) {
    if (V.diag[j] == 0) throw numerical_error("solve_upper_transpose: zero diagonal");
    double acc = b[j];
    for (std::int64_t k = V.col_ptr[j]; k < V.col_ptr[j + 1]; ++k)
      acc -= V.val[k] * b[V.row_idx[k]];
    b[j] = acc / V.diag[j];
  }
  return b;
}

std::vector<double> multiply_upper(const SparseTriangularFactor& V,
                                   const std::vector<double>& x) {
  std::vector<double> y(V.dim, 0.0);
  for (int j = 0; j < V.dim; ++j) {
    y[j] += V.diag[j] * x[j];
    for (std::int64_t k = V.col_ptr[j]; k < V.col_ptr[j + 1]; ++k)
      y[V.row_idx[k]] += V.val[k] * x[j];
  }
  return y;
}

std::vector<double> multiply_upper_transpose(const SparseTriangularFactor& V,
                                             const std::vector<double>& x) {
  std::vector<double> y(V.dim, 0.0);
  for (int j = 0; j < V.dim; ++j) {
    double acc = V.diag[j] * x[j];
    for (std::int64_t k = V.col_ptr[j]; k < V.col_ptr[j + 1]; ++k)
      acc += V.val[k] * x[V.row_idx[k]];
    y[j] = acc;
  }
  return y;
}

void write_matrix_market(const SparseTriangularFactor& F, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw input_error("cannot open " + path);
  std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
  std::fprintf(f, "%d %d %lld\n", F.dim, F.dim,
               static_cast<long long>(F.nnz_off_diagonal() + F.dim));
  for (int j = 0; j < F.dim; ++j) {
    std::fprintf(f, "%d %d %.17g\n", j + 1, j + 1, F.diag[j]);
    for (std::int64_t k = F.col_ptr[j]; k < F.col_ptr[j + 1]; ++k)
      std::fprintf(f, "%d %d %.17g\n", F.row_idx[k] + 1, j + 1, F.val[k]);
  }
  std::fclose(f);
}

}  // namespace vecchia
