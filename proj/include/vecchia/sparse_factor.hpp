#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vecchia {

/// Column-sparse upper-triangular factor. Off-diagonal entries are stored per
/// column with strictly ascending row indices below the column index; the
/// diagonal is dense and positive.
///
/// A factor may carry a symmetric permutation `perm` (factor coordinate a
/// stands for external coordinate perm[a]); an empty perm means identity.
/// With M the external matrix, the triangular identity is M[perm,perm] = V V'.
struct SparseTriangularFactor {
  enum class Role { U, V };

  Role role = Role::U;
  int dim = 0;
  std::vector<std::int64_t> col_ptr;  // size dim+1
  std::vector<int> row_idx;           // strictly upper entries
  std::vector<double> val;
  std::vector<double> diag;
  std::vector<int> perm;  // V only; empty = identity

  std::int64_t nnz_off_diagonal() const { return static_cast<std::int64_t>(row_idx.size()); }
  int col_nnz(int j) const { return static_cast<int>(col_ptr[j + 1] - col_ptr[j]); }
  int max_col_nnz() const;
  double average_nnz_per_column() const;  // includes the diagonal

  bool has_perm() const { return !perm.empty(); }
  std::vector<int> inverse_perm() const;
};

/// x with V x = b (backward substitution).
std::vector<double> solve_upper(const SparseTriangularFactor& V, std::vector<double> b);

/// x with V' x = b (forward substitution).
std::vector<double> solve_upper_transpose(const SparseTriangularFactor& V, std::vector<double> b);

/// y = V x and y = V' x.
std::vector<double> multiply_upper(const SparseTriangularFactor& V, const std::vector<double>& x);
std::vector<double> multiply_upper_transpose(const SparseTriangularFactor& V,
                                             const std::vector<double>& x);

/// Matrix Market coordinate output (1-based, general).
void write_matrix_market(const SparseTriangularFactor& F, const std::string& path);

}  // namespace vecchia
