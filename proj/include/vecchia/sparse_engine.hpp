#pragma once

#include <Eigen/Dense>
#include <optional>

#include "vecchia/conditioning.hpp"
#include "vecchia/sparse_factor.hpp"

namespace vecchia {

/// Builds the sparse factor U of the joint precision (UU' = Q) column by
/// column from the plan's conditioning sets. Columns are independent; each
/// costs one dense solve of size |g(i)|.
SparseTriangularFactor build_U(const ConditioningPlan& plan, const GeometryModel& geom,
                               const MaternParams& params, const NoiseModel& noise);

/// Response-first schemes: V is the latent-block submatrix of U. Pure copy,
/// no arithmetic, hence no numerical nonzeros.
SparseTriangularFactor extract_V_rf(const SparseTriangularFactor& U,
                                    const ConditioningPlan& plan);

enum class FillOrdering { min_degree, natural };

/// Latent-first OP schemes: the prediction block of V is copied from U and
/// only the observed block is factored, after an optional fill-reducing
/// permutation (carried in the returned factor's perm).
SparseTriangularFactor assemble_V_lf(const SparseTriangularFactor& U,
                                     const ConditioningPlan& plan,
                                     FillOrdering fill = FillOrdering::min_degree);

/// Symmetric band storage for the autoregressive posterior precision.
struct BandedMatrix {
  int dim = 0;
  int bandwidth = 0;
  std::vector<double> data;  // (i, i+k) at i*(bandwidth+1)+k

  BandedMatrix() = default;
  BandedMatrix(int n, int bw) : dim(n), bandwidth(bw), data(static_cast<std::size_t>(n) * (bw + 1), 0.0) {}
  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * (bandwidth + 1) + (j - i)]; }
  double get(int i, int j) const {
    return data[static_cast<std::size_t>(i) * (bandwidth + 1) + (j - i)];
  }
};

/// Upper-lower Cholesky of a banded SPD matrix; the factor keeps the band.
SparseTriangularFactor banded_rchol(const BandedMatrix& W);

/// Dense reverse (upper-lower) Cholesky: returns upper V with V V' = W.
/// Reference/oracle path.
Eigen::MatrixXd rchol_dense_reference(const Eigen::MatrixXd& W);

/// Scheme dispatcher: structural extraction for response-first, block
/// assembly for latent-first, banded factorization for the autoregressive
/// scheme.
SparseTriangularFactor derive_V(const SparseTriangularFactor& U, const ConditioningPlan& plan,
                                FillOrdering fill = FillOrdering::min_degree);

enum class SelInvMode { fast, exact_padded };

/// Entries of W^{-1} (W = VV' up to the factor's permutation) computed by the
/// Takahashi recursions. Fast mode runs on the pattern of V+V' and omits
/// entries outside it, which slightly perturbs the result when V was obtained
/// structurally; exact_padded runs on the full pattern (small dimensions).
class SelectedInverse {
 public:
  int dim() const { return dim_; }

  /// diag(W^{-1}) in external (unpermuted) coordinates.
  const std::vector<double>& diagonal() const { return diag_external_; }

  /// Entry in external coordinates if it is on the computed pattern.
  std::optional<double> entry(int i, int j) const;

 private:
  friend SelectedInverse selected_inverse(const SparseTriangularFactor&, SelInvMode);
  int dim_ = 0;
  std::vector<int> ext_to_factor_;  // inverse of the factor's perm
  // Z stored per reversed-factor column: rows ascending, diagonal included
  std::vector<std::vector<int>> z_rows_;
  std::vector<std::vector<double>> z_vals_;
  std::vector<double> diag_external_;
};

SelectedInverse selected_inverse(const SparseTriangularFactor& V,
                                 SelInvMode mode = SelInvMode::fast);

/// Dense W = VV' in external coordinates (test/support path, small dims).
Eigen::MatrixXd densify_normal_matrix(const SparseTriangularFactor& V);

}  // namespace vecchia
