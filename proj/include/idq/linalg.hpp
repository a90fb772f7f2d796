#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "idq/matrix.hpp"

namespace idq {

/// Symmetric matrix; construction rejects entries that are not exactly
/// mirrored across the diagonal.
class SymMatrix {
 public:
  SymMatrix(std::size_t dim, std::vector<double> row_major);
  explicit SymMatrix(const Matrix& m);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
  std::span<const double> entries() const { return entries_; }
  double trace() const;
  Matrix to_matrix() const;

 private:
  std::size_t dim_;
  std::vector<double> entries_;
};

/// Eigenvalues in non-increasing order; column k of `eigenvectors` pairs with
/// eigenvalues[k].
struct EigenPair {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;

  std::size_t dim() const { return eigenvalues.size(); }
};

inline constexpr std::size_t kMaxEighDim = 4096;
inline constexpr int kMaxJacobiSweeps = 100;

/// Cyclic Jacobi eigensolver. Eigenvalues within 1e-10 below zero are clamped
/// to zero; each eigenvector's first nonzero component is made non-negative.
/// Throws NonConvergence after kMaxJacobiSweeps sweeps.
EigenPair jacobi_eigh(const SymMatrix& c);

/// Symmetric Toeplitz matrix with entries[i][j] = autocov[|i - j|].
SymMatrix toeplitz_covariance(std::span<const double> autocov, std::size_t order);

/// Karhunen-Loeve transform A^T x.
std::vector<double> klt_forward(const EigenPair& basis, std::span<const double> x);
/// Inverse transform A y.
std::vector<double> klt_inverse(const EigenPair& basis, std::span<const double> y);

/// Per-sample squared Euclidean distance ||x - y||^2 / n.
double per_sample_distance(std::span<const double> x, std::span<const double> y);

}  // namespace idq
