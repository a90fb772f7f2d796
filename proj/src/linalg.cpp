#include "idq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "idq/errors.hpp"

namespace idq {

SymMatrix::SymMatrix(std::size_t dim, std::vector<double> row_major)
    : dim_(dim), entries_(std::move(row_major)) {
  if (dim_ == 0) throw Error(ErrorKind::kDomainError, "SymMatrix dim must be >= 1");
  if (entries_.size() != dim_ * dim_)
    throw Error(ErrorKind::kDimensionMismatch, "SymMatrix needs dim*dim entries");
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i + 1; j < dim_; ++j)
      if (entries_[i * dim_ + j] != entries_[j * dim_ + i])
        throw Error(ErrorKind::kDomainError, "SymMatrix entries are not symmetric");
}

SymMatrix::SymMatrix(const Matrix& m)
    : SymMatrix(m.rows(), std::vector<double>(m.data().begin(), m.data().end())) {
  if (m.rows() != m.cols())
    throw Error(ErrorKind::kDimensionMismatch, "SymMatrix needs a square matrix");
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

Matrix SymMatrix::to_matrix() const {
  Matrix m(dim_, dim_);
  std::copy(entries_.begin(), entries_.end(), m.data().begin());
  return m;
}

namespace {

// Applies the rotation that zeroes a(p, q) to both sides of `a` and
// accumulates it into the columns of `v`.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const std::size_t n = a.rows();
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  for (std::size_t k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

double off_diagonal_sum(const Matrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) sum += std::abs(a(i, j));
  return sum;
}

}  // namespace

EigenPair jacobi_eigh(const SymMatrix& c) {
  const std::size_t n = c.dim();
  if (n > kMaxEighDim)
    throw Error(ErrorKind::kDomainError, "jacobi_eigh supports dim <= 4096");

  Matrix a = c.to_matrix();
  Matrix v = Matrix::identity(n);

  bool converged = false;
  for (int sweep = 1; sweep <= kMaxJacobiSweeps; ++sweep) {
    if (off_diagonal_sum(a) == 0.0) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double g = 100.0 * std::abs(a(p, q));
        // Once an off-diagonal entry is below the rounding level of both
        // diagonal entries it is set to zero rather than rotated.
        if (sweep > 4 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
        } else if (a(p, q) != 0.0) {
          rotate(a, v, p, q);
        }
      }
    }
  }
  if (!converged && off_diagonal_sum(a) != 0.0)
    throw Error(ErrorKind::kNonConvergence, "cyclic Jacobi exceeded 100 sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return a(l, l) > a(r, r); });

  EigenPair out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    double lambda = a(src, src);
    if (lambda < 0.0 && lambda >= -1e-10) lambda = 0.0;
    out.eigenvalues[k] = lambda;

    double sign = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (std::abs(v(r, src)) > 1e-12) {
        sign = v(r, src) < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = sign * v(r, src);
  }
  return out;
}

SymMatrix toeplitz_covariance(std::span<const double> autocov, std::size_t order) {
  if (order == 0) throw Error(ErrorKind::kDomainError, "Toeplitz order must be >= 1");
  if (autocov.size() < order)
    throw Error(ErrorKind::kDimensionMismatch, "autocovariance shorter than order");
  if (!(autocov[0] > 0.0))
    throw Error(ErrorKind::kDomainError, "autocovariance at lag 0 must be positive");
  std::vector<double> entries(order * order);
  for (std::size_t i = 0; i < order; ++i)
    for (std::size_t j = 0; j < order; ++j)
      entries[i * order + j] = autocov[i > j ? i - j : j - i];
  return SymMatrix(order, std::move(entries));
}

std::vector<double> klt_forward(const EigenPair& basis, std::span<const double> x) {
  const std::size_t n = basis.dim();
  if (x.size() != n) throw Error(ErrorKind::kDimensionMismatch, "klt_forward length");
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double xr = x[r];
    const auto row = basis.eigenvectors.row(r);
    for (std::size_t k = 0; k < n; ++k) out[k] += row[k] * xr;
  }
  return out;
}

std::vector<double> klt_inverse(const EigenPair& basis, std::span<const double> y) {
  const std::size_t n = basis.dim();
  if (y.size() != n) throw Error(ErrorKind::kDimensionMismatch, "klt_inverse length");
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = basis.eigenvectors.row(r);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += row[k] * y[k];
    out[r] = acc;
  }
  return out;
}

double per_sample_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty())
    throw Error(ErrorKind::kDimensionMismatch, "distance operands differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

}  // namespace idq
