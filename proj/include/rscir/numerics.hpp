#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rscir/embedstore.hpp"

namespace rscir {

enum class Calibration { Raw, ZScore, Cdf, MinRange };

/// One score per candidate, index-aligned with the candidate pool.
struct ScoreVector {
  std::vector<double> values;
  Calibration calibration = Calibration::Raw;
  // Set when a calibration step met a constant input.
  bool degenerate = false;

  std::size_t size() const { return values.size(); }
};

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data).subspan(r * cols, cols);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }

  static Matrix from_store(const EmbeddingStore& store);
  static Matrix identity(std::size_t n);
};

double frobenius_norm(const Matrix& a);

/// Standard normal CDF. Throws Errc::NonFiniteInput for NaN or infinity.
double std_normal_cdf(double x);

/// Standardizes to zero mean and unit population standard deviation.
/// Constant input yields all zeros with `degenerate` set.
ScoreVector zscore(const ScoreVector& scores);

/// Maps through the standard normal CDF (expects z-scored input).
ScoreVector cdf_calibrate(const ScoreVector& scores);

/// (s - min) / (max - min); constant input maps to 0.5 with `degenerate`.
ScoreVector minrange_normalize(const ScoreVector& scores);

/// Population covariance (1/m) X^T X of the rows of `samples`. The column
/// mean is subtracted first unless `centered` says the rows already are.
Matrix covariance(const Matrix& samples, bool centered = false);

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // non-increasing
  Matrix eigenvectors;              // row i pairs with eigenvalues[i]
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Eigenvectors are
/// signed so that their largest-magnitude component (first on ties) is
/// positive.
EigenDecomposition sym_eigen(const Matrix& a);

struct ProjectionBasis {
  Matrix basis;                     // p x d, orthonormal rows
  std::vector<double> eigenvalues;  // of Sigma(C+) - alpha * Sigma(C-)
  double alpha = 0.0;
  std::size_t p = 0;

  std::size_t dim() const { return basis.cols; }
};

/// Top-p eigenvectors of cov(c_plus) - alpha * cov(c_minus).
ProjectionBasis contrastive_projection(const Matrix& c_plus,
                                       const Matrix& c_minus, double alpha,
                                       std::size_t p);
ProjectionBasis contrastive_projection(const EmbeddingStore& c_plus,
                                       const EmbeddingStore& c_minus,
                                       double alpha, std::size_t p);

struct ProjectedVector {
  std::vector<double> values;
  bool degenerate = false;
};

/// Orthogonal projection onto the basis span, renormalized. A projection
/// with norm below 1e-10 returns `v` unchanged and flags it degenerate.
ProjectedVector project(const ProjectionBasis& basis, std::span<const double> v);

/// Unit-norm copy of `v`. Throws Errc::ZeroNormRow for a zero vector.
std::vector<double> renormalize(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

}  // namespace rscir
