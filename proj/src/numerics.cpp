#include "rscir/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "rscir/error.hpp"

namespace rscir {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(Errc::NonFiniteInput, fmt::format("{}[{}] is not finite", what, i));
    }
  }
}

}  // namespace

Matrix Matrix::from_store(const EmbeddingStore& store) {
  Matrix m(store.size(), store.dim());
  const auto data = store.data();
  std::copy(data.begin(), data.end(), m.data.begin());
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double frobenius_norm(const Matrix& a) {
  double sq = 0.0;
  for (double x : a.data) sq += x * x;
  return std::sqrt(sq);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

std::vector<double> renormalize(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw Error(Errc::ZeroNormRow, "cannot renormalize a zero vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

double std_normal_cdf(double x) {
  if (!std::isfinite(x)) {
    throw Error(Errc::NonFiniteInput, fmt::format("std_normal_cdf({})", x));
  }
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

ScoreVector zscore(const ScoreVector& scores) {
  const auto& v = scores.values;
  if (v.size() < 2) {
    throw Error(Errc::TooShort, fmt::format("zscore needs >= 2 values, got {}", v.size()));
  }
  require_finite(v, "scores");
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double sq = 0.0;
  double max_abs = 0.0;
  for (double x : v) {
    sq += (x - mean) * (x - mean);
    max_abs = std::max(max_abs, std::abs(x));
  }
  const double sigma = std::sqrt(sq / n);

  ScoreVector out;
  out.calibration = Calibration::ZScore;
  out.values.assign(v.size(), 0.0);
  if (sigma <= 1e-13 * std::max(1.0, max_abs)) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < v.size(); ++i) out.values[i] = (v[i] - mean) / sigma;
  return out;
}

ScoreVector cdf_calibrate(const ScoreVector& scores) {
  ScoreVector out;
  out.calibration = Calibration::Cdf;
  out.degenerate = scores.degenerate;
  out.values.reserve(scores.size());
  for (double x : scores.values) out.values.push_back(std_normal_cdf(x));
  return out;
}

ScoreVector minrange_normalize(const ScoreVector& scores) {
  const auto& v = scores.values;
  if (v.empty()) throw Error(Errc::TooShort, "minrange_normalize of an empty vector");
  require_finite(v, "scores");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo;
  const double range = *hi - *lo;

  ScoreVector out;
  out.calibration = Calibration::MinRange;
  if (range == 0.0) {
    out.values.assign(v.size(), 0.5);
    out.degenerate = true;
    return out;
  }
  out.values.reserve(v.size());
  for (double x : v) out.values.push_back((x - min) / range);
  return out;
}

Matrix covariance(const Matrix& samples, bool centered) {
  const std::size_t m = samples.rows;
  const std::size_t d = samples.cols;
  if (m < 2) {
    throw Error(Errc::TooFewSamples, fmt::format("covariance needs >= 2 samples, got {}", m));
  }
  require_finite(samples.data, "samples");

  std::vector<double> mean(d, 0.0);
  if (!centered) {
    for (std::size_t k = 0; k < m; ++k) {
      const auto row = samples.row(k);
      for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& x : mean) x /= static_cast<double>(m);
  }

  Matrix sigma(d, d);
  std::vector<double> dev(d);
  for (std::size_t k = 0; k < m; ++k) {
    const auto row = samples.row(k);
    for (std::size_t j = 0; j < d; ++j) dev[j] = row[j] - mean[j];
    for (std::size_t i = 0; i < d; ++i) {
      const double di = dev[i];
      if (di == 0.0) continue;
      double* out = &sigma.data[i * d];
      for (std::size_t j = i; j < d; ++j) out[j] += di * dev[j];
    }
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      sigma(i, j) *= inv_m;
      sigma(j, i) = sigma(i, j);
    }
  }
  return sigma;
}

// --- Jacobi eigensolver -----------------------------------------------------

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-8;

double off_diagonal_norm(const Matrix& a) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (i != j) sq += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sq);
}

// Annihilates a(p, q) with a plane rotation; `v` accumulates the rotations
// as rows (row i converges to the eigenvector of a(i, i)).
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows;

  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  double* row_p = &a.data[p * n];
  double* row_q = &a.data[q * n];
  for (std::size_t r = 0; r < n; ++r) {
    if (r == p || r == q) continue;
    const double arp = row_p[r];
    const double arq = row_q[r];
    const double new_p = c * arp - s * arq;
    const double new_q = s * arp + c * arq;
    row_p[r] = new_p;
    row_q[r] = new_q;
    a.data[r * n + p] = new_p;
    a.data[r * n + q] = new_q;
  }

  double* vp = &v.data[p * n];
  double* vq = &v.data[q * n];
  for (std::size_t r = 0; r < n; ++r) {
    const double x = vp[r];
    const double y = vq[r];
    vp[r] = c * x - s * y;
    vq[r] = s * x + c * y;
  }
}

void canonical_sign(std::span<double> vec) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < vec.size(); ++i) {
    if (std::abs(vec[i]) > std::abs(vec[best])) best = i;
  }
  if (vec[best] < 0.0) {
    for (double& x : vec) x = -x;
  }
}

}  // namespace

EigenDecomposition sym_eigen(const Matrix& input) {
  if (input.rows != input.cols || input.rows == 0) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("sym_eigen needs a non-empty square matrix, got {}x{}",
                            input.rows, input.cols));
  }
  require_finite(input.data, "matrix");
  const std::size_t n = input.rows;
  const double fro = frobenius_norm(input);

  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double asym = std::abs(input(i, j) - input(j, i));
      if (asym > kSymmetryTolerance * std::max(1.0, fro)) {
        throw Error(Errc::NotSymmetric,
                    fmt::format("|a({0},{1}) - a({1},{0})| = {2:.3g}", i, j, asym));
      }
      a(i, j) = 0.5 * (input(i, j) + input(j, i));
    }
  }
  Matrix v = Matrix::identity(n);

  const double target = kOffTolerance * fro;
  int sweeps = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweeps == kMaxSweeps) {
      throw Error(Errc::NoConvergence,
                  fmt::format("off-diagonal norm {:.3g} after {} sweeps",
                              off_diagonal_norm(a), kMaxSweeps));
    }
    ++sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) != 0.0) rotate(a, v, p, q);
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.sweeps = sweeps;
  out.eigenvalues.reserve(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues.push_back(a(order[k], order[k]));
    auto dst = out.eigenvectors.row(k);
    const auto src = v.row(order[k]);
    std::copy(src.begin(), src.end(), dst.begin());
    canonical_sign(dst);
  }
  return out;
}

// --- contrastive projection -------------------------------------------------

ProjectionBasis contrastive_projection(const Matrix& c_plus, const Matrix& c_minus,
                                       double alpha, std::size_t p) {
  if (c_plus.cols != c_minus.cols) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("C+ has dim {}, C- has dim {}", c_plus.cols, c_minus.cols));
  }
  const std::size_t d = c_plus.cols;
  if (p == 0 || p > d) {
    throw Error(Errc::InvalidConfig, fmt::format("p must be in [1, {}], got {}", d, p));
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(Errc::InvalidConfig, fmt::format("alpha must be >= 0, got {}", alpha));
  }

  Matrix m = covariance(c_plus);
  if (alpha > 0.0) {
    const Matrix neg = covariance(c_minus);
    for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] -= alpha * neg.data[i];
  }
  const EigenDecomposition eig = sym_eigen(m);

  ProjectionBasis out;
  out.alpha = alpha;
  out.p = p;
  out.basis = Matrix(p, d);
  std::copy_n(eig.eigenvectors.data.begin(), p * d, out.basis.data.begin());
  out.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + p);
  return out;
}

ProjectionBasis contrastive_projection(const EmbeddingStore& c_plus,
                                       const EmbeddingStore& c_minus, double alpha,
                                       std::size_t p) {
  return contrastive_projection(Matrix::from_store(c_plus), Matrix::from_store(c_minus),
                                alpha, p);
}

ProjectedVector project(const ProjectionBasis& basis, std::span<const double> v) {
  const std::size_t d = basis.dim();
  if (v.size() != d) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("vector has dim {}, basis has dim {}", v.size(), d));
  }
  if (!(norm(v) > 0.0)) throw Error(Errc::ZeroNormRow, "project of a zero vector");

  std::vector<double> out(d, 0.0);
  for (std::size_t k = 0; k < basis.basis.rows; ++k) {
    const auto b = basis.basis.row(k);
    const double c = dot(b, v);
    for (std::size_t j = 0; j < d; ++j) out[j] += c * b[j];
  }
  const double n = norm(out);
  if (n < 1e-10) return {std::vector<double>(v.begin(), v.end()), true};
  for (double& x : out) x /= n;
  return {std::move(out), false};
}

}  // namespace rscir
