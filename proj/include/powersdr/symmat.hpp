#pragma once

// Dense symmetric-matrix kernel: storage with an exact-symmetry invariant,
// a cyclic Jacobi eigensolver, spectral functions (rational matrix powers,
// pseudoinverse) and the order/Schur predicates built on top of them.
//
// Everything is desk scale (n <= a few dozen); no attempt at blocking or
// vectorization is made.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "powersdr/rational.hpp"

namespace powersdr {

inline constexpr double kDefaultTol = 1e-8;

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  static Mat zero(int r, int c) {
    if (r < 1 || c < 1) throw std::invalid_argument("Mat: empty dimensions");
    Mat m;
    m.rows = r;
    m.cols = c;
    m.a.assign(static_cast<std::size_t>(r) * c, 0.0);
    return m;
  }
  static Mat identity(int n) {
    Mat m = zero(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const {
    return a[static_cast<std::size_t>(i) * cols + j];
  }
};

inline Mat matmul(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw std::invalid_argument("matmul: shape mismatch");
  Mat r = Mat::zero(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      double v = x.at(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < y.cols; ++j) r.at(i, j) += v * y.at(k, j);
    }
  return r;
}

inline Mat transpose(const Mat& x) {
  Mat r = Mat::zero(x.cols, x.rows);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) r.at(j, i) = x.at(i, j);
  return r;
}

class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("SymMatrix: n must be >= 1");
    a_.assign(static_cast<std::size_t>(n) * n, 0.0);
  }

  static SymMatrix identity(int n) {
    SymMatrix s(n);
    for (int i = 0; i < n; ++i) s.set(i, i, 1.0);
    return s;
  }

  // Exact symmetry is demanded unless the caller explicitly asks for the
  // symmetric part; silent symmetrization hides data errors.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows,
                             bool symmetrize = false) {
    int n = static_cast<int>(rows.size());
    SymMatrix s(n);
    for (const auto& row : rows)
      if (static_cast<int>(row.size()) != n)
        throw std::invalid_argument("SymMatrix: ragged rows");
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        if (rows[i][j] != rows[j][i]) {
          if (!symmetrize)
            throw std::invalid_argument(
                "SymMatrix: input not symmetric at (" + std::to_string(i) +
                "," + std::to_string(j) + ")");
          s.set(i, j, 0.5 * (rows[i][j] + rows[j][i]));
        } else {
          s.set(i, j, rows[i][j]);
        }
      }
    return s;
  }

  static SymMatrix from_mat(const Mat& m, bool symmetrize = false) {
    if (m.rows != m.cols)
      throw std::invalid_argument("SymMatrix: matrix not square");
    SymMatrix s(m.rows);
    for (int i = 0; i < m.rows; ++i)
      for (int j = i; j < m.rows; ++j) {
        if (!symmetrize && m.at(i, j) != m.at(j, i))
          throw std::invalid_argument("SymMatrix: matrix not symmetric");
        s.set(i, j, 0.5 * (m.at(i, j) + m.at(j, i)));
      }
    return s;
  }

  int n() const { return n_; }

  double operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * n_ + j];
  }
  void set(int i, int j, double v) {
    a_[static_cast<std::size_t>(i) * n_ + j] = v;
    a_[static_cast<std::size_t>(j) * n_ + i] = v;
  }
  void add_at(int i, int j, double v) { set(i, j, (*this)(i, j) + v); }

  Mat to_mat() const {
    Mat m = Mat::zero(n_, n_);
    m.a = a_;
    return m;
  }

  friend SymMatrix operator+(const SymMatrix& x, const SymMatrix& y) {
    check_same(x, y);
    SymMatrix r = x;
    for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] += y.a_[i];
    return r;
  }
  friend SymMatrix operator-(const SymMatrix& x, const SymMatrix& y) {
    check_same(x, y);
    SymMatrix r = x;
    for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] -= y.a_[i];
    return r;
  }
  friend SymMatrix operator*(double c, const SymMatrix& x) {
    SymMatrix r = x;
    for (double& v : r.a_) v *= c;
    return r;
  }

 private:
  static void check_same(const SymMatrix& x, const SymMatrix& y) {
    if (x.n_ != y.n_)
      throw std::invalid_argument("SymMatrix: dimension mismatch");
  }
  int n_ = 0;
  std::vector<double> a_;
};

inline double norm_max(const SymMatrix& x) {
  double m = 0.0;
  for (int i = 0; i < x.n(); ++i)
    for (int j = 0; j < x.n(); ++j) m = std::max(m, std::abs(x(i, j)));
  return m;
}

inline double norm_frob(const SymMatrix& x) {
  double s = 0.0;
  for (int i = 0; i < x.n(); ++i)
    for (int j = 0; j < x.n(); ++j) s += x(i, j) * x(i, j);
  return std::sqrt(s);
}

// (A kron B)[i*nb+a][j*nb+b] = A[i][j] * B[a][b]
inline SymMatrix kron(const SymMatrix& x, const SymMatrix& y) {
  int nx = x.n(), ny = y.n();
  SymMatrix r(nx * ny);
  for (int i = 0; i < nx; ++i)
    for (int j = i; j < nx; ++j) {
      if (x(i, j) == 0.0) continue;
      for (int a = 0; a < ny; ++a)
        for (int b = 0; b < ny; ++b)
          r.set(i * ny + a, j * ny + b, x(i, j) * y(a, b));
    }
  return r;
}

// ---------------------------------------------------------------------------
// Spectral decomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

// X = basis * diag(eigenvalues) * basis^T, eigenvalues sorted descending,
// basis columns are the eigenvectors.
struct Spectrum {
  std::vector<double> eigenvalues;
  Mat basis;
};

inline Spectrum eig_sym(const SymMatrix& x, int max_sweeps = 100) {
  int n = x.n();
  Mat a = x.to_mat();
  Mat v = Mat::identity(n);
  double frob0 = norm_frob(x);
  const double target = 1e-12 * frob0;

  auto off_norm = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += 2.0 * a.at(i, j) * a.at(i, j);
    return std::sqrt(s);
  };

  if (frob0 > 0.0) {
    int sweep = 0;
    while (off_norm() > target) {
      if (++sweep > max_sweeps)
        throw std::runtime_error(
            "eig_sym: Jacobi failed to converge; off-diagonal residual " +
            std::to_string(off_norm()));
      for (int p = 0; p < n - 1; ++p)
        for (int q = p + 1; q < n; ++q) {
          double apq = a.at(p, q);
          if (apq == 0.0) continue;
          double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
          double t = (theta >= 0 ? 1.0 : -1.0) /
                     (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          double c = 1.0 / std::sqrt(t * t + 1.0);
          double s = t * c;
          // A <- J^T A J on rows/cols p,q
          for (int k = 0; k < n; ++k) {
            double akp = a.at(k, p), akq = a.at(k, q);
            a.at(k, p) = c * akp - s * akq;
            a.at(k, q) = s * akp + c * akq;
          }
          for (int k = 0; k < n; ++k) {
            double apk = a.at(p, k), aqk = a.at(q, k);
            a.at(p, k) = c * apk - s * aqk;
            a.at(q, k) = s * apk + c * aqk;
          }
          for (int k = 0; k < n; ++k) {
            double vkp = v.at(k, p), vkq = v.at(k, q);
            v.at(k, p) = c * vkp - s * vkq;
            v.at(k, q) = s * vkp + c * vkq;
          }
        }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a.at(i, i) > a.at(j, j); });
  Spectrum out;
  out.eigenvalues.resize(n);
  out.basis = Mat::zero(n, n);
  for (int c = 0; c < n; ++c) {
    out.eigenvalues[c] = a.at(order[c], order[c]);
    for (int r = 0; r < n; ++r) out.basis.at(r, c) = v.at(r, order[c]);
  }
  return out;
}

inline SymMatrix map_eigenvalues(const Spectrum& s,
                                 const std::function<double(double)>& f) {
  int n = static_cast<int>(s.eigenvalues.size());
  Mat scaled = s.basis;  // columns scaled by f(lambda)
  for (int c = 0; c < n; ++c) {
    double fv = f(s.eigenvalues[c]);
    for (int r = 0; r < n; ++r) scaled.at(r, c) *= fv;
  }
  Mat m = matmul(scaled, transpose(s.basis));
  return SymMatrix::from_mat(m, /*symmetrize=*/true);
}

inline double psd_margin(const SymMatrix& x) {
  return eig_sym(x).eigenvalues.back();
}

inline bool is_psd(const SymMatrix& x, double tol = kDefaultTol) {
  return psd_margin(x) >= -tol * std::max(1.0, norm_max(x));
}

inline bool loewner_geq(const SymMatrix& a, const SymMatrix& b,
                        double tol = kDefaultTol) {
  double scale = std::max({1.0, norm_max(a), norm_max(b)});
  return psd_margin(a - b) >= -tol * scale;
}

// X^p for rational p via the spectral decomposition. Eigenvalues inside the
// clamp band [-tol*scale, 0] are treated as exact zeros; below the band the
// input is rejected rather than silently clamped.
inline SymMatrix matrix_power(const SymMatrix& x, const Rational& p,
                              double tol = kDefaultTol) {
  Spectrum s = eig_sym(x);
  double band = tol * std::max(1.0, norm_max(x));
  double pd = to_double(p);
  bool negative = p < make_rational(0, 1);
  for (double& lam : s.eigenvalues) {
    if (lam < -band)
      throw std::domain_error("matrix_power: eigenvalue " +
                              std::to_string(lam) + " below the psd band");
    if (lam < 0.0) lam = 0.0;
    if (negative && lam <= band)
      throw std::domain_error(
          "matrix_power: negative exponent needs a positive definite input");
  }
  return map_eigenvalues(s, [&](double lam) {
    if (lam == 0.0) return p.num == 0 ? 1.0 : 0.0;
    return std::pow(lam, pd);
  });
}

// Moore-Penrose inverse; eigenvalues within tol * ||X||_2 of zero are
// treated as zero.
inline SymMatrix pseudoinverse(const SymMatrix& x, double tol = kDefaultTol) {
  Spectrum s = eig_sym(x);
  double spectral = 0.0;
  for (double lam : s.eigenvalues) spectral = std::max(spectral, std::abs(lam));
  double cut = tol * std::max(1.0, spectral);
  return map_eigenvalues(
      s, [&](double lam) { return std::abs(lam) <= cut ? 0.0 : 1.0 / lam; });
}

// Range(B) within Range(C), via the projector C C^+.
inline bool range_contained(const SymMatrix& b, const SymMatrix& c,
                            double tol = kDefaultTol) {
  Mat proj = matmul(c.to_mat(), pseudoinverse(c).to_mat());
  Mat pb = matmul(proj, b.to_mat());
  double resid = 0.0;
  for (int i = 0; i < b.n(); ++i)
    for (int j = 0; j < b.n(); ++j)
      resid = std::max(resid, std::abs(pb.at(i, j) - b(i, j)));
  // the projector itself carries ~tol-sized noise, so allow a looser band
  return resid <= std::sqrt(tol) * std::max(1.0, norm_max(b));
}

inline SymMatrix assemble_block2(const SymMatrix& a, const SymMatrix& b,
                                 const SymMatrix& c) {
  int n = a.n();
  if (b.n() != n || c.n() != n)
    throw std::invalid_argument("block assembly: dimension mismatch");
  SymMatrix m(2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j >= i) {
        m.set(i, j, a(i, j));
        m.set(i + n, j + n, c(i, j));
      }
      m.set(i, j + n, b(i, j));
    }
  return m;
}

// [[A, B],[B, C]] >= 0, decided by a direct eigencheck of the assembled block.
inline bool schur_block_psd(const SymMatrix& a, const SymMatrix& b,
                            const SymMatrix& c, double tol = kDefaultTol) {
  return is_psd(assemble_block2(a, b, c), tol);
}

// Same predicate through the generalized Schur-complement characterization:
// C >= 0, Range(B) within Range(C), and A - B C^+ B >= 0. Used as the dual
// oracle path in tests.
inline bool schur_three_condition(const SymMatrix& a, const SymMatrix& b,
                                  const SymMatrix& c,
                                  double tol = kDefaultTol) {
  if (!is_psd(c, tol)) return false;
  if (!range_contained(b, c, tol)) return false;
  Mat bcb = matmul(matmul(b.to_mat(), pseudoinverse(c, tol).to_mat()),
                   b.to_mat());
  return loewner_geq(a, SymMatrix::from_mat(bcb, /*symmetrize=*/true), tol);
}

}  // namespace powersdr
