#include "steinflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "steinflow/errors.hpp"

namespace steinflow {

SymMatrix::SymMatrix(Matrix entries) : a_(std::move(entries)) {
  if (a_.rows() != a_.cols()) throw DimensionMismatch("symmetric matrix must be square");
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a_.cols(); ++j) {
      if (a_(i, j) != a_(j, i)) {
        throw InvalidArgument("matrix is not symmetric at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
    }
  }
}

SymMatrix& SymMatrix::scale_and_shift(double scale, double shift) {
  a_ *= scale;
  a_.diagonal().array() += shift;
  return *this;
}

SolveConfig SolveConfig::cg(double tol, int max_iter, bool jacobi_precondition) {
  if (!(tol > 0.0)) throw InvalidArgument("cg tolerance must be positive");
  if (max_iter < 1) throw InvalidArgument("cg max_iter must be at least 1");
  return SolveConfig{CgMethod{tol, max_iter, jacobi_precondition}};
}

Matrix cholesky(const SymMatrix& sym) {
  const Matrix& a = sym.matrix();
  const Eigen::Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) throw NotSpd(static_cast<std::size_t>(j));
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    const double* lj = l.row(j).data();
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double* li = l.row(i).data();
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= li[k] * lj[k];
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix cholesky_solve(const Matrix& lower, const Matrix& b) {
  const Eigen::Index n = lower.rows();
  if (b.rows() != n) throw DimensionMismatch("right-hand side row count does not match system");
  Matrix x = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < i; ++k) x.row(i) -= lower(i, k) * x.row(k);
    x.row(i) /= lower(i, i);
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index k = i + 1; k < n; ++k) x.row(i) -= lower(k, i) * x.row(k);
    x.row(i) /= lower(i, i);
  }
  return x;
}

namespace {

Vector cg_column(const Matrix& a, const Vector& b, const CgMethod& m) {
  const Eigen::Index n = a.rows();
  Vector x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return x;

  Vector inv_diag = Vector::Ones(n);
  if (m.jacobi_precondition) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(a(i, i) > 0.0)) throw NotSpd(static_cast<std::size_t>(i));
      inv_diag(i) = 1.0 / a(i, i);
    }
  }

  Vector r = b;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  double rel = 1.0;
  for (int it = 0; it < m.max_iter; ++it) {
    const Vector ap = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw NotSpd(0);
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    rel = r.norm() / bnorm;
    if (rel <= m.tol) return x;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw MaxIterExceeded(rel);
}

}  // namespace

Matrix solve_spd(const SymMatrix& a, const Matrix& b, const SolveConfig& cfg) {
  if (b.rows() != a.size()) throw DimensionMismatch("right-hand side row count does not match system");
  if (const auto* cg = std::get_if<CgMethod>(&cfg.method)) {
    Matrix x(b.rows(), b.cols());
    for (Eigen::Index c = 0; c < b.cols(); ++c) x.col(c) = cg_column(a.matrix(), b.col(c), *cg);
    return x;
  }
  return cholesky_solve(cholesky(a), b);
}

SymEigen sym_eigen(const SymMatrix& sym, Eigen::Index cap) {
  const Eigen::Index n = sym.size();
  if (n > cap) {
    throw CapExceeded("eigendecomposition of order " + std::to_string(n) + " exceeds cap " +
                      std::to_string(cap));
  }
  Matrix a = sym.matrix();
  Matrix v = Matrix::Identity(n, n);
  const double target = 1e-12 * a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > kMaxSweeps) throw Error("Jacobi eigensolver did not converge");
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the (p, q) rotation.
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  SymEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

}  // namespace steinflow
