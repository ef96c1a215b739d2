#include "steinflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "steinflow/errors.hpp"

namespace steinflow {

namespace {

void check_dims(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("kernel arguments have dimensions " + std::to_string(x.size()) +
                            " and " + std::to_string(y.size()));
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

KernelSpec KernelSpec::gaussian(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InvalidArgument("gaussian kernel bandwidth must be positive and finite");
  }
  return KernelSpec(GaussianKernel{bandwidth});
}

KernelSpec KernelSpec::linear() { return KernelSpec(LinearKernel{}); }

double KernelSpec::bandwidth() const {
  if (const auto* g = std::get_if<GaussianKernel>(&family_)) return g->bandwidth;
  throw InvalidArgument("linear kernel has no bandwidth");
}

bool operator==(const KernelSpec& a, const KernelSpec& b) {
  if (a.is_gaussian() != b.is_gaussian()) return false;
  return a.is_linear() || a.bandwidth() == b.bandwidth();
}

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y) {
  check_dims(x, y);
  return std::visit(Overloaded{
                        [&](const GaussianKernel& g) {
                          return std::exp(-(x - y).squaredNorm() / g.bandwidth);
                        },
                        [&](const LinearKernel&) { return x.dot(y) + 1.0; },
                    },
                    spec.family());
}

Vector kernel_grad1(const KernelSpec& spec, const Vector& x, const Vector& y) {
  return kernel_grad1(spec, x, y, kernel_eval(spec, x, y));
}

Vector kernel_grad1(const KernelSpec& spec, const Vector& x, const Vector& y, double kxy) {
  check_dims(x, y);
  return std::visit(Overloaded{
                        [&](const GaussianKernel& g) -> Vector {
                          return (-2.0 / g.bandwidth * kxy) * (x - y);
                        },
                        [&](const LinearKernel&) -> Vector { return y; },
                    },
                    spec.family());
}

Matrix kernel_grad12(const KernelSpec& spec, const Vector& x, const Vector& y) {
  check_dims(x, y);
  const auto d = x.size();
  return std::visit(Overloaded{
                        [&](const GaussianKernel& g) -> Matrix {
                          const double k = kernel_eval(spec, x, y);
                          const Vector diff = x - y;
                          Matrix out = (-4.0 / (g.bandwidth * g.bandwidth) * k) * diff * diff.transpose();
                          out.diagonal().array() += 2.0 / g.bandwidth * k;
                          return out;
                        },
                        [&](const LinearKernel&) -> Matrix { return Matrix::Identity(d, d); },
                    },
                    spec.family());
}

GramMatrix::GramMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw DimensionMismatch("Gram matrix must be square");
}

GramMatrix gram(const KernelSpec& spec, const Matrix& positions) {
  const Eigen::Index n = positions.rows();
  if (n < 1) throw InsufficientParticles("Gram matrix needs at least one particle");
  Matrix k(n, n);
  if (spec.is_gaussian()) {
    const double inv_bw = 1.0 / spec.bandwidth();
    for (Eigen::Index i = 0; i < n; ++i) {
      k(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = std::exp(-(positions.row(i) - positions.row(j)).squaredNorm() * inv_bw);
        k(i, j) = v;
        k(j, i) = v;
      }
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const double v = positions.row(i).dot(positions.row(j)) + 1.0;
        k(i, j) = v;
        k(j, i) = v;
      }
    }
  }
  return GramMatrix(std::move(k));
}

double median_heuristic(const Matrix& positions) {
  const Eigen::Index n = positions.rows();
  if (n < 2) throw InsufficientParticles("median heuristic needs at least two particles");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back((positions.row(i) - positions.row(j)).norm());
    }
  }
  const std::size_t m = dist.size();
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  double med = *mid;
  if (m % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), mid);
    med = 0.5 * (lower + med);
  }
  if (!(med > 0.0)) throw DegenerateEnsemble("median pairwise distance is zero");
  return med * med / std::log(static_cast<double>(n));
}

}  // namespace steinflow
