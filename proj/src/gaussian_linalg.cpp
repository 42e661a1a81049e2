#include "fbmlt/gaussian_linalg.hpp"

#include "fbmlt/error.hpp"
#include "fbmlt/fbm_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbmlt {

ConditionalVariance conditional_variance(const Eigen::MatrixXd& cov, std::size_t target,
                                         std::span<const std::size_t> given) {
  const auto d = static_cast<std::size_t>(cov.rows());
  if (cov.cols() != cov.rows()) throw DomainError("conditional_variance: matrix not square");
  if (target >= d) throw DomainError("conditional_variance: target index out of range");
  for (auto g : given) {
    if (g >= d) throw DomainError("conditional_variance: given index out of range");
    if (g == target) return {0.0, ConditioningStatus::ok};
  }
  const double stt = cov(target, target);
  if (given.empty()) return {std::max(0.0, stt), ConditioningStatus::ok};
  const auto k = static_cast<Eigen::Index>(given.size());
  Eigen::MatrixXd Sgg(k, k);
  Eigen::VectorXd Sgt(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    Sgt[i] = cov(given[i], target);
    for (Eigen::Index j = 0; j < k; ++j) Sgg(i, j) = cov(given[i], given[j]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sgg);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cut = 1e-12 * std::max(ev.maxCoeff(), 0.0);
  ConditioningStatus status = ConditioningStatus::ok;
  const Eigen::VectorXd proj = es.eigenvectors().transpose() * Sgt;
  double explained = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (ev[i] <= cut) {
      status = ConditioningStatus::singular_block;
      continue;
    }
    explained += proj[i] * proj[i] / ev[i];
  }
  return {std::max(0.0, stt - explained), status};
}

ConditionalVariance conditional_variance(const GaussianVectorSpec& spec, std::size_t target,
                                         std::span<const std::size_t> given) {
  return conditional_variance(spec.covariance, target, given);
}

FlipCheck flip_variance_check(const Eigen::MatrixXd& cov, std::size_t A, std::size_t B,
                              std::span<const std::size_t> N) {
  std::vector<std::size_t> na(N.begin(), N.end()), nb(N.begin(), N.end());
  na.push_back(A);
  nb.push_back(B);
  const auto lhs = conditional_variance(cov, B, na);
  const auto a_nb = conditional_variance(cov, A, nb);
  const auto b_n = conditional_variance(cov, B, N);
  const auto a_n = conditional_variance(cov, A, N);
  if (lhs.status != ConditioningStatus::ok || a_nb.status != ConditioningStatus::ok ||
      !(a_n.value > 0.0))
    throw DomainError("flip_variance_check: degenerate Gaussian vector");
  return {lhs.value, a_nb.value * b_n.value / a_n.value};
}

Eigen::MatrixXd fbm_covariance_matrix(double H, std::span<const double> times) {
  const auto m = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd C(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) C(i, j) = C(j, i) = covariance(H, times[i], times[j]);
  return C;
}

double lnd_ratio(double H, double t, std::span<const double> grid) {
  if (!(t > 0.0)) throw DomainError("lnd_ratio: t must be positive");
  if (grid.empty()) throw DomainError("lnd_ratio: grid must be nonempty");
  std::vector<double> times;
  double dmin = std::numeric_limits<double>::infinity();
  for (double s : grid) {
    if (s < 0.0) throw DomainError("lnd_ratio: grid times must be nonnegative");
    const double d = std::abs(t - s);
    if (d == 0.0) throw DomainError("lnd_ratio: t coincides with a grid point");
    dmin = std::min(dmin, d);
    if (s > 0.0) times.push_back(s);
  }
  times.push_back(t);
  const Eigen::MatrixXd C = fbm_covariance_matrix(H, times);
  std::vector<std::size_t> given(times.size() - 1);
  for (std::size_t i = 0; i < given.size(); ++i) given[i] = i;
  const auto cv = conditional_variance(C, times.size() - 1, given);
  return cv.value / std::pow(dmin, 2.0 * H);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw DomainError("psd_sqrt: matrix not square");
  if (M.size() == 0) return M;
  const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("psd_sqrt: matrix is not symmetric");
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  Eigen::VectorXd ev = es.eigenvalues();
  const double tol = 1e-10 * std::max(std::abs(S.trace()), scale);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol) throw DomainError("psd_sqrt: matrix is not positive semidefinite");
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

IncrementDeterminant increment_determinant(double H, double a, double b, double h) {
  if (!(0.0 < a && a < b)) throw DomainError("increment_determinant: need 0 < a < b");
  if (!(h > -a) || h == 0.0) throw DomainError("increment_determinant: need h > -a, h != 0");
  const double gap = b - a;
  if (std::abs(h) == gap) throw DomainError("increment_determinant: |h| == b - a is a boundary");
  // Linear functionals of (B_a, B_{a+h}, B_b, B_{b+h}).
  const double pts[4] = {a, a + h, b, b + h};
  Eigen::Matrix4d P;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) P(i, j) = covariance(H, pts[i], pts[j]);
  Eigen::Matrix4d L = Eigen::Matrix4d::Zero();  // rows: B_a, B_b, Da, Db
  L(0, 0) = 1;
  L(1, 2) = 1;
  L(2, 1) = 1, L(2, 0) = -1;
  L(3, 3) = 1, L(3, 2) = -1;
  const Eigen::Matrix4d C = L * P * L.transpose();

  IncrementDeterminant out;
  const std::size_t inc[2] = {2, 3};
  const std::size_t inc_a[3] = {2, 3, 0};
  const auto v1 = conditional_variance(C, 0, inc);
  const auto v2 = conditional_variance(C, 1, inc_a);
  out.conditional_product = v1.value * v2.value;
  out.increment_det = C(2, 2) * C(3, 3) - C(2, 3) * C(2, 3);
  const double h2 = 2.0 * H;
  if (h > 0.0 && h < gap) {
    out.case_branch = 1;
    out.bound_shape = std::pow(a, h2) * std::pow(gap - h, h2);
  } else if (h > gap) {
    out.case_branch = 2;
    out.bound_shape = std::pow(a, h2) * std::pow(std::min(h - gap, gap), h2);
  } else if (-h < gap) {
    out.case_branch = 3;
    out.bound_shape = std::pow(a + h, h2) * std::pow(std::min(gap + h, -h), h2);
  } else {
    out.case_branch = 4;
    out.bound_shape = std::pow(a + h, h2) * std::pow(std::min(-h - gap, gap), h2);
  }
  return out;
}

}  // namespace fbmlt
