#ifndef EVMT_LFDR_HPP
#define EVMT_LFDR_HPP

#include "evmt/types.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace evmt {

/// n rows of d finite covariates (d may be 0).
class CovariateSet {
 public:
  explicit CovariateSet(Matrix rows);
  static CovariateSet empty(Index n) { return CovariateSet(Matrix(n, 0)); }

  Index size() const noexcept { return x_.rows(); }
  Index dim() const noexcept { return x_.cols(); }
  const Matrix& rows() const noexcept { return x_; }
  /// [1, x_i] for every row.
  Matrix design() const;
  CovariateSet subset(const std::vector<Index>& idx) const;

 private:
  Matrix x_;
};

inline double logistic(double eta) {
  return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta))
                  : std::exp(eta) / (1.0 + std::exp(eta));
}

/// Smallest p-value used inside p^{-kappa}.
inline constexpr double kMinP = 1e-15;

/// phi(p) = pi / (pi + (1 - pi)(1 - kappa) p^{-kappa}); increasing in p.
class RejectionFunction {
 public:
  RejectionFunction() = default;
  RejectionFunction(double pi, double kappa);

  double operator()(double p) const;
  double pi() const noexcept { return pi_; }
  double kappa() const noexcept { return kappa_; }

 private:
  double pi_ = 0.5;
  double kappa_ = 0.5;
};

/// Two-group beta-type mixture with logistic links on [1, x]:
///   pi(x) = logistic(beta_pi . z),  kappa(x) = logistic(beta_kappa . z).
struct LfdrModel {
  Vector beta_pi;
  Vector beta_kappa;
  double eps1 = 0.1;
  double eps2 = 1e-5;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;

  /// Winsorized to [eps1, 1 - eps2].
  double pi(const Eigen::Ref<const Eigen::RowVectorXd>& z) const;
  double kappa(const Eigen::Ref<const Eigen::RowVectorXd>& z) const;
  RejectionFunction rejection_function(
      const Eigen::Ref<const Eigen::RowVectorXd>& z) const;
};

struct EmOptions {
  int max_iterations = 200;
  double tolerance = 1e-6;  // relative log-likelihood change
  int restarts = 5;
  std::uint64_t seed = 1;
};

/// sum_i log(pi_i + (1 - pi_i)(1 - kappa_i) p_i^{-kappa_i}), unwinsorized.
double pseudo_loglik(const Vector& p, const Matrix& design,
                     const Vector& beta_pi, const Vector& beta_kappa);

/// EM fit of the working model. `warm` replaces the default start and
/// suppresses random restarts.
LfdrModel fit_lfdr_em(const PValueSet& pvals, const CovariateSet& covars,
                      const EmOptions& options = {},
                      const LfdrModel* warm = nullptr);

}  // namespace evmt

#endif  // EVMT_LFDR_HPP
