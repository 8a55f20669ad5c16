#include "evmt/lfdr.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace evmt {

namespace {

constexpr int kScreenIterations = 20;

// log(logistic(eta)) without overflow.
double log_sigmoid(double eta) {
  return eta >= 0 ? -std::log1p(std::exp(-eta)) : eta - std::log1p(std::exp(eta));
}

Vector neg_log_p(const Vector& p) {
  return p.unaryExpr([](double v) { return -std::log(std::max(v, kMinP)); });
}

// Log-likelihood; also stores the posterior null probabilities in r.
double evaluate(const Vector& L, const Matrix& Z, const Vector& bpi,
                const Vector& bk, Vector* r = nullptr) {
  const Vector eta_pi = Z * bpi;
  const Vector eta_k = Z * bk;
  if (r) r->resize(L.size());
  double ll = 0.0;
  for (Index i = 0; i < L.size(); ++i) {
    const double pi = logistic(eta_pi[i]);
    const double k = logistic(eta_k[i]);
    const double f = pi + (1.0 - pi) * (1.0 - k) * std::exp(k * L[i]);
    ll += std::log(f);
    if (r) (*r)[i] = pi / f;
  }
  return ll;
}

// Solves H d = g for a positive semidefinite H with a tiny ridge.
Vector solve_psd(Matrix H, const Vector& g) {
  const double ridge = 1e-10 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
  H.diagonal().array() += ridge;
  return H.ldlt().solve(g);
}

template <class Objective>
bool backtrack(Vector& beta, const Vector& dir, double q0, Objective&& q) {
  double step = 1.0;
  for (int h = 0; h < 40; ++h, step *= 0.5) {
    const Vector cand = beta + step * dir;
    if (q(cand) >= q0) {
      beta = cand;
      return true;
    }
  }
  return false;
}

// One damped Newton step on sum r log pi + (1 - r) log(1 - pi).
void mstep_pi(const Matrix& Z, const Vector& r, Vector& beta) {
  const auto q = [&](const Vector& b) {
    const Vector eta = Z * b;
    double s = 0.0;
    for (Index i = 0; i < eta.size(); ++i)
      s += r[i] * log_sigmoid(eta[i]) + (1.0 - r[i]) * log_sigmoid(-eta[i]);
    return s;
  };
  const Vector eta = Z * beta;
  const Vector pi = eta.unaryExpr([](double e) { return logistic(e); });
  const Vector grad = Z.transpose() * (r - pi);
  const Vector w = pi.cwiseProduct((1.0 - pi.array()).matrix());
  const Vector dir = solve_psd(Z.transpose() * w.asDiagonal() * Z, grad);
  if (dir.allFinite() && dir.lpNorm<Eigen::Infinity>() >= 1e-9)
    backtrack(beta, dir, q(beta), q);
}

// One damped Newton step on sum w [log(1 - kappa) + kappa L].
void mstep_kappa(const Matrix& Z, const Vector& w, const Vector& L,
                 Vector& beta) {
  const auto q = [&](const Vector& b) {
    const Vector eta = Z * b;
    double s = 0.0;
    for (Index i = 0; i < eta.size(); ++i)
      s += w[i] * (log_sigmoid(-eta[i]) + logistic(eta[i]) * L[i]);
    return s;
  };
  const Vector eta = Z * beta;
  Vector g(eta.size()), h(eta.size());
  for (Index i = 0; i < eta.size(); ++i) {
    const double k = logistic(eta[i]);
    g[i] = w[i] * k * ((1.0 - k) * L[i] - 1.0);
    // Curvature magnitude; the true Hessian can be indefinite.
    h[i] = std::abs(w[i] * k * (1.0 - k) * ((1.0 - 2.0 * k) * L[i] - 1.0)) +
           1e-8 * w[i];
  }
  const Vector dir = solve_psd(Z.transpose() * h.asDiagonal() * Z, Z.transpose() * g);
  if (dir.allFinite() && dir.lpNorm<Eigen::Infinity>() >= 1e-9)
    backtrack(beta, dir, q(beta), q);
}

// Gradient of the observed log-likelihood in (beta_pi, beta_kappa).
Vector loglik_gradient(const Vector& L, const Matrix& Z, const Vector& beta) {
  const Index k = Z.cols();
  const Vector eta_pi = Z * beta.head(k);
  const Vector eta_k = Z * beta.tail(k);
  Vector gp(L.size()), gk(L.size());
  for (Index i = 0; i < L.size(); ++i) {
    const double pi = logistic(eta_pi[i]);
    const double kap = logistic(eta_k[i]);
    const double g = (1.0 - kap) * std::exp(kap * L[i]);
    const double f = pi + (1.0 - pi) * g;
    gp[i] = pi * (1.0 - pi) * (1.0 - g) / f;
    gk[i] = (1.0 - pi) * g * kap * ((1.0 - kap) * L[i] - 1.0) / f;
  }
  Vector out(2 * k);
  out.head(k) = Z.transpose() * gp;
  out.tail(k) = Z.transpose() * gk;
  return out;
}

// Newton iterations on the observed log-likelihood from the EM solution.
// Negative curvature directions are flipped so every step ascends.
void newton_polish(const Vector& L, const Matrix& Z, LfdrModel& m) {
  const Index k = Z.cols();
  Vector beta(2 * k);
  beta << m.beta_pi, m.beta_kappa;
  const auto q = [&](const Vector& b) {
    return evaluate(L, Z, b.head(k), b.tail(k));
  };
  double ll = m.loglik;
  for (int it = 0; it < 50; ++it) {
    const Vector grad = loglik_gradient(L, Z, beta);
    if (!grad.allFinite() || grad.lpNorm<Eigen::Infinity>() < 1e-10) break;
    Matrix H(2 * k, 2 * k);
    for (Index c = 0; c < 2 * k; ++c) {
      const double h = 1e-5 * std::max(1.0, std::abs(beta[c]));
      Vector up = beta, dn = beta;
      up[c] += h;
      dn[c] -= h;
      H.col(c) = (loglik_gradient(L, Z, up) - loglik_gradient(L, Z, dn)) / (2.0 * h);
    }
    const Matrix S = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(-S);
    if (eig.info() != Eigen::Success) break;
    const double floor = 1e-8 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    const Vector inv = eig.eigenvalues().unaryExpr(
        [&](double v) { return 1.0 / std::max(std::abs(v), floor); });
    Vector dir = eig.eigenvectors() * inv.asDiagonal() *
                 (eig.eigenvectors().transpose() * grad);
    // Cap the step so a flat ridge cannot send the parameters to infinity.
    const double len = dir.lpNorm<Eigen::Infinity>();
    if (len > 5.0) dir *= 5.0 / len;
    if (!dir.allFinite() || !backtrack(beta, dir, ll, q)) break;
    const double next = q(beta);
    const bool done = next - ll <= 1e-12 * std::max(1.0, std::abs(ll));
    ll = next;
    if (done) break;
  }
  m.beta_pi = beta.head(k);
  m.beta_kappa = beta.tail(k);
  m.loglik = ll;
}

LfdrModel run_em(const Vector& L, const Matrix& Z, Vector bpi, Vector bk,
                 int iterations, double tolerance, bool polish) {
  LfdrModel m;
  Vector r;
  double ll = evaluate(L, Z, bpi, bk, &r);
  int it = 0;
  for (; it < iterations; ++it) {
    mstep_pi(Z, r, bpi);
    mstep_kappa(Z, (1.0 - r.array()).matrix(), L, bk);
    const double next = evaluate(L, Z, bpi, bk, &r);
    const bool done = std::abs(next - ll) <= tolerance * std::max(1.0, std::abs(ll));
    ll = next;
    if (done) {
      m.converged = true;
      ++it;
      break;
    }
  }
  m.beta_pi = std::move(bpi);
  m.beta_kappa = std::move(bk);
  m.loglik = ll;
  m.iterations = it;
  if (polish) newton_polish(L, Z, m);
  return m;
}

}  // namespace

CovariateSet::CovariateSet(Matrix rows) : x_(std::move(rows)) {
  if (!x_.allFinite()) throw InputError("covariates must be finite");
}

Matrix CovariateSet::design() const {
  Matrix z(x_.rows(), x_.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x_.cols()) = x_;
  return z;
}

CovariateSet CovariateSet::subset(const std::vector<Index>& idx) const {
  return CovariateSet(x_(idx, Eigen::all));
}

RejectionFunction::RejectionFunction(double pi, double kappa)
    : pi_(pi), kappa_(kappa) {
  if (!(pi > 0.0 && pi < 1.0) || !(kappa > 0.0 && kappa < 1.0))
    throw ConfigError("rejection function parameters must lie in (0, 1)");
}

double RejectionFunction::operator()(double p) const {
  const double q = std::max(p, kMinP);
  return pi_ / (pi_ + (1.0 - pi_) * (1.0 - kappa_) * std::pow(q, -kappa_));
}

double LfdrModel::pi(const Eigen::Ref<const Eigen::RowVectorXd>& z) const {
  return std::clamp(logistic(z.dot(beta_pi)), eps1, 1.0 - eps2);
}

double LfdrModel::kappa(const Eigen::Ref<const Eigen::RowVectorXd>& z) const {
  // Keep kappa strictly inside (0, 1) in floating point.
  return std::clamp(logistic(z.dot(beta_kappa)), 1e-12, 1.0 - 1e-12);
}

RejectionFunction LfdrModel::rejection_function(
    const Eigen::Ref<const Eigen::RowVectorXd>& z) const {
  return RejectionFunction(pi(z), kappa(z));
}

double pseudo_loglik(const Vector& p, const Matrix& design,
                     const Vector& beta_pi, const Vector& beta_kappa) {
  return evaluate(neg_log_p(p), design, beta_pi, beta_kappa);
}

LfdrModel fit_lfdr_em(const PValueSet& pvals, const CovariateSet& covars,
                      const EmOptions& options, const LfdrModel* warm) {
  const Index n = pvals.size();
  const Index d = covars.dim();
  if (covars.size() != n)
    throw InputError("covariate rows do not match the number of p-values");
  if (n < 2 * (d + 1))
    throw ConfigError("too few hypotheses for the EM fit: need n >= 2(d+1)");
  if (options.max_iterations < 1 || !(options.tolerance > 0.0))
    throw ConfigError("EM iteration limit and tolerance must be positive");

  const Vector L = neg_log_p(pvals.values());
  const Matrix Z = covars.design();

  if (warm) {
    if (warm->beta_pi.size() != d + 1 || warm->beta_kappa.size() != d + 1)
      throw ConfigError("warm start has the wrong dimension");
    auto m = run_em(L, Z, warm->beta_pi, warm->beta_kappa, options.max_iterations,
                    options.tolerance, true);
    m.eps1 = warm->eps1;
    m.eps2 = warm->eps2;
    return m;
  }

  // Every start gets a short screening run; the best one is run to the end.
  const int screen = std::min(kScreenIterations, options.max_iterations);
  Vector bpi = Vector::Zero(d + 1);
  Vector bk = Vector::Zero(d + 1);
  bpi[0] = std::log(0.9 / 0.1);
  LfdrModel best = run_em(L, Z, bpi, bk, screen, options.tolerance, false);

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> u_pi(0.6, 0.99), u_k(0.1, 0.9);
  std::normal_distribution<double> slope(0.0, 0.5);
  for (int r = 0; r < options.restarts; ++r) {
    const double p0 = u_pi(rng), k0 = u_k(rng);
    bpi[0] = std::log(p0 / (1.0 - p0));
    bk[0] = std::log(k0 / (1.0 - k0));
    for (Index j = 1; j <= d; ++j) {
      bpi[j] = slope(rng);
      bk[j] = slope(rng);
    }
    auto m = run_em(L, Z, bpi, bk, screen, options.tolerance, false);
    if (m.loglik > best.loglik) best = std::move(m);
  }
  if (best.converged) {
    newton_polish(L, Z, best);
    return best;
  }
  auto m = run_em(L, Z, best.beta_pi, best.beta_kappa,
                  options.max_iterations - best.iterations, options.tolerance, true);
  m.iterations += best.iterations;
  return m;
}

}  // namespace evmt
