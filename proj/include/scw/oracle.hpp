#pragma once

// Numeric reference minimizer for the SCW objectives. Test-only: nothing in
// the library proper includes this header, and nothing here touches the
// closed-form coefficient rules it is used to check.
//
// Both objectives are minimized along the dual path. For a multiplier tau,
// stationarity of the Lagrangian fixes the primal candidate
//   mu(tau)    = mu_t + tau y Sigma_t x
//   Sigma(tau) = (Sigma_t^{-1} + (tau phi / sqrt(u)) x x')^{-1}
// where u = x' Sigma(tau) x solves a scalar fixed-point equation (found here
// by bisection, not by its quadratic root). The true objective (KL plus
// penalty, evaluated with dense linear algebra) is then minimized over tau
// by a dense scan and golden-section refinement.

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include "scw/core.hpp"

namespace scw::oracle {

enum class ObjectiveKind { ScwI, ScwII };

struct Solution {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double objective = 0.0;
  double tau = 0.0;
};

inline Eigen::VectorXd to_dense(const Example& x, Eigen::Index d) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (const Feature& f : x.features) out[f.index] = f.value;
  return out;
}

/// KL(N(mu, sigma) || N(mu0, sigma0)) for SPD covariances.
inline double gaussian_kl(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                          const Eigen::VectorXd& mu0, const Eigen::MatrixXd& sigma0) {
  const Eigen::Index d = mu.size();
  const Eigen::LLT<Eigen::MatrixXd> llt0(sigma0);
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt0.info() != Eigen::Success || llt.info() != Eigen::Success) {
    throw InputError("gaussian_kl: covariance not positive definite");
  }
  auto logdet = [](const Eigen::LLT<Eigen::MatrixXd>& f) {
    double s = 0.0;
    const auto& L = f.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
    return 2.0 * s;
  };
  const Eigen::MatrixXd sol = llt0.solve(sigma);
  const Eigen::VectorXd delta = mu0 - mu;
  return 0.5 * (logdet(llt0) - logdet(llt) + sol.trace() +
                delta.dot(llt0.solve(delta)) - static_cast<double>(d));
}

inline double phi_hinge(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                        const Eigen::VectorXd& x, int y, double phi) {
  return std::max(0.0, phi * std::sqrt(x.dot(sigma * x)) - y * mu.dot(x));
}

namespace detail {

// Positive root of s^2 + (tau phi v) s - v = 0 by bisection on (0, sqrt(v)].
inline double sqrt_u_bisect(double tau, double phi, double v) {
  if (tau == 0.0) return std::sqrt(v);
  auto g = [&](double s) { return s * s + tau * phi * v * s - v; };
  double lo = 0.0, hi = std::sqrt(v);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-17 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Exact-objective evaluation along the dual path; shared with the tests so
/// closed-form and oracle solutions are scored identically.
class DualPathObjective {
 public:
  DualPathObjective(ObjectiveKind kind, const GaussianState& state, const Example& x,
                    int y, const HyperParams& params)
      : kind_(kind),
        c_(params.c),
        phi_(params.phi),
        y_(y),
        mu0_(state.mean),
        sigma0_(state.cov),
        x_(to_dense(x, state.dim())),
        llt0_(state.cov) {
    if (state.mode != CovMode::Full) {
      throw InputError("oracle: full covariance mode required");
    }
    if (llt0_.info() != Eigen::Success) {
      throw InputError("oracle: covariance not positive definite");
    }
    sigma0_x_ = sigma0_ * x_;
    v_ = x_.dot(sigma0_x_);
    if (!(v_ > 0.0)) throw InputError("oracle: x must be nonzero");
  }

  double v() const { return v_; }

  Eigen::VectorXd mu_at(double tau) const { return mu0_ + (tau * y_) * sigma0_x_; }

  Eigen::MatrixXd sigma_at(double tau) const {
    if (tau == 0.0) return sigma0_;
    const double su = detail::sqrt_u_bisect(tau, phi_, v_);
    const Eigen::MatrixXd precision =
        llt0_.solve(Eigen::MatrixXd::Identity(x_.size(), x_.size())) +
        (tau * phi_ / su) * (x_ * x_.transpose());
    return precision.fullPivLu().inverse();
  }

  double penalty(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) const {
    const double loss = phi_hinge(mu, sigma, x_, y_, phi_);
    return kind_ == ObjectiveKind::ScwI ? c_ * loss : c_ * loss * loss;
  }

  /// Full objective (KL + penalty) at an arbitrary primal point.
  double objective_at(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) const {
    return gaussian_kl(mu, sigma, mu0_, sigma0_) + penalty(mu, sigma);
  }

  double objective_on_path(double tau) const {
    return objective_at(mu_at(tau), sigma_at(tau));
  }

  /// phi-hinge loss of the path candidate at tau.
  double path_loss(double tau) const {
    const Eigen::VectorXd mu = mu_at(tau);
    const Eigen::MatrixXd sigma = sigma_at(tau);
    return phi_hinge(mu, sigma, x_, y_, phi_);
  }

 private:
  ObjectiveKind kind_;
  double c_;
  double phi_;
  int y_;
  Eigen::VectorXd mu0_;
  Eigen::MatrixXd sigma0_;
  Eigen::VectorXd x_;
  Eigen::LLT<Eigen::MatrixXd> llt0_;
  Eigen::VectorXd sigma0_x_;
  double v_ = 0.0;
};

/// Minimizes the Eq. 4 (ScwI) or Eq. 5 (ScwII) objective numerically.
/// Intended for d <= 5; the scan plus golden-section refinement resolves the
/// minimum to well below 1e-9 in objective value.
inline Solution minimize(ObjectiveKind kind, const GaussianState& state, const Example& x,
                         int y, const HyperParams& params) {
  DualPathObjective problem(kind, state, x, y, params);

  // Upper end of the search interval: C for the linear penalty; for the
  // squared penalty, grow until the path loss hits zero (loss decreases in
  // tau and the objective only grows past that point).
  double hi;
  if (kind == ObjectiveKind::ScwI) {
    hi = params.c;
  } else {
    hi = 1.0;
    while (problem.path_loss(hi) > 0.0 && hi < 1e12) hi *= 2.0;
  }

  const int kScan = 1024;
  double best_tau = 0.0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double tau = hi * static_cast<double>(i) / kScan;
    const double obj = problem.objective_on_path(tau);
    if (obj < best_obj) {
      best_obj = obj;
      best_tau = tau;
    }
  }

  // Golden-section refinement inside the bracketing neighbours.
  const double step = hi / kScan;
  double lo = std::max(0.0, best_tau - step);
  double up = std::min(hi, best_tau + step);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = up - gr * (up - lo);
  double c2 = lo + gr * (up - lo);
  double f1 = problem.objective_on_path(c1);
  double f2 = problem.objective_on_path(c2);
  for (int i = 0; i < 200 && (up - lo) > 1e-15 * std::max(1.0, hi); ++i) {
    if (f1 < f2) {
      up = c2;
      c2 = c1;
      f2 = f1;
      c1 = up - gr * (up - lo);
      f1 = problem.objective_on_path(c1);
    } else {
      lo = c1;
      c1 = c2;
      f1 = f2;
      c2 = lo + gr * (up - lo);
      f2 = problem.objective_on_path(c2);
    }
  }
  const double tau_mid = 0.5 * (lo + up);
  const double f_mid = problem.objective_on_path(tau_mid);
  if (f_mid < best_obj) {
    best_obj = f_mid;
    best_tau = tau_mid;
  }

  Solution sol;
  sol.tau = best_tau;
  sol.mu = problem.mu_at(best_tau);
  sol.sigma = problem.sigma_at(best_tau);
  sol.objective = best_obj;
  return sol;
}

}  // namespace scw::oracle
