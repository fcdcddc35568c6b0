#pragma once

#include <cmath>

#include <Eigen/Core>

#include "scw/core.hpp"
#include "scw/probit.hpp"

namespace scw {

// Slack kept between beta*v and 1 when a downdate must be clamped.
inline constexpr double kPsdEpsilon = 1e-10;

/// Sigma * x restricted to the sparse support of x, returned dense.
inline Eigen::VectorXd sigma_times(const GaussianState& state, const Example& x) {
  check_dims(state, x);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(state.dim());
  if (state.mode == CovMode::Full) {
    for (const Feature& f : x.features) out.noalias() += f.value * state.cov.col(f.index);
  } else {
    for (const Feature& f : x.features) out[f.index] = state.var[f.index] * f.value;
  }
  return out;
}

/// x' Sigma x. Positive for SPD Sigma and x != 0.
inline double quad_form(const GaussianState& state, const Example& x) {
  check_dims(state, x);
  if (x.is_zero()) throw InputError("quad_form: x must be nonzero");
  if (state.mode == CovMode::Diagonal) {
    double s = 0.0;
    for (const Feature& f : x.features) s += state.var[f.index] * f.value * f.value;
    return s;
  }
  double s = 0.0;
  for (const Feature& fi : x.features) {
    double row = 0.0;
    for (const Feature& fj : x.features) row += state.cov(fi.index, fj.index) * fj.value;
    s += fi.value * row;
  }
  return s;
}

namespace detail {

// Rank-1 downdate given sx = Sigma*x and v = x'Sigma x. Clamps beta when
// beta*v >= 1 would break positive definiteness, counting the event.
inline void cov_downdate_impl(GaussianState& state, const Example& x,
                              const Eigen::VectorXd& sx, double v, double beta,
                              Diagnostics* diag) {
  if (beta < 0.0 || !std::isfinite(beta)) {
    throw InputError("cov_downdate: beta must be finite and >= 0");
  }
  if (beta == 0.0) return;
  if (beta * v >= 1.0) {
    beta = (1.0 - kPsdEpsilon) / v;
    if (diag) ++diag->clamp_events;
  }
  if (state.mode == CovMode::Full) {
    const Eigen::Index d = state.dim();
    state.cov.selfadjointView<Eigen::Lower>().rankUpdate(sx, -beta);
    // Mirror the lower triangle so storage stays bitwise symmetric.
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = j + 1; i < d; ++i) state.cov(j, i) = state.cov(i, j);
    }
  } else {
    for (const Feature& f : x.features) {
      const double s = sx[f.index];
      state.var[f.index] -= beta * s * s;
    }
  }
}

}  // namespace detail

/// Sigma <- Sigma - beta * (Sigma x)(Sigma x)'. Diagonal mode drops the
/// off-diagonal mass and touches only the support of x.
inline void cov_downdate(GaussianState& state, const Example& x, double beta,
                         Diagnostics* diag = nullptr) {
  if (beta == 0.0) return;
  const Eigen::VectorXd sx = sigma_times(state, x);
  const double v = quad_form(state, x);
  detail::cov_downdate_impl(state, x, sx, v, beta, diag);
}

}  // namespace scw
