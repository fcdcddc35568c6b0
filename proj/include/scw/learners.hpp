#pragma once

#include <cmath>

#include <Eigen/Core>

#include "scw/core.hpp"
#include "scw/numeric.hpp"

namespace scw {

/// Margin quantities shared by every update rule.
struct MarginStats {
  double v = 0.0;           // x' Sigma x
  double m = 0.0;           // y (mu . x)
  double loss_hinge = 0.0;  // max(0, 1 - m)
  double loss_phi = 0.0;    // max(0, phi sqrt(v) - m)
};

inline MarginStats margin_stats(const GaussianState& state, const Example& x, int y,
                                const HyperParams& params) {
  if (x.is_zero()) throw InputError("margin_stats: x must be nonzero");
  MarginStats s;
  s.v = quad_form(state, x);
  s.m = y * sparse_dot(state.mean, x);
  s.loss_hinge = std::max(0.0, 1.0 - s.m);
  s.loss_phi = std::max(0.0, params.phi * std::sqrt(s.v) - s.m);
  if (!std::isfinite(s.v) || !std::isfinite(s.m)) {
    throw NumericError("margin_stats: non-finite margin");
  }
  return s;
}

enum class PaKind { PA, PAI, PAII };

/// Step size for the passive-aggressive family. The weight update is
/// w <- w + eta_t y x.
inline double pa_coefficient(PaKind kind, const MarginStats& stats, const Example& x,
                             double c) {
  const double nsq = x.norm_sq();
  if (nsq <= 0.0) throw InputError("pa_coefficient: x must be nonzero");
  if (stats.loss_hinge <= 0.0) return 0.0;
  switch (kind) {
    case PaKind::PA:
      return stats.loss_hinge / nsq;
    case PaKind::PAI:
      if (!(c > 0.0)) throw InputError("pa_coefficient: C must be positive");
      return std::min(c, stats.loss_hinge / nsq);
    case PaKind::PAII:
      if (!(c > 0.0)) throw InputError("pa_coefficient: C must be positive");
      return stats.loss_hinge / (nsq + 1.0 / (2.0 * c));
  }
  return 0.0;
}

namespace detail {

// Floors tiny negative sqrt arguments produced by rounding. The closed forms
// guarantee nonnegative arguments analytically.
inline double safe_sqrt(double arg, Diagnostics* diag) {
  if (arg < 0.0) {
    if (diag && arg < -1e-9) ++diag->floor_events;
    arg = 0.0;
  }
  return std::sqrt(arg);
}

// sqrt(u_t) for a given alpha: the positive root of s^2 + alpha*phi*v*s - v,
// evaluated in the cancellation-free form 2v / (a v phi + sqrt(a^2 v^2 phi^2 + 4v)).
inline double sqrt_u(double alpha, double v, double phi, Diagnostics* diag) {
  const double avp = alpha * v * phi;
  return 2.0 * v / (avp + safe_sqrt(avp * avp + 4.0 * v, diag));
}

inline void finish_second_order(UpdateCoefficients& c, double phi, Diagnostics* diag) {
  const double su = sqrt_u(c.alpha, c.v, phi, diag);
  c.u = su * su;
  c.beta = c.alpha * phi / (su + c.v * c.alpha * phi);
}

}  // namespace detail

/// CW coefficients: alpha from the probit-margin constraint, then u and beta
/// in that order (u depends on alpha, beta on u).
inline UpdateCoefficients cw_coefficients(const MarginStats& stats,
                                          const HyperParams& params,
                                          Diagnostics* diag = nullptr) {
  if (!(stats.v > 0.0)) throw InputError("cw_coefficients: v must be positive");
  const double v = stats.v;
  const double m = stats.m;
  const double phi = params.phi;
  const double psi = params.psi;
  const double zeta = params.zeta;

  UpdateCoefficients c;
  c.v = v;
  c.m = m;
  // Discriminant m^2 phi^4/4 + v phi^2 zeta, rewritten as m^2 psi^2 +
  // zeta (phi^2 v - m^2) to expose the conjugate form used for m > 0.
  const double arg = m * m * (phi * phi * phi * phi) / 4.0 + v * phi * phi * zeta;
  double alpha;
  if (m > 0.0) {
    // Conjugate form avoids cancellation near the constraint boundary.
    alpha = (phi * phi * v - m * m) / (v * (m * psi + detail::safe_sqrt(arg, diag)));
  } else {
    alpha = (-m * psi + detail::safe_sqrt(arg, diag)) / (v * zeta);
  }
  c.alpha = std::max(0.0, alpha);
  detail::finish_second_order(c, phi, diag);
  if (!std::isfinite(c.alpha) || !std::isfinite(c.beta)) {
    throw NumericError("cw_coefficients: non-finite coefficients");
  }
  return c;
}

/// SCW-I: the CW coefficient clamped above by C, with u and beta recomputed
/// from the clamped alpha.
inline UpdateCoefficients scw1_coefficients(const MarginStats& stats,
                                            const HyperParams& params,
                                            Diagnostics* diag = nullptr) {
  UpdateCoefficients c = cw_coefficients(stats, params, diag);
  if (c.alpha > params.c) {
    c.alpha = params.c;
    detail::finish_second_order(c, params.phi, diag);
  }
  return c;
}

/// SCW-II: squared-penalty coefficients; alpha has no upper clamp.
inline UpdateCoefficients scw2_coefficients(const MarginStats& stats,
                                            const HyperParams& params,
                                            Diagnostics* diag = nullptr) {
  if (!(stats.v > 0.0)) throw InputError("scw2_coefficients: v must be positive");
  const double v = stats.v;
  const double m = stats.m;
  const double phi = params.phi;

  UpdateCoefficients c;
  c.v = v;
  c.m = m;
  c.n = v + 1.0 / (2.0 * params.c);
  c.gamma =
      phi * detail::safe_sqrt(phi * phi * m * m * v * v + 4.0 * c.n * v * (c.n + v * phi * phi),
                              diag);
  const double denom = 2.0 * (c.n * c.n + c.n * v * phi * phi);
  c.alpha = std::max(0.0, (-(2.0 * m * c.n + phi * phi * m * v) + c.gamma) / denom);
  detail::finish_second_order(c, phi, diag);
  if (!std::isfinite(c.alpha) || !std::isfinite(c.beta)) {
    throw NumericError("scw2_coefficients: non-finite coefficients");
  }
  return c;
}

/// AROW coefficients: beta = 1/(v + r), alpha = hinge loss * beta.
inline UpdateCoefficients arow_coefficients(const MarginStats& stats,
                                            const HyperParams& params) {
  if (!(stats.v > 0.0)) throw InputError("arow_coefficients: v must be positive");
  if (!(params.r > 0.0)) throw InputError("arow_coefficients: r must be positive");
  UpdateCoefficients c;
  c.v = stats.v;
  c.m = stats.m;
  c.beta = 1.0 / (stats.v + params.r);
  c.alpha = stats.loss_hinge * c.beta;
  c.u = stats.v - c.beta * stats.v * stats.v;
  return c;
}

/// mu <- mu + alpha y Sigma x; Sigma <- Sigma - beta Sigma x x' Sigma.
/// Both use the pre-update Sigma.
inline void apply_second_order_update(GaussianState& state, const Example& x, int y,
                                      const UpdateCoefficients& coeffs,
                                      Diagnostics* diag = nullptr) {
  const Eigen::VectorXd sx = sigma_times(state, x);
  state.mean.noalias() += (coeffs.alpha * y) * sx;
  detail::cov_downdate_impl(state, x, sx, coeffs.v, coeffs.beta, diag);
}

/// A single online learner: one update rule plus its Gaussian state.
///
/// Instances are single-threaded state machines; distinct instances share
/// nothing and may live on different threads.
class Learner {
 public:
  Learner(LearnerKind kind, const HyperParams& params, Eigen::Index dim, CovMode mode)
      : kind_(kind), params_(params), state_(GaussianState::identity(dim, mode)) {}

  LearnerKind kind() const { return kind_; }
  const HyperParams& params() const { return params_; }
  const GaussianState& state() const { return state_; }
  GaussianState& state() { return state_; }
  const Diagnostics& diagnostics() const { return diag_; }

  /// Coefficients of the most recent step that updated state.
  const UpdateCoefficients& last_coefficients() const { return last_coeffs_; }

  /// Predict on x, then update per this kind's trigger. The prediction is a
  /// pure function of the pre-update state.
  StepOutcome step(const Example& x, int y) {
    if (y != +1 && y != -1) {
      throw InputError("step: label must be -1 or +1, got " + std::to_string(y));
    }
    check_dims(state_, x);
    const double score = sparse_dot(state_.mean, x);
    if (!std::isfinite(score)) throw NumericError("step: non-finite score");

    StepOutcome out;
    out.predicted = score >= 0.0 ? +1 : -1;
    out.mistake = out.predicted != y;
    if (x.is_zero()) return out;  // no margin information; never update

    switch (kind_) {
      case LearnerKind::Perceptron: {
        if (out.mistake) {
          for (const Feature& f : x.features) state_.mean[f.index] += y * f.value;
          diag_.cum_alpha2v += x.norm_sq();
          out.updated = true;
        }
        break;
      }
      case LearnerKind::PA:
      case LearnerKind::PAI:
      case LearnerKind::PAII: {
        MarginStats stats;
        stats.m = y * score;
        stats.loss_hinge = std::max(0.0, 1.0 - stats.m);
        if (stats.loss_hinge > 0.0) {
          const PaKind pk = kind_ == LearnerKind::PA    ? PaKind::PA
                            : kind_ == LearnerKind::PAI ? PaKind::PAI
                                                        : PaKind::PAII;
          const double eta_t = pa_coefficient(pk, stats, x, params_.c);
          for (const Feature& f : x.features) state_.mean[f.index] += eta_t * y * f.value;
          diag_.cum_alpha2v += eta_t * eta_t * x.norm_sq();
          out.updated = true;
        }
        break;
      }
      case LearnerKind::CW:
      case LearnerKind::SCWI:
      case LearnerKind::SCWII: {
        const MarginStats stats = margin_stats_with_score(x, y, score);
        if (kind_ == LearnerKind::CW) {
          const UpdateCoefficients c = cw_coefficients(stats, params_, &diag_);
          if (c.alpha > 0.0) out.updated = apply_and_log(x, y, c);
        } else if (stats.loss_phi > 0.0) {
          const UpdateCoefficients c = kind_ == LearnerKind::SCWI
                                           ? scw1_coefficients(stats, params_, &diag_)
                                           : scw2_coefficients(stats, params_, &diag_);
          // alpha can round to zero exactly at the boundary; record no update.
          if (c.alpha > 0.0) out.updated = apply_and_log(x, y, c);
        }
        break;
      }
      case LearnerKind::AROW: {
        const MarginStats stats = margin_stats_with_score(x, y, score);
        if (stats.loss_hinge > 0.0) {
          const UpdateCoefficients c = arow_coefficients(stats, params_);
          out.updated = apply_and_log(x, y, c);
        }
        break;
      }
    }
    return out;
  }

 private:
  MarginStats margin_stats_with_score(const Example& x, int y, double score) const {
    MarginStats s;
    s.v = quad_form(state_, x);
    s.m = y * score;
    s.loss_hinge = std::max(0.0, 1.0 - s.m);
    s.loss_phi = std::max(0.0, params_.phi * std::sqrt(s.v) - s.m);
    if (!std::isfinite(s.v)) throw NumericError("step: non-finite margin");
    return s;
  }

  bool apply_and_log(const Example& x, int y, const UpdateCoefficients& c) {
    apply_second_order_update(state_, x, y, c, &diag_);
    diag_.cum_alpha2v += c.alpha * c.alpha * c.v;
    last_coeffs_ = c;
    return true;
  }

  LearnerKind kind_;
  HyperParams params_;
  GaussianState state_;
  Diagnostics diag_;
  UpdateCoefficients last_coeffs_;
};

}  // namespace scw
