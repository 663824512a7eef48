#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "bgm/errors.hpp"
#include "bgm/special_math.hpp"

namespace bgm {

/// Privacy budget epsilon and l2 query sensitivity.
struct PrivacySpec {
  double epsilon;
  double delta_q;

  PrivacySpec(double eps, double dq) : epsilon(eps), delta_q(dq) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw std::invalid_argument("epsilon must be positive and finite, got " +
                                  std::to_string(eps));
    }
    if (!(dq > 0.0) || !std::isfinite(dq)) {
      throw std::invalid_argument(
          "delta_q must be positive and finite, got " + std::to_string(dq));
    }
  }
};

/// Result of the univariate variance calibration.
struct UniCalibration {
  double sigma_star_sq = 0.0;
  double sigma0_sq = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double bracket_width = 0.0;
};

/// Residual |f(sigma*)| is accepted below this scale-aware tolerance.
inline double residual_tolerance(double sigma_star_sq) {
  return 1e-9 * std::max(1.0, sigma_star_sq);
}

/// Worst-case adjacency shift min(delta_q, (b-a)/2). The normalizer ratio
/// peaks at the raw sensitivity when it fits in half the domain and at the
/// midpoint shift otherwise.
inline double effective_shift(const Interval& d, const PrivacySpec& spec) {
  return std::min(spec.delta_q, 0.5 * d.width());
}

/// ln(DeltaC(sigma)): log of the worst-case normalizer ratio
/// C(a,sigma)/C(a+c,sigma) with c = effective_shift.
inline double log_delta_c(double sigma, const Interval& d,
                          const PrivacySpec& spec) {
  const double c = effective_shift(d, spec);
  return log_interval_mass(d.a + c, sigma, d) -
         log_interval_mass(d.a, sigma, d);
}

/// DeltaC(sigma) > 1 for every sigma; evaluated in log space.
inline double delta_c(double sigma, const Interval& d,
                      const PrivacySpec& spec) {
  return std::exp(log_delta_c(sigma, d, spec));
}

namespace detail {

/// [(b-a) + dq/2] * dq, the numerator shared by f, sigma0 and the bracket.
inline double variance_scale(double width, double delta_q) {
  return (width + 0.5 * delta_q) * delta_q;
}

}  // namespace detail

/// Closed-form lower bracket sigma0 = sqrt([(b-a)+dq/2] dq / eps).
inline double sigma0(const Interval& d, const PrivacySpec& spec) {
  return std::sqrt(detail::variance_scale(d.width(), spec.delta_q) /
                   spec.epsilon);
}

/// f(sigma) = sigma^2 - [(b-a)+dq/2] dq / (eps - ln DeltaC(sigma)).
/// Throws when the denominator is not positive, which marks sigma as below
/// the feasible region rather than silently returning a signed infinity.
inline double f_residual(double sigma, const Interval& d,
                         const PrivacySpec& spec) {
  detail::require_positive_sigma(sigma);
  const double denom = spec.epsilon - log_delta_c(sigma, d, spec);
  if (!(denom > 0.0)) {
    throw DenominatorNotPositiveError(
        "epsilon - ln(DeltaC(sigma)) = " + std::to_string(denom) +
        " <= 0 at sigma = " + std::to_string(sigma));
  }
  return sigma * sigma -
         detail::variance_scale(d.width(), spec.delta_q) / denom;
}

/// Bisection for the zero of f on [sigma0^2, K/(eps - ln DeltaC(sigma0))].
/// The bracket is valid because f(sigma0) < 0, f is strictly increasing on
/// [sigma0, inf), and eps - ln DeltaC(sigma0) > 0 always holds; if the
/// latter fails numerically we raise InternalBracketError since it can only
/// be an implementation bug. The loop keeps the first-iteration-always-runs
/// guard of the reference listing and stops once the bracket no longer
/// shrinks, with a 200-iteration cap and a 1e-12 relative width cutoff.
inline UniCalibration calibrate(const Interval& d, const PrivacySpec& spec) {
  const double scale = detail::variance_scale(d.width(), spec.delta_q);
  UniCalibration cal;
  cal.sigma0_sq = scale / spec.epsilon;

  const auto rhs_at = [&](double sigma_sq) {
    const double denom =
        spec.epsilon - log_delta_c(std::sqrt(sigma_sq), d, spec);
    if (!(denom > 0.0)) {
      throw InternalBracketError(
          "infeasible sigma inside calibration bracket (eps - ln DeltaC = " +
          std::to_string(denom) + ")");
    }
    return scale / denom;
  };

  double left = cal.sigma0_sq;
  double right = rhs_at(cal.sigma0_sq);
  double mid = right;
  double interval_size = std::numeric_limits<double>::infinity();
  while (interval_size > right - left) {
    if (cal.iterations >= 200) break;
    ++cal.iterations;
    interval_size = right - left;
    mid = 0.5 * (left + right);
    const double rhs = rhs_at(mid);
    if (rhs >= mid) left = mid;
    if (rhs <= mid) right = mid;
    if (right - left <= 1e-12 * right) break;
  }

  cal.sigma_star_sq = mid;
  cal.bracket_width = right - left;
  cal.residual = f_residual(std::sqrt(mid), d, spec);
  return cal;
}

/// One epsilon-DP release of the query value s: a single draw from
/// TruncatedNormal(s, sigma*, [a, b]). The calibration must have been
/// produced for the same (d, spec); the sigma0 fingerprint cheaply rejects
/// obvious mismatches.
template <class Rng>
double release(double s, const Interval& d, const PrivacySpec& spec,
               const UniCalibration& cal, Rng& rng) {
  if (!d.contains(s)) {
    throw QueryValueOutsideDomainError(
        "query value " + std::to_string(s) + " outside [" +
        std::to_string(d.a) + ", " + std::to_string(d.b) + "]");
  }
  const double expected_sigma0_sq =
      detail::variance_scale(d.width(), spec.delta_q) / spec.epsilon;
  if (std::fabs(cal.sigma0_sq - expected_sigma0_sq) >
      1e-9 * expected_sigma0_sq) {
    throw std::invalid_argument(
        "calibration was not produced for this domain and privacy spec");
  }
  return TruncatedNormal(s, std::sqrt(cal.sigma_star_sq), d).sample(rng);
}

}  // namespace bgm
