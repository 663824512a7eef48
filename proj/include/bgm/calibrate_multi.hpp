#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bgm/calibrate_uni.hpp"
#include "bgm/errors.hpp"
#include "bgm/special_math.hpp"

namespace bgm {

/// Axis-aligned box [a_1,b_1] x ... x [a_m,b_m], every side nondegenerate.
struct Box {
  std::vector<double> a;
  std::vector<double> b;

  Box(std::vector<double> lower, std::vector<double> upper)
      : a(std::move(lower)), b(std::move(upper)) {
    if (a.empty() || a.size() != b.size()) {
      throw std::invalid_argument("Box requires matching nonempty corners");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(std::isfinite(a[i]) && std::isfinite(b[i])) || !(a[i] < b[i])) {
        throw std::invalid_argument("Box side " + std::to_string(i) +
                                    " requires finite a < b");
      }
    }
  }

  std::size_t dim() const { return a.size(); }
  double width(std::size_t i) const { return b[i] - a[i]; }

  double diameter_l2() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) sum += width(i) * width(i);
    return std::sqrt(sum);
  }

  bool contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i) {
      if (!(a[i] <= x[i] && x[i] <= b[i])) return false;
    }
    return true;
  }

  Interval side(std::size_t i) const { return Interval(a[i], b[i]); }
};

/// Nonnegative per-coordinate adjacency shift with its cached l2 norm.
struct ShiftVector {
  std::vector<double> c;
  double norm2 = 0.0;

  explicit ShiftVector(std::vector<double> shift) : c(std::move(shift)) {
    double sum = 0.0;
    for (double v : c) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("shift components must be finite and >= 0");
      }
      sum += v * v;
    }
    norm2 = std::sqrt(sum);
  }

  static ShiftVector zero(std::size_t m) {
    return ShiftVector(std::vector<double>(m, 0.0));
  }

  std::size_t dim() const { return c.size(); }
};

/// Diagnostics of the c* solve that produced a calibration.
struct InnerSolverStats {
  double grad_norm = 0.0;  // projected-gradient (KKT) residual at exit
  int projection_iterations = 0;
};

/// Result of the multivariate variance calibration.
struct MultiCalibration {
  double sigma_star_sq = 0.0;
  double sigma0_sq = 0.0;
  ShiftVector c_star = ShiftVector::zero(1);
  double residual = 0.0;
  int iterations = 0;
  InnerSolverStats inner_solver_stats;
};

namespace detail {

/// ln[Phi((w-c)/sigma) - Phi(-c/sigma)]: one factor of the box integral.
inline double log_mass_1d(double width, double c, double sigma) {
  return log_interval_mass(0.0, sigma, Interval(-c, width - c));
}

inline void require_shift_matches(const ShiftVector& c, const Box& box) {
  if (c.dim() != box.dim()) {
    throw std::invalid_argument("shift dimension " + std::to_string(c.dim()) +
                                " does not match box dimension " +
                                std::to_string(box.dim()));
  }
  for (std::size_t i = 0; i < c.dim(); ++i) {
    if (c.c[i] > box.width(i)) {
      throw std::invalid_argument("shift component " + std::to_string(i) +
                                  " exceeds box side length");
    }
  }
}

}  // namespace detail

/// Log of the box's Gaussian mass when the center sits at a + c, up to the
/// (sigma sqrt(2 pi))^m factor that cancels in every ratio. The box integral
/// factorizes across coordinates, so this is an O(m) sum of 1D terms.
inline double log_box_mass(const ShiftVector& s_shift, double sigma,
                           const Box& box) {
  detail::require_positive_sigma(sigma);
  detail::require_shift_matches(s_shift, box);
  double sum = 0.0;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    sum += detail::log_mass_1d(box.width(i), s_shift.c[i], sigma);
  }
  return sum;
}

/// ln DeltaC_m(sigma, c) = log_box_mass(c) - log_box_mass(0).
inline double log_delta_c_m(double sigma, const ShiftVector& c,
                            const Box& box) {
  return log_box_mass(c, sigma, box) -
         log_box_mass(ShiftVector::zero(box.dim()), sigma, box);
}

/// Normalizer ratio C_m(a,sigma)/C_m(a+c,sigma); exactly 1 at c = 0 and
/// strictly above 1 for any nonzero feasible c.
inline double delta_c_m(double sigma, const ShiftVector& c, const Box& box) {
  if (c.norm2 == 0.0) {
    detail::require_positive_sigma(sigma);
    detail::require_shift_matches(c, box);
    return 1.0;
  }
  return std::exp(log_delta_c_m(sigma, c, box));
}

/// Full output of the worst-case-shift solver.
struct CStarSolution {
  ShiftVector shift;
  double objective = 0.0;  // ln DeltaC_m(sigma, shift)
  double kkt_residual = 0.0;
  int iterations = 0;
  int projection_iterations = 0;
};

namespace detail {

/// Euclidean projection onto {0 <= x_i <= w_i} intersected with the l2 ball
/// of radius delta_q, by Dykstra's alternating projections.
inline std::vector<double> project_box_ball(std::vector<double> x,
                                            const Box& box, double delta_q,
                                            int* iterations_used) {
  const std::size_t m = x.size();
  std::vector<double> p(m, 0.0), q(m, 0.0), y(m), prev(m);
  constexpr int kMaxIter = 500;
  constexpr double kTol = 1e-12;
  int used = kMaxIter;
  for (int it = 0; it < kMaxIter; ++it) {
    prev = x;
    // Box step.
    for (std::size_t i = 0; i < m; ++i) {
      y[i] = std::clamp(x[i] + p[i], 0.0, box.width(i));
      p[i] = x[i] + p[i] - y[i];
    }
    // Ball step.
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = y[i] + q[i];
      norm += x[i] * x[i];
    }
    norm = std::sqrt(norm);
    if (norm > delta_q) {
      const double scale = delta_q / norm;
      for (std::size_t i = 0; i < m; ++i) {
        const double z = x[i] * scale;
        q[i] = x[i] - z;
        x[i] = z;
      }
    } else {
      for (std::size_t i = 0; i < m; ++i) q[i] = 0.0;
    }
    double change = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      change += (x[i] - prev[i]) * (x[i] - prev[i]);
    }
    if (std::sqrt(change) <= kTol && it > 0) {
      used = it + 1;
      break;
    }
  }
  if (iterations_used != nullptr) *iterations_used += used;
  return x;
}

/// Separable objective g(c) = sum_i ln mass_i(c_i) and its gradient.
struct CStarObjective {
  const Box& box;
  double sigma;

  double value(const std::vector<double>& c) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < box.dim(); ++i) {
      sum += log_mass_1d(box.width(i), c[i], sigma);
    }
    return sum;
  }

  // d/dc_i ln mass_i = [phi(c_i/sigma) - phi((w_i-c_i)/sigma)] / (sigma mass_i)
  std::vector<double> gradient(const std::vector<double>& c) const {
    std::vector<double> g(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i) {
      const double w = box.width(i);
      const double mass =
          std::exp(log_mass_1d(w, c[i], sigma));
      g[i] = (std_normal_pdf(c[i] / sigma) -
              std_normal_pdf((w - c[i]) / sigma)) /
             (sigma * mass);
    }
    return g;
  }
};

}  // namespace detail

/// Maximizes ln DeltaC_m(sigma, c) over {0 <= c_i <= b_i - a_i} intersected
/// with the delta_q ball, by projected gradient ascent with backtracking
/// line search. When the ball admits the separable maximizer c_i = w_i/2 the
/// solve is closed-form. Termination is on the unit-step gradient mapping
/// ||P(c + grad) - c|| <= 1e-8.
inline CStarSolution solve_c_star(double sigma, const Box& box, double delta_q,
                                  const std::vector<double>* warm_start =
                                      nullptr) {
  detail::require_positive_sigma(sigma);
  if (!(delta_q > 0.0) || !std::isfinite(delta_q)) {
    throw std::invalid_argument("delta_q must be positive and finite");
  }
  const std::size_t m = box.dim();
  const detail::CStarObjective obj{box, sigma};

  std::vector<double> half(m);
  double half_norm_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    half[i] = 0.5 * box.width(i);
    half_norm_sq += half[i] * half[i];
  }
  if (half_norm_sq <= delta_q * delta_q) {
    // Each 1D factor peaks at w_i/2, and that point is inside the ball.
    CStarSolution sol{ShiftVector(half), 0.0, 0.0, 0, 0};
    sol.objective = obj.value(half) -
                    obj.value(std::vector<double>(m, 0.0));
    sol.kkt_residual = 0.0;
    return sol;
  }

  CStarSolution sol{ShiftVector::zero(m), 0.0, 0.0, 0, 0};
  std::vector<double> x;
  if (warm_start != nullptr && warm_start->size() == m) {
    x = detail::project_box_ball(*warm_start, box, delta_q,
                                 &sol.projection_iterations);
  } else {
    const double scale = delta_q / std::sqrt(half_norm_sq);
    x = half;
    for (double& v : x) v *= scale;
  }

  double fx = obj.value(x);
  double step = 1.0;
  constexpr int kMaxIter = 20000;
  constexpr double kKktTol = 1e-8;
  bool converged = false;
  for (int it = 0; it < kMaxIter; ++it) {
    const std::vector<double> grad = obj.gradient(x);

    std::vector<double> probe(m);
    for (std::size_t i = 0; i < m; ++i) probe[i] = x[i] + grad[i];
    probe = detail::project_box_ball(std::move(probe), box, delta_q,
                                     &sol.projection_iterations);
    double kkt = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      kkt += (probe[i] - x[i]) * (probe[i] - x[i]);
    }
    kkt = std::sqrt(kkt);
    sol.kkt_residual = kkt;
    sol.iterations = it;
    if (kkt <= kKktTol) {
      converged = true;
      break;
    }

    // Backtracking Armijo search along the projected arc.
    step *= 2.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      std::vector<double> cand(m);
      for (std::size_t i = 0; i < m; ++i) cand[i] = x[i] + step * grad[i];
      cand = detail::project_box_ball(std::move(cand), box, delta_q,
                                      &sol.projection_iterations);
      double inner = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        inner += grad[i] * (cand[i] - x[i]);
      }
      const double fc = obj.value(cand);
      if (fc >= fx + 1e-4 * inner && fc > fx) {
        x = std::move(cand);
        fx = fc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // The objective cannot improve in floating point; at a stationary
      // point the gradient mapping is zero up to projection noise.
      converged = kkt <= 1e2 * kKktTol;
      break;
    }
  }
  if (!converged) {
    throw NonConvergenceError(
        "c* solver stalled with KKT residual " +
        std::to_string(sol.kkt_residual));
  }

  sol.shift = ShiftVector(x);
  sol.objective = fx - obj.value(std::vector<double>(m, 0.0));
  return sol;
}

/// Worst-case shift c* of the concave program; see solve_c_star.
inline ShiftVector optimize_c_star(double sigma, const Box& box,
                                   double delta_q) {
  return solve_c_star(sigma, box, delta_q).shift;
}

/// sigma_{m,0} = sqrt([||b-a||_2 + dq/2] dq / eps).
inline double sigma0_m(const Box& box, const PrivacySpec& spec) {
  return std::sqrt(detail::variance_scale(box.diameter_l2(), spec.delta_q) /
                   spec.epsilon);
}

/// f_m(sigma) = sigma^2 - [||b-a||_2 + dq/2] dq /
///              (eps - ln DeltaC_m(sigma, c*(sigma))),
/// with c* re-optimized at this sigma.
inline double f_m_residual(double sigma, const Box& box,
                           const PrivacySpec& spec) {
  detail::require_positive_sigma(sigma);
  const CStarSolution c_star = solve_c_star(sigma, box, spec.delta_q);
  const double denom = spec.epsilon - c_star.objective;
  if (!(denom > 0.0)) {
    throw DenominatorNotPositiveError(
        "epsilon - ln(DeltaC_m(sigma, c*)) = " + std::to_string(denom) +
        " <= 0 at sigma = " + std::to_string(sigma));
  }
  return sigma * sigma -
         detail::variance_scale(box.diameter_l2(), spec.delta_q) / denom;
}

/// Bisection for the zero of f_m, mirroring the univariate calibrate but
/// re-solving the worst-case shift at every iterate, warm-started from the
/// previous one.
inline MultiCalibration calibrate_multi(const Box& box,
                                        const PrivacySpec& spec) {
  const double scale =
      detail::variance_scale(box.diameter_l2(), spec.delta_q);
  MultiCalibration cal;
  cal.sigma0_sq = scale / spec.epsilon;

  std::vector<double> warm;
  CStarSolution last{ShiftVector::zero(box.dim()), 0.0, 0.0, 0, 0};
  const auto rhs_at = [&](double sigma_sq) {
    last = solve_c_star(std::sqrt(sigma_sq), box, spec.delta_q,
                        warm.empty() ? nullptr : &warm);
    warm = last.shift.c;
    const double denom = spec.epsilon - last.objective;
    if (!(denom > 0.0)) {
      throw InternalBracketError(
          "infeasible sigma inside calibration bracket (eps - ln DeltaC_m = " +
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
  const CStarSolution final_solve = solve_c_star(
      std::sqrt(mid), box, spec.delta_q, warm.empty() ? nullptr : &warm);
  cal.c_star = final_solve.shift;
  cal.inner_solver_stats = {final_solve.kkt_residual,
                            final_solve.projection_iterations};
  cal.residual = mid - scale / (spec.epsilon - final_solve.objective);
  return cal;
}

/// One epsilon-DP release of the vector query value s. With Sigma = sigma^2 I
/// on a box the density factorizes, so the draw is m independent univariate
/// truncated-normal draws sharing one generator.
template <class Rng>
std::vector<double> release_multi(std::span<const double> s, const Box& box,
                                  const PrivacySpec& spec,
                                  const MultiCalibration& cal, Rng& rng) {
  if (!box.contains(s)) {
    throw QueryValueOutsideDomainError("query value outside the box domain");
  }
  const double expected_sigma0_sq =
      detail::variance_scale(box.diameter_l2(), spec.delta_q) / spec.epsilon;
  if (std::fabs(cal.sigma0_sq - expected_sigma0_sq) >
      1e-9 * expected_sigma0_sq) {
    throw std::invalid_argument(
        "calibration was not produced for this box and privacy spec");
  }
  const double sigma = std::sqrt(cal.sigma_star_sq);
  std::vector<double> out(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    out[i] = TruncatedNormal(s[i], sigma, box.side(i)).sample(rng);
  }
  return out;
}

}  // namespace bgm
