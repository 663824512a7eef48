#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bgm/calibrate_multi.hpp"
#include "bgm/calibrate_uni.hpp"
#include "bgm/errors.hpp"
#include "bgm/special_math.hpp"

namespace bgm {

/// Absolute slack on the audited log ratio. Grid discretization can only
/// under-estimate the supremum, so this covers float noise only.
inline constexpr double kAuditSlack = 1e-6;

/// Outcome of a worst-case density-ratio audit. For univariate audits the
/// argmax vectors have one entry.
struct AuditReport {
  double sup_log_ratio = -std::numeric_limits<double>::infinity();
  double epsilon_target = 0.0;
  std::vector<double> argmax_s;
  std::vector<double> argmax_s_prime;
  std::vector<double> argmax_z;
  std::vector<int> grid_resolution;
  bool passed = false;
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + i * step;
  out.front() = lo;
  out.back() = hi;
  return out;
}

inline void insert_sorted_unique(std::vector<double>& v, double x) {
  const auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

}  // namespace detail

/// Exhaustive grid maximum of ln p_B(z|s) - ln p_B(z|s') over all
/// s, s', z in [a, b] with |s - s'| <= delta_q. The grid is augmented with
/// the pair (a, a+c) and its mirror, where the worst normalizer ratio is
/// attained, so the reported supremum does not depend on the resolution
/// hitting them by luck. Everything stays in log space.
inline AuditReport audit_uni(double sigma, const Interval& d,
                             const PrivacySpec& spec, int grid_n) {
  detail::require_positive_sigma(sigma);
  if (grid_n < 16) {
    throw std::invalid_argument("audit grid_n must be at least 16");
  }

  std::vector<double> s_grid = detail::linspace(d.a, d.b, grid_n);
  const double c_eff = effective_shift(d, spec);
  detail::insert_sorted_unique(s_grid, d.a + c_eff);
  detail::insert_sorted_unique(s_grid, d.b - c_eff);
  const std::vector<double> z_grid = detail::linspace(d.a, d.b, grid_n);

  std::vector<double> log_mass(s_grid.size());
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    log_mass[i] = log_interval_mass(s_grid[i], sigma, d);
  }

  // |s - s'| == delta_q must survive the rounding of augmented points.
  const double shift_cap = spec.delta_q * (1.0 + 1e-12);
  const double inv_two_var = 0.5 / (sigma * sigma);

  AuditReport report;
  report.epsilon_target = spec.epsilon;
  report.grid_resolution = {grid_n};
  report.argmax_s = {d.a};
  report.argmax_s_prime = {d.a};
  report.argmax_z = {d.a};
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
      if (std::fabs(s_grid[i] - s_grid[j]) > shift_cap) continue;
      const double mass_term = log_mass[j] - log_mass[i];
      for (double z : z_grid) {
        const double dzs = z - s_grid[i];
        const double dzp = z - s_grid[j];
        const double value = (dzp * dzp - dzs * dzs) * inv_two_var + mass_term;
        if (value > report.sup_log_ratio) {
          report.sup_log_ratio = value;
          report.argmax_s = {s_grid[i]};
          report.argmax_s_prime = {s_grid[j]};
          report.argmax_z = {z};
        }
      }
    }
  }
  report.passed = report.sup_log_ratio <= spec.epsilon + kAuditSlack;
  return report;
}

namespace detail {

/// Unit directions used for the adjacency shift in multivariate audits:
/// axis-aligned extremes plus a fixed sample of the unit sphere.
inline std::vector<std::vector<double>> shift_directions(std::size_t m) {
  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < m; ++i) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> e(m, 0.0);
      e[i] = sign;
      dirs.push_back(std::move(e));
    }
  }
  constexpr int kSphereSamples = 64;
  if (m == 2) {
    for (int k = 0; k < kSphereSamples; ++k) {
      const double theta = 2.0 * M_PI * k / kSphereSamples;
      dirs.push_back({std::cos(theta), std::sin(theta)});
    }
  } else if (m == 3) {
    // Fibonacci sphere.
    constexpr double kGolden = 2.39996322972865332;
    for (int k = 0; k < kSphereSamples; ++k) {
      const double y = 1.0 - 2.0 * (k + 0.5) / kSphereSamples;
      const double r = std::sqrt(1.0 - y * y);
      const double phi = kGolden * k;
      dirs.push_back({r * std::cos(phi), y, r * std::sin(phi)});
    }
  }
  return dirs;
}

}  // namespace detail

/// Multivariate counterpart of audit_uni on tensor grids. The shift c is
/// taken at full feasible length along sampled sphere directions and the
/// axis extremes; for each (s, c) the z maximum over the tensor grid is
/// computed axis by axis, which is exact because the quadratic term
/// separates across coordinates. m = 1 delegates to the exhaustive
/// univariate audit.
inline AuditReport audit_multi(double sigma, const Box& box,
                               const PrivacySpec& spec, int grid_n) {
  const std::size_t m = box.dim();
  if (m > 3) {
    throw DimensionTooLargeError(
        "audit_multi caps the dimension at 3, got " + std::to_string(m));
  }
  if (m == 1) {
    AuditReport report = audit_uni(sigma, box.side(0), spec, grid_n);
    report.grid_resolution.assign(1, grid_n);
    return report;
  }
  detail::require_positive_sigma(sigma);
  if (grid_n < 16) {
    throw std::invalid_argument("audit grid_n must be at least 16");
  }

  std::vector<std::vector<double>> axis_grid(m);
  std::vector<std::vector<double>> axis_log_mass(m);
  for (std::size_t i = 0; i < m; ++i) {
    axis_grid[i] = detail::linspace(box.a[i], box.b[i], grid_n);
    axis_log_mass[i].resize(axis_grid[i].size());
    for (std::size_t k = 0; k < axis_grid[i].size(); ++k) {
      axis_log_mass[i][k] =
          log_interval_mass(axis_grid[i][k], sigma, box.side(i));
    }
  }
  const std::vector<std::vector<double>> directions =
      detail::shift_directions(m);
  const double inv_two_var = 0.5 / (sigma * sigma);

  AuditReport report;
  report.epsilon_target = spec.epsilon;
  report.grid_resolution.assign(m, grid_n);
  // The zero-shift pair s' = s has log ratio exactly 0 everywhere, so the
  // supremum starts there and can never be negative.
  report.sup_log_ratio = 0.0;
  report.argmax_s.assign(box.a.begin(), box.a.end());
  report.argmax_s_prime.assign(box.a.begin(), box.a.end());
  report.argmax_z.assign(box.a.begin(), box.a.end());

  std::vector<std::size_t> idx(m, 0);
  std::vector<double> s(m), s_prime(m), best_z(m);
  bool done = false;
  while (!done) {
    for (std::size_t i = 0; i < m; ++i) s[i] = axis_grid[i][idx[i]];

    for (const auto& u : directions) {
      // Longest feasible step along u, capped at delta_q.
      double t = spec.delta_q;
      for (std::size_t i = 0; i < m; ++i) {
        if (u[i] > 0.0) t = std::min(t, (box.b[i] - s[i]) / u[i]);
        if (u[i] < 0.0) t = std::min(t, (box.a[i] - s[i]) / u[i]);
      }
      if (!(t > 0.0)) continue;
      double value = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        s_prime[i] = std::clamp(s[i] + t * u[i], box.a[i], box.b[i]);
        value += log_interval_mass(s_prime[i], sigma, box.side(i)) -
                 axis_log_mass[i][idx[i]];
      }
      // Per-axis z maximization; the tensor-grid max of the separable
      // quadratic term is the sum of per-axis maxima.
      for (std::size_t i = 0; i < m; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        double best_point = axis_grid[i].front();
        for (double z : axis_grid[i]) {
          const double dzp = z - s_prime[i];
          const double dzs = z - s[i];
          const double term = (dzp * dzp - dzs * dzs) * inv_two_var;
          if (term > best) {
            best = term;
            best_point = z;
          }
        }
        value += best;
        best_z[i] = best_point;
      }
      if (value > report.sup_log_ratio) {
        report.sup_log_ratio = value;
        report.argmax_s = s;
        report.argmax_s_prime = s_prime;
        report.argmax_z = best_z;
      }
    }

    // Odometer over the tensor grid of s.
    done = true;
    for (std::size_t i = 0; i < m; ++i) {
      if (++idx[i] < axis_grid[i].size()) {
        done = false;
        break;
      }
      idx[i] = 0;
    }
  }
  report.passed = report.sup_log_ratio <= spec.epsilon + kAuditSlack;
  return report;
}

/// Status of one lemma-property check.
enum class CheckStatus { kPass, kFail, kSkipped };

struct LemmaCheck {
  std::string name;
  CheckStatus status = CheckStatus::kSkipped;
  double worst_violation = 0.0;
  std::string worst_point;
};

struct PropertyReport {
  std::vector<LemmaCheck> checks;

  bool all_passed() const {
    return std::none_of(checks.begin(), checks.end(), [](const LemmaCheck& c) {
      return c.status == CheckStatus::kFail;
    });
  }

  const LemmaCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

/// Violations are tolerated up to this slack; anything above fails.
inline constexpr double kLemmaSlack = 1e-12;

/// Replacement for ln DeltaC(sigma), used by tests to prove the checker
/// actually detects corrupted inputs.
using LogDeltaCFn = std::function<double(double)>;

namespace detail {

inline LemmaCheck monotone_check(const std::string& name,
                                 std::span<const double> xs,
                                 std::span<const double> ys, bool decreasing,
                                 const std::string& axis) {
  LemmaCheck check;
  check.name = name;
  if (xs.size() < 2) {
    check.status = CheckStatus::kSkipped;
    check.worst_point = "insufficient grid";
    return check;
  }
  check.status = CheckStatus::kPass;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double violation =
        decreasing ? ys[k + 1] - ys[k] : ys[k] - ys[k + 1];
    if (violation > check.worst_violation) {
      check.worst_violation = violation;
      check.worst_point = axis + "=" + std::to_string(xs[k]);
    }
  }
  if (check.worst_violation > kLemmaSlack) check.status = CheckStatus::kFail;
  return check;
}

inline LemmaCheck positivity_check(const std::string& name, double value,
                                   const std::string& point) {
  LemmaCheck check;
  check.name = name;
  check.status = value > kLemmaSlack ? CheckStatus::kPass : CheckStatus::kFail;
  check.worst_violation = value > 0.0 ? 0.0 : -value;
  check.worst_point = point;
  return check;
}

}  // namespace detail

/// Evaluates every grid-based lemma property of the univariate calibration:
/// the normalizer-ratio monotonicity in s, DeltaC > 1 and decreasing in
/// sigma, feasibility at sigma0, f(sigma0) < 0 and f increasing on
/// [sigma0, 10 sigma0]. A sigma grid with fewer than two points downgrades
/// the monotonicity checks to "insufficient grid".
inline PropertyReport check_lemmas(const Interval& d, const PrivacySpec& spec,
                                   std::span<const double> sigma_grid,
                                   const LogDeltaCFn& log_dc_override = {}) {
  const auto log_dc = [&](double sigma) {
    return log_dc_override ? log_dc_override(sigma)
                           : log_delta_c(sigma, d, spec);
  };
  PropertyReport report;

  // Normalizer-ratio monotonicity in s at sigma0, over 1000 grid points.
  {
    const double sig = sigma0(d, spec);
    const double c = effective_shift(d, spec);
    const std::vector<double> s_grid =
        detail::linspace(d.a, d.b - c, 1000);
    std::vector<double> ratio(s_grid.size());
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
      ratio[k] = std::exp(log_interval_mass(s_grid[k] + c, sig, d) -
                          log_interval_mass(s_grid[k], sig, d));
    }
    report.checks.push_back(detail::monotone_check(
        "normalizer_ratio_decreasing_in_s", s_grid, ratio, true, "s"));
  }

  // DeltaC > 1 over the sigma grid.
  {
    LemmaCheck check;
    check.name = "delta_c_greater_than_one";
    check.status =
        sigma_grid.empty() ? CheckStatus::kSkipped : CheckStatus::kPass;
    if (sigma_grid.empty()) check.worst_point = "insufficient grid";
    for (double sig : sigma_grid) {
      const double margin = log_dc(sig);
      if (-margin > check.worst_violation) {
        check.worst_violation = -margin;
        check.worst_point = "sigma=" + std::to_string(sig);
      }
      if (!(margin > -kLemmaSlack)) check.status = CheckStatus::kFail;
    }
    report.checks.push_back(check);
  }

  // DeltaC strictly decreasing in sigma.
  {
    std::vector<double> values(sigma_grid.size());
    for (std::size_t k = 0; k < sigma_grid.size(); ++k) {
      values[k] = std::exp(log_dc(sigma_grid[k]));
    }
    report.checks.push_back(detail::monotone_check(
        "delta_c_decreasing_in_sigma", sigma_grid, values, true, "sigma"));
  }

  const double sig0 = sigma0(d, spec);
  report.checks.push_back(detail::positivity_check(
      "feasible_at_sigma0", spec.epsilon - log_dc(sig0),
      "sigma0=" + std::to_string(sig0)));

  const double scale = detail::variance_scale(d.width(), spec.delta_q);
  const auto f_at = [&](double sigma) {
    const double denom = spec.epsilon - log_dc(sigma);
    if (!(denom > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return sigma * sigma - scale / denom;
  };

  {
    const double f0 = f_at(sig0);
    LemmaCheck check;
    check.name = "f_negative_at_sigma0";
    check.worst_point = "sigma0=" + std::to_string(sig0);
    if (std::isnan(f0)) {
      check.status = CheckStatus::kFail;
      check.worst_violation = std::numeric_limits<double>::infinity();
      check.worst_point += " (infeasible)";
    } else {
      check.status = -f0 > kLemmaSlack * std::max(1.0, scale / spec.epsilon)
                         ? CheckStatus::kPass
                         : CheckStatus::kFail;
      check.worst_violation = f0 < 0.0 ? 0.0 : f0;
    }
    report.checks.push_back(check);
  }

  // f strictly increasing on [sigma0, 10 sigma0], grid size taken from the
  // caller's sigma grid.
  {
    const std::size_t n = sigma_grid.size();
    if (n < 2) {
      LemmaCheck check;
    check.name = "f_increasing_above_sigma0";
      check.status = CheckStatus::kSkipped;
      check.worst_point = "insufficient grid";
      report.checks.push_back(check);
    } else {
      const std::vector<double> grid =
          detail::linspace(sig0, 10.0 * sig0, static_cast<int>(n));
      std::vector<double> values(grid.size());
      bool infeasible = false;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        values[k] = f_at(grid[k]);
        infeasible = infeasible || std::isnan(values[k]);
      }
      LemmaCheck check = detail::monotone_check(
          "f_increasing_above_sigma0", grid, values, false, "sigma");
      if (infeasible) {
        check.status = CheckStatus::kFail;
        check.worst_point += " (infeasible point in grid)";
      }
      report.checks.push_back(check);
    }
  }

  return report;
}

/// Multivariate lemma properties: per-coordinate normalizer-ratio
/// monotonicity, DeltaC_m(c*) > 1, feasibility at sigma_{m,0},
/// f_m(sigma_{m,0}) < 0 and f_m increasing.
inline PropertyReport check_lemmas(const Box& box, const PrivacySpec& spec,
                                   std::span<const double> sigma_grid) {
  PropertyReport report;
  const double sig0 = sigma0_m(box, spec);
  const CStarSolution at_sig0 = solve_c_star(sig0, box, spec.delta_q);

  // Coordinate-wise ratio monotonicity at sigma0 with c = c*(sigma0).
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const double c = at_sig0.shift.c[i];
    if (c <= 0.0 || c >= box.width(i)) continue;
    const std::vector<double> s_grid =
        detail::linspace(box.a[i], box.b[i] - c, 50);
    std::vector<double> ratio(s_grid.size());
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
      ratio[k] =
          std::exp(log_interval_mass(s_grid[k] + c, sig0, box.side(i)) -
                   log_interval_mass(s_grid[k], sig0, box.side(i)));
    }
    report.checks.push_back(detail::monotone_check(
        "box_ratio_decreasing_in_s_axis" + std::to_string(i), s_grid, ratio,
        true, "s" + std::to_string(i)));
  }

  {
    LemmaCheck check;
    check.name = "delta_c_m_greater_than_one";
    check.status =
        sigma_grid.empty() ? CheckStatus::kSkipped : CheckStatus::kPass;
    if (sigma_grid.empty()) check.worst_point = "insufficient grid";
    for (double sig : sigma_grid) {
      const double margin = solve_c_star(sig, box, spec.delta_q).objective;
      if (-margin > check.worst_violation) {
        check.worst_violation = -margin;
        check.worst_point = "sigma=" + std::to_string(sig);
      }
      if (!(margin > -kLemmaSlack)) check.status = CheckStatus::kFail;
    }
    report.checks.push_back(check);
  }

  report.checks.push_back(detail::positivity_check(
      "feasible_at_sigma_m0", spec.epsilon - at_sig0.objective,
      "sigma_m0=" + std::to_string(sig0)));

  const double scale =
      detail::variance_scale(box.diameter_l2(), spec.delta_q);
  const auto f_at = [&](double sigma) {
    const double denom =
        spec.epsilon - solve_c_star(sigma, box, spec.delta_q).objective;
    if (!(denom > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return sigma * sigma - scale / denom;
  };

  {
    const double f0 = f_at(sig0);
    LemmaCheck check;
    check.name = "f_m_negative_at_sigma_m0";
    check.worst_point = "sigma_m0=" + std::to_string(sig0);
    check.status = !std::isnan(f0) && f0 < 0.0 ? CheckStatus::kPass
                                               : CheckStatus::kFail;
    check.worst_violation = !std::isnan(f0) && f0 < 0.0 ? 0.0 : std::fabs(f0);
    report.checks.push_back(check);
  }

  {
    const std::size_t n = std::min<std::size_t>(sigma_grid.size(), 200);
    if (n < 2) {
      LemmaCheck check;
    check.name = "f_m_increasing_above_sigma_m0";
      check.status = CheckStatus::kSkipped;
      check.worst_point = "insufficient grid";
      report.checks.push_back(check);
    } else {
      const std::vector<double> grid =
          detail::linspace(sig0, 10.0 * sig0, static_cast<int>(n));
      std::vector<double> values(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) values[k] = f_at(grid[k]);
      report.checks.push_back(detail::monotone_check(
          "f_m_increasing_above_sigma_m0", grid, values, false, "sigma"));
    }
  }

  return report;
}

/// Brute-force maximizer of the shift objective over the grid intersected
/// with the delta_q ball; test/audit oracle only, hence the dimension cap.
inline ShiftVector grid_c_star_oracle(double sigma, const Box& box,
                                      double delta_q, int grid_n) {
  detail::require_positive_sigma(sigma);
  const std::size_t m = box.dim();
  if (m > 3) {
    throw DimensionTooLargeError(
        "grid_c_star_oracle caps the dimension at 3, got " +
        std::to_string(m));
  }
  if (grid_n < 2) {
    throw std::invalid_argument("grid_n must be at least 2");
  }

  std::vector<std::vector<double>> axis(m);
  std::vector<std::vector<double>> axis_value(m);
  for (std::size_t i = 0; i < m; ++i) {
    axis[i] =
        detail::linspace(0.0, std::min(box.width(i), delta_q), grid_n);
    axis_value[i].resize(axis[i].size());
    for (std::size_t k = 0; k < axis[i].size(); ++k) {
      axis_value[i][k] = detail::log_mass_1d(box.width(i), axis[i][k], sigma);
    }
  }

  std::vector<std::size_t> idx(m, 0);
  std::vector<std::size_t> best_idx(m, 0);
  double best = -std::numeric_limits<double>::infinity();
  bool done = false;
  while (!done) {
    double norm_sq = 0.0;
    double value = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      norm_sq += axis[i][idx[i]] * axis[i][idx[i]];
      value += axis_value[i][idx[i]];
    }
    if (norm_sq <= delta_q * delta_q && value > best) {
      best = value;
      best_idx = idx;
    }
    done = true;
    for (std::size_t i = 0; i < m; ++i) {
      if (++idx[i] < axis[i].size()) {
        done = false;
        break;
      }
      idx[i] = 0;
    }
  }

  std::vector<double> c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = axis[i][best_idx[i]];
  return ShiftVector(std::move(c));
}

}  // namespace bgm
