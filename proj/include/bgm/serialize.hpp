#pragma once

#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "bgm/calibrate_multi.hpp"
#include "bgm/calibrate_uni.hpp"
#include "bgm/graph_queries.hpp"
#include "bgm/privacy_verifier.hpp"

namespace bgm {

/// All numeric output carries 17 significant digits so every double
/// round-trips exactly through text.
inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace detail {

inline std::string json_array(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ",";
    out += format_number(values[i]);
  }
  return out + "]";
}

inline std::string json_array(std::span<const int> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(values[i]);
  }
  return out + "]";
}

}  // namespace detail

inline std::string to_json(const UniCalibration& cal) {
  std::string out = "{";
  out += "\"sigma_star_sq\":" + format_number(cal.sigma_star_sq);
  out += ",\"sigma0_sq\":" + format_number(cal.sigma0_sq);
  out += ",\"residual\":" + format_number(cal.residual);
  out += ",\"iterations\":" + std::to_string(cal.iterations);
  out += ",\"bracket_width\":" + format_number(cal.bracket_width);
  return out + "}";
}

inline std::string to_json(const MultiCalibration& cal) {
  std::string out = "{";
  out += "\"sigma_star_sq\":" + format_number(cal.sigma_star_sq);
  out += ",\"sigma0_sq\":" + format_number(cal.sigma0_sq);
  out += ",\"c_star\":" + detail::json_array(cal.c_star.c);
  out += ",\"c_star_norm2\":" + format_number(cal.c_star.norm2);
  out += ",\"residual\":" + format_number(cal.residual);
  out += ",\"iterations\":" + std::to_string(cal.iterations);
  out += ",\"inner_solver_stats\":{\"grad_norm\":" +
         format_number(cal.inner_solver_stats.grad_norm) +
         ",\"projection_iterations\":" +
         std::to_string(cal.inner_solver_stats.projection_iterations) + "}";
  return out + "}";
}

inline std::string to_json(const AuditReport& report) {
  std::string out = "{";
  out += "\"sup_log_ratio\":" + format_number(report.sup_log_ratio);
  out += ",\"epsilon_target\":" + format_number(report.epsilon_target);
  out += ",\"argmax_point\":{";
  out += "\"s\":" + detail::json_array(report.argmax_s);
  out += ",\"s_prime\":" + detail::json_array(report.argmax_s_prime);
  out += ",\"z\":" + detail::json_array(report.argmax_z);
  out += "}";
  out += ",\"grid_resolution\":" + detail::json_array(report.grid_resolution);
  out += std::string(",\"passed\":") + (report.passed ? "true" : "false");
  return out + "}";
}

inline constexpr const char* kExperimentCsvHeader =
    "epsilon,sigma_gg_sq,sigma_bg_sq,percent_reduction";

inline std::string to_csv(std::span<const ExperimentRow> rows) {
  std::string out = kExperimentCsvHeader;
  out += "\n";
  for (const ExperimentRow& row : rows) {
    out += format_number(row.epsilon) + "," + format_number(row.sigma_gg_sq) +
           "," + format_number(row.sigma_bg_sq) + "," +
           format_number(row.percent_reduction) + "\n";
  }
  return out;
}

inline std::string to_json(std::span<const ExperimentRow> rows) {
  std::string out = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) out += ",";
    out += "{\"epsilon\":" + format_number(rows[i].epsilon);
    out += ",\"sigma_gg_sq\":" + format_number(rows[i].sigma_gg_sq);
    out += ",\"sigma_bg_sq\":" + format_number(rows[i].sigma_bg_sq);
    out += ",\"percent_reduction\":" +
           format_number(rows[i].percent_reduction) + "}";
  }
  return out + "]";
}

}  // namespace bgm
