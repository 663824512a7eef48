#include "bgm/serialize.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <random>
#include <string>

namespace {

using nlohmann::json;

TEST(FormatNumber, RoundTripsExactly) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unif(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = unif(rng) * std::pow(10.0, static_cast<int>(rng() % 9) - 4);
    EXPECT_EQ(std::stod(bgm::format_number(x)), x);
  }
  EXPECT_EQ(bgm::format_number(1.0), "1");
}

TEST(Json, UniCalibrationRoundTripsToIdenticalBytes) {
  const bgm::UniCalibration cal =
      bgm::calibrate(bgm::Interval(0.0, 1.0), bgm::PrivacySpec(1.0, 0.5));
  const std::string text = bgm::to_json(cal);
  const json parsed = json::parse(text);
  bgm::UniCalibration rebuilt;
  rebuilt.sigma_star_sq = parsed["sigma_star_sq"];
  rebuilt.sigma0_sq = parsed["sigma0_sq"];
  rebuilt.residual = parsed["residual"];
  rebuilt.iterations = parsed["iterations"];
  rebuilt.bracket_width = parsed["bracket_width"];
  EXPECT_EQ(bgm::to_json(rebuilt), text);
}

TEST(Json, AuditReportRoundTripsToIdenticalBytes) {
  const bgm::Interval d(0.0, 1.0);
  const bgm::PrivacySpec spec(1.0, 0.5);
  const bgm::AuditReport report = bgm::audit_uni(0.9, d, spec, 64);
  const std::string text = bgm::to_json(report);
  const json parsed = json::parse(text);
  bgm::AuditReport rebuilt;
  rebuilt.sup_log_ratio = parsed["sup_log_ratio"];
  rebuilt.epsilon_target = parsed["epsilon_target"];
  rebuilt.argmax_s =
      parsed["argmax_point"]["s"].get<std::vector<double>>();
  rebuilt.argmax_s_prime =
      parsed["argmax_point"]["s_prime"].get<std::vector<double>>();
  rebuilt.argmax_z =
      parsed["argmax_point"]["z"].get<std::vector<double>>();
  rebuilt.grid_resolution = parsed["grid_resolution"].get<std::vector<int>>();
  rebuilt.passed = parsed["passed"];
  EXPECT_EQ(bgm::to_json(rebuilt), text);
}

TEST(Json, AuditReportSchemaFields) {
  const bgm::AuditReport report =
      bgm::audit_uni(2.0, bgm::Interval(0.0, 1.0), bgm::PrivacySpec(1.0, 0.5),
                     32);
  const json parsed = json::parse(bgm::to_json(report));
  EXPECT_TRUE(parsed.contains("sup_log_ratio"));
  EXPECT_TRUE(parsed.contains("epsilon_target"));
  EXPECT_TRUE(parsed.contains("argmax_point"));
  EXPECT_TRUE(parsed.contains("grid_resolution"));
  EXPECT_TRUE(parsed.contains("passed"));
  EXPECT_EQ(parsed.size(), 5u);
}

TEST(Csv, SchemaAndDeterminism) {
  const std::vector<double> eps = {1.0, 0.5};
  const std::vector<bgm::ExperimentRow> rows = bgm::run_experiment(eps, 2);
  const std::string csv = bgm::to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "epsilon,sigma_gg_sq,sigma_bg_sq,percent_reduction");
  EXPECT_EQ(csv, bgm::to_csv(bgm::run_experiment(eps, 2)));
  // One header plus one line per row.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'),
            static_cast<long>(rows.size()) + 1);
}

TEST(Json, ExperimentRowsParse) {
  const std::vector<double> eps = {1.0};
  const std::vector<bgm::ExperimentRow> rows = bgm::run_experiment(eps, 2);
  const json parsed = json::parse(bgm::to_json(rows));
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_DOUBLE_EQ(parsed[0]["epsilon"], 1.0);
  EXPECT_DOUBLE_EQ(parsed[0]["sigma_gg_sq"], 132.0);
}

}  // namespace
