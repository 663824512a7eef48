// Command-line front end for calibrating, sampling, auditing, and
// reproducing the variance-comparison experiment of the bounded Gaussian
// mechanism.
//
// Exit codes: 0 success, 1 failed audit, 2 usage error, 3 domain error,
// 4 numerical non-convergence.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bgm/calibrate_multi.hpp"
#include "bgm/calibrate_uni.hpp"
#include "bgm/graph_queries.hpp"
#include "bgm/privacy_verifier.hpp"
#include "bgm/rng.hpp"
#include "bgm/serialize.hpp"
#include "bgm/special_math.hpp"

namespace {

constexpr int kExitAuditFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitNumerical = 4;

std::vector<double> parse_list(const std::string& text,
                               const std::string& flag) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string token =
        text.substr(start, comma == std::string::npos ? std::string::npos
                                                      : comma - start);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "'" + token + "' is not a number");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

std::string with_warnings(std::string json,
                          const std::vector<std::string>& warnings) {
  if (warnings.empty()) return json;
  std::string extra = ",\"warnings\":[";
  for (std::size_t i = 0; i < warnings.size(); ++i) {
    if (i > 0) extra += ",";
    extra += "\"" + warnings[i] + "\"";
  }
  extra += "]";
  json.insert(json.size() - 1, extra);
  return json;
}

struct Options {
  std::string a_text;
  std::string b_text;
  double epsilon = 0.0;
  double delta_q = 0.0;
  double query_value_unset = 0.0;
  std::string s_text;
  double sigma = 0.0;
  bool sigma_set = false;
  std::uint64_t seed = 0;
  int n_samples = 1;
  int grid_n = 0;
  bool grid_n_set = false;
  int k = 2;
  std::string eps_list_text = "0.1,0.5,1,1.5,2,2.5,3";
  std::string format = "json";
  std::string experiment_format = "csv";
};

bgm::Interval make_interval(const std::vector<double>& a,
                            const std::vector<double>& b) {
  return bgm::Interval(a[0], b[0]);
}

void print_uni_table(const bgm::UniCalibration& cal,
                     const std::vector<std::string>& warnings) {
  std::printf("sigma_star_sq  %s\n", bgm::format_number(cal.sigma_star_sq).c_str());
  std::printf("sigma0_sq      %s\n", bgm::format_number(cal.sigma0_sq).c_str());
  std::printf("residual       %s\n", bgm::format_number(cal.residual).c_str());
  std::printf("iterations     %d\n", cal.iterations);
  std::printf("bracket_width  %s\n", bgm::format_number(cal.bracket_width).c_str());
  for (const auto& w : warnings) std::printf("warning: %s\n", w.c_str());
}

void print_multi_table(const bgm::MultiCalibration& cal,
                       const std::vector<std::string>& warnings) {
  std::printf("sigma_star_sq  %s\n", bgm::format_number(cal.sigma_star_sq).c_str());
  std::printf("sigma0_sq      %s\n", bgm::format_number(cal.sigma0_sq).c_str());
  std::string cs;
  for (std::size_t i = 0; i < cal.c_star.c.size(); ++i) {
    if (i > 0) cs += ",";
    cs += bgm::format_number(cal.c_star.c[i]);
  }
  std::printf("c_star         %s\n", cs.c_str());
  std::printf("residual       %s\n", bgm::format_number(cal.residual).c_str());
  std::printf("iterations     %d\n", cal.iterations);
  for (const auto& w : warnings) std::printf("warning: %s\n", w.c_str());
}

int run_calibrate_uni(const Options& opt) {
  const auto a = parse_list(opt.a_text, "--a");
  const auto b = parse_list(opt.b_text, "--b");
  if (a.size() != 1 || b.size() != 1) {
    throw CLI::ValidationError("--a/--b",
                               "calibrate-uni expects scalar bounds");
  }
  const bgm::Interval d = make_interval(a, b);
  const bgm::PrivacySpec spec(opt.epsilon, opt.delta_q);
  std::vector<std::string> warnings;
  if (spec.delta_q > d.width()) {
    warnings.push_back(
        "delta_q exceeds the domain width; the worst-case shift is clamped "
        "to half the width while the variance formula keeps the raw delta_q");
  }
  const bgm::UniCalibration cal = bgm::calibrate(d, spec);
  if (opt.format == "table") {
    print_uni_table(cal, warnings);
  } else {
    std::printf("%s\n", with_warnings(bgm::to_json(cal), warnings).c_str());
  }
  return 0;
}

int run_calibrate_multi(const Options& opt) {
  const auto a = parse_list(opt.a_text, "--a");
  const auto b = parse_list(opt.b_text, "--b");
  if (a.size() != b.size()) {
    throw CLI::ValidationError("--a/--b", "corner lists differ in length");
  }
  const bgm::Box box(a, b);
  const bgm::PrivacySpec spec(opt.epsilon, opt.delta_q);
  std::vector<std::string> warnings;
  if (spec.delta_q > box.diameter_l2()) {
    warnings.push_back(
        "delta_q exceeds the box diameter; the worst-case shift saturates "
        "while the variance formula keeps the raw delta_q");
  }
  const bgm::MultiCalibration cal = bgm::calibrate_multi(box, spec);
  if (opt.format == "table") {
    print_multi_table(cal, warnings);
  } else {
    std::printf("%s\n", with_warnings(bgm::to_json(cal), warnings).c_str());
  }
  return 0;
}

int run_sample(const Options& opt) {
  const auto a = parse_list(opt.a_text, "--a");
  const auto b = parse_list(opt.b_text, "--b");
  const auto s = parse_list(opt.s_text, "--s");
  if (a.size() != b.size() || s.size() != a.size()) {
    throw CLI::ValidationError("--a/--b/--s", "lists differ in length");
  }
  if (opt.n_samples < 1) {
    throw CLI::ValidationError("--n", "sample count must be >= 1");
  }
  bgm::SplitMix64 rng(opt.seed);
  std::string out = "{";
  if (a.size() == 1) {
    const bgm::Interval d = make_interval(a, b);
    const bgm::PrivacySpec spec(opt.epsilon, opt.delta_q);
    const bgm::UniCalibration cal = bgm::calibrate(d, spec);
    out += "\"sigma_star_sq\":" + bgm::format_number(cal.sigma_star_sq);
    out += ",\"seed\":" + std::to_string(opt.seed);
    out += ",\"samples\":[";
    for (int i = 0; i < opt.n_samples; ++i) {
      if (i > 0) out += ",";
      out += bgm::format_number(bgm::release(s[0], d, spec, cal, rng));
    }
    out += "]}";
  } else {
    const bgm::Box box(a, b);
    const bgm::PrivacySpec spec(opt.epsilon, opt.delta_q);
    const bgm::MultiCalibration cal = bgm::calibrate_multi(box, spec);
    out += "\"sigma_star_sq\":" + bgm::format_number(cal.sigma_star_sq);
    out += ",\"seed\":" + std::to_string(opt.seed);
    out += ",\"samples\":[";
    for (int i = 0; i < opt.n_samples; ++i) {
      if (i > 0) out += ",";
      const std::vector<double> draw =
          bgm::release_multi(s, box, spec, cal, rng);
      out += bgm::detail::json_array(draw);
    }
    out += "]}";
  }
  std::printf("%s\n", out.c_str());
  return 0;
}

int run_audit(const Options& opt) {
  const auto a = parse_list(opt.a_text, "--a");
  const auto b = parse_list(opt.b_text, "--b");
  if (a.size() != b.size()) {
    throw CLI::ValidationError("--a/--b", "corner lists differ in length");
  }
  const bgm::PrivacySpec spec(opt.epsilon, opt.delta_q);
  bgm::AuditReport report;
  if (a.size() == 1) {
    const bgm::Interval d = make_interval(a, b);
    const double sigma = opt.sigma_set
                             ? opt.sigma
                             : std::sqrt(bgm::calibrate(d, spec).sigma_star_sq);
    const int grid_n = opt.grid_n_set ? opt.grid_n : 200;
    report = bgm::audit_uni(sigma, d, spec, grid_n);
  } else {
    const bgm::Box box(a, b);
    const double sigma =
        opt.sigma_set
            ? opt.sigma
            : std::sqrt(bgm::calibrate_multi(box, spec).sigma_star_sq);
    const int grid_n = opt.grid_n_set ? opt.grid_n : 60;
    report = bgm::audit_multi(sigma, box, spec, grid_n);
  }
  std::printf("%s\n", bgm::to_json(report).c_str());
  return report.passed ? 0 : kExitAuditFailed;
}

int run_experiment(const Options& opt) {
  const auto eps = parse_list(opt.eps_list_text, "--eps-list");
  for (double e : eps) {
    if (!(e > 0.0)) {
      throw CLI::ValidationError("--eps-list", "budgets must be positive");
    }
  }
  if (opt.k < 1) {
    throw CLI::ValidationError("--k", "adjacency parameter must be >= 1");
  }
  const std::vector<bgm::ExperimentRow> rows = bgm::run_experiment(eps, opt.k);
  if (opt.experiment_format == "json") {
    std::printf("%s\n", bgm::to_json(rows).c_str());
  } else {
    std::fputs(bgm::to_csv(rows).c_str(), stdout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded Gaussian mechanism: calibration, sampling, auditing, "
               "and the graph-query variance experiment"};
  app.require_subcommand(1);
  Options opt;

  const auto add_domain = [&](CLI::App* cmd) {
    cmd->add_option("--a", opt.a_text, "domain lower bound(s), comma-separated")
        ->required();
    cmd->add_option("--b", opt.b_text, "domain upper bound(s), comma-separated")
        ->required();
  };
  const auto add_privacy = [&](CLI::App* cmd) {
    cmd->add_option("--eps", opt.epsilon, "privacy budget epsilon (> 0)")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--dq", opt.delta_q, "l2 query sensitivity (> 0)")
        ->required()
        ->check(CLI::PositiveNumber);
  };

  CLI::App* cal_uni = app.add_subcommand(
      "calibrate-uni", "calibrate the univariate mechanism on [a, b]");
  add_domain(cal_uni);
  add_privacy(cal_uni);
  cal_uni->add_option("--format", opt.format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));

  CLI::App* cal_multi = app.add_subcommand(
      "calibrate-multi", "calibrate the multivariate mechanism on a box");
  add_domain(cal_multi);
  add_privacy(cal_multi);
  cal_multi->add_option("--format", opt.format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));

  CLI::App* sample = app.add_subcommand(
      "sample", "release private draws of a query value");
  add_domain(sample);
  add_privacy(sample);
  sample->add_option("--s", opt.s_text, "query value(s), comma-separated")
      ->required();
  sample->add_option("--seed", opt.seed, "64-bit generator seed")->required();
  sample->add_option("--n", opt.n_samples, "number of draws (default 1)");

  CLI::App* audit = app.add_subcommand(
      "audit", "grid audit of the worst-case log density ratio");
  add_domain(audit);
  add_privacy(audit);
  audit->add_option("--sigma", opt.sigma,
                    "noise scale to audit (default: calibrated sigma*)")
      ->each([&](const std::string&) { opt.sigma_set = true; });
  audit->add_option("--grid-n", opt.grid_n,
                    "grid points per axis (default 200 uni / 60 multi)")
      ->check(CLI::Range(16, 100000))
      ->each([&](const std::string&) { opt.grid_n_set = true; });

  CLI::App* experiment = app.add_subcommand(
      "experiment", "reproduce the graph-query variance comparison");
  experiment->add_option("--k", opt.k, "edge-adjacency parameter (default 2)");
  experiment->add_option("--eps-list", opt.eps_list_text,
                         "comma-separated privacy budgets");
  experiment->add_option("--format", opt.experiment_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cal_uni->parsed()) return run_calibrate_uni(opt);
    if (cal_multi->parsed()) return run_calibrate_multi(opt);
    if (sample->parsed()) return run_sample(opt);
    if (audit->parsed()) return run_audit(opt);
    if (experiment->parsed()) return run_experiment(opt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const bgm::NonConvergenceError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const bgm::InternalBracketError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const bgm::DenominatorNotPositiveError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const bgm::Error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  }
  return 0;
}
