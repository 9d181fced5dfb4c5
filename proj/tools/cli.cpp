#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "unml/core_stats.hpp"
#include "unml/csv.hpp"
#include "unml/error.hpp"
#include "unml/gaussian_nml.hpp"
#include "unml/genlogistic.hpp"
#include "unml/mc_oracle.hpp"
#include "unml/mixture_select.hpp"

namespace unml::cli {

namespace {

using nlohmann::ordered_json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string input;
  std::string output;
  bool header = false;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string unit = "nats";
};

struct DomainFlags {
  double R = 1.0;
  std::string eps1 = "auto";
  std::optional<double> eps2;
  std::optional<double> eps2_cap;
};

Dataset load_dataset(const CommonFlags& flags) {
  std::ifstream in(flags.input);
  if (!in) throw IoError("cannot open input file '" + flags.input + "'");
  return csv::read_dataset(in, {.header = flags.header});
}

std::vector<double> load_column(const CommonFlags& flags) {
  std::ifstream in(flags.input);
  if (!in) throw IoError("cannot open input file '" + flags.input + "'");
  return csv::read_column(in, {.header = flags.header});
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open output file '" + path + "'");
  file << text;
  if (!file) throw IoError("failed writing '" + path + "'");
}

double unit_factor(const std::string& unit) {
  return unit == "bits" ? 1.0 / std::numbers::ln2 : 1.0;
}

ordered_json spec_json(const DomainSpec& spec) {
  return ordered_json{{"R", spec.R()},
                      {"eps1", std::vector<double>(spec.eps1().begin(), spec.eps1().end())},
                      {"eps2", std::vector<double>(spec.eps2().begin(), spec.eps2().end())},
                      {"eps2_cap", spec.eps2_cap()}};
}

// eps1 is a placeholder equal to eps2 when the policy is "auto".
DomainSpec build_spec(int m, const DomainFlags& flags, bool allow_auto_eps1) {
  const double cap = flags.eps2_cap.value_or(default_eps2_cap(m));
  const double eps2 = flags.eps2.value_or(cap);
  double eps1 = eps2;
  if (flags.eps1 != "auto") {
    try {
      std::size_t used = 0;
      eps1 = std::stod(flags.eps1, &used);
      if (used != flags.eps1.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(Errc::invalid_input, "--eps1 must be 'auto' or a number");
    }
  } else if (!allow_auto_eps1) {
    throw Error(Errc::invalid_input, "--eps1 auto is not supported by this command");
  }
  return DomainSpec::uniform(m, flags.R, eps1, eps2, cap);
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_input) {
  if (with_input) {
    cmd->add_option("-i,--input", flags.input, "CSV input, one observation per row")->required();
    cmd->add_flag("--header", flags.header, "Skip the first line of the input");
  }
  cmd->add_option("-o,--output", flags.output, "Write the report here instead of stdout");
}

void add_domain(CLI::App* cmd, DomainFlags& flags) {
  cmd->add_option("--R", flags.R, "Bound on the squared norm of the mean")->capture_default_str();
  cmd->add_option("--eps2", flags.eps2, "Upper eigenvalue bound (default: eps2 cap)");
  cmd->add_option("--eps2-cap", flags.eps2_cap,
                  "Global eigenvalue cap < 1 (default: 0.99 x orthogonal-volume limit)");
}

std::string cmd_select(const CommonFlags& common, const DomainFlags& domain, int k_min, int k_max,
                       int restarts, double margin) {
  const auto raw = load_dataset(common);
  const int m = static_cast<int>(raw.m());
  const auto spec = build_spec(m, domain, true);

  const auto scale = choose_scale(raw, spec, margin);
  const auto data = scale_dataset(raw, scale.alpha);

  mixture::SelectOptions options;
  options.restarts = restarts;
  options.workers = common.workers;
  options.eps1_mode = domain.eps1 == "auto" ? mixture::Eps1Mode::derived : mixture::Eps1Mode::fixed;
  auto report = mixture::select_K(data, {k_min, k_max}, spec, common.seed, options);
  report.alpha = scale.alpha;

  const double f = unit_factor(common.unit);
  ordered_json entries = ordered_json::array();
  for (const auto& e : report.entries) {
    ordered_json j{{"K", e.K}, {"status", mixture::to_string(e.status)}};
    if (e.status == mixture::KStatus::ok) {
      j["data_term"] = e.data_term * f;
      j["log_norm"] = e.log_norm * f;
      j["total"] = e.total * f;
      j["best_restart"] = e.best_restart;
      j["in_domain"] = e.in_domain;
      j["counts"] = std::vector<std::int64_t>(e.assignment.counts().begin(), e.assignment.counts().end());
      std::vector<int> labels;
      labels.reserve(static_cast<std::size_t>(e.assignment.n()));
      for (int l : e.assignment.labels()) labels.push_back(l + 1);
      j["assignment"] = std::move(labels);
    }
    entries.push_back(std::move(j));
  }

  ordered_json out{{"command", "select"},
                   {"unit", common.unit},
                   {"n", raw.n()},
                   {"m", m},
                   {"alpha", report.alpha},
                   {"scale_degenerate", scale.degenerate},
                   {"seed", report.seed},
                   {"restarts", report.restarts},
                   {"eps1_policy", domain.eps1 == "auto" ? "auto" : "fixed"},
                   {"spec", spec_json(*report.spec)},
                   {"selected_K", report.selected_K},
                   {"entries", std::move(entries)}};
  return out.dump(2) + "\n";
}

std::string cmd_genlog(const CommonFlags& common, double theta_min, double theta_max) {
  const auto x = load_column(common);
  const genlog::GenLogisticSpec spec(theta_min, theta_max);
  const double theta = genlog::mle(x);
  const double total = genlog::codelength(x, spec);
  const double norm = genlog::log_norm(static_cast<std::int64_t>(x.size()), spec);
  const double f = unit_factor(common.unit);
  ordered_json out{{"command", "genlog"},
                   {"unit", common.unit},
                   {"n", x.size()},
                   {"theta_min", theta_min},
                   {"theta_max", theta_max},
                   {"theta_hat", theta},
                   {"data_term", (total - norm) * f},
                   {"log_norm", norm * f},
                   {"codelength", total * f}};
  return out.dump(2) + "\n";
}

std::string cmd_verify(const CommonFlags& common, const DomainFlags& domain, int m, std::int64_t n,
                       std::int64_t samples, bool& pass) {
  if (samples < 10'000) throw Error(Errc::invalid_input, "--samples must be >= 10000");
  const auto spec = build_spec(m, domain, false);
  const auto est = oracle::mc_log_C_dataspace(m, n, spec, samples, common.seed, common.workers);
  const double bound = gaussian::log_Cu(m, n, spec);
  pass = est.log_value + 3.0 * est.std_error_log < bound;

  ordered_json out{{"command", "verify"},
                   {"m", m},
                   {"n", n},
                   {"samples", samples},
                   {"seed", common.seed},
                   {"spec", spec_json(spec)},
                   {"estimate", est.log_value},
                   {"stderr", est.std_error_log},
                   {"accepted", est.accepted},
                   {"log_volume", est.log_volume},
                   {"bound", bound},
                   {"pass", pass}};
  if (m == 1) {
    out["exact"] = gaussian::exact_log_C_m1(n, spec);
    out["quadrature"] = oracle::quad_log_C_m1(n, spec);
  }
  return out.dump(2) + "\n";
}

std::string cmd_scale(const CommonFlags& common, const DomainFlags& domain, double margin,
                      std::ostream& err) {
  const auto raw = load_dataset(common);
  const int m = static_cast<int>(raw.m());
  const auto spec = build_spec(m, domain, true);
  const auto scale = choose_scale(raw, spec, margin);
  const auto data = scale_dataset(raw, scale.alpha);
  const auto check = check_domain(compute_mle(data), spec);

  std::ostringstream csv_text;
  csv::write_dataset(csv_text, data);
  ordered_json summary{{"command", "scale"},
                       {"alpha", scale.alpha},
                       {"degenerate", scale.degenerate},
                       {"upper_constraints_met", true}};
  for (const auto& c : check.violations())
    if (!c.name.starts_with("eigenvalue_lower")) summary["upper_constraints_met"] = false;
  err << summary.dump() << "\n";
  return csv_text.str();
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::singular_covariance:
    case Errc::degenerate_estimate:
      return kNumericalFailure;
    default:
      return kInvalidConfig;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Upper-bound NML code-lengths and model selection for Gaussian mixtures", "unml"};
  app.require_subcommand(1);

  CommonFlags common;
  DomainFlags domain;
  int k_min = 1, k_max = 4, restarts = 8, m = 1;
  double margin = 1.05, theta_min = 0.0, theta_max = 0.0;
  std::int64_t n = 3, samples = 1'000'000;

  auto* select = app.add_subcommand("select", "Choose K by minimizing the uNML code-length");
  add_common(select, common, true);
  add_domain(select, domain);
  select->add_option("--eps1", domain.eps1, "Lower eigenvalue bound, or 'auto'")->capture_default_str();
  select->add_option("--k-min", k_min)->capture_default_str()->check(CLI::PositiveNumber);
  select->add_option("--k-max", k_max)->capture_default_str()->check(CLI::PositiveNumber);
  select->add_option("--restarts", restarts)->capture_default_str()->check(CLI::PositiveNumber);
  select->add_option("--margin", margin, "Scale margin >= 1")->capture_default_str();
  select->add_option("--seed", common.seed)->capture_default_str();
  select->add_option("--workers", common.workers, "Threads (0 = all cores)")->capture_default_str();
  select->add_option("--unit", common.unit)->check(CLI::IsMember({"nats", "bits"}))->capture_default_str();

  auto* genlog_cmd = app.add_subcommand("genlog", "NML code-length of a generalized-logistic sample");
  add_common(genlog_cmd, common, true);
  genlog_cmd->add_option("--theta-min", theta_min)->required();
  genlog_cmd->add_option("--theta-max", theta_max)->required();
  genlog_cmd->add_option("--unit", common.unit)->check(CLI::IsMember({"nats", "bits"}))->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Monte Carlo check that C(M,n) < C_u(M,n)");
  add_common(verify, common, false);
  add_domain(verify, domain);
  verify->add_option("--eps1", domain.eps1, "Lower eigenvalue bound");
  verify->add_option("--m", m)->capture_default_str()->check(CLI::PositiveNumber);
  verify->add_option("--n", n)->capture_default_str();
  verify->add_option("--samples", samples)->capture_default_str();
  verify->add_option("--seed", common.seed)->capture_default_str();
  verify->add_option("--workers", common.workers, "Threads (0 = all cores)")->capture_default_str();

  auto* scale = app.add_subcommand("scale", "Rescale a dataset into the restricted domain");
  add_common(scale, common, true);
  add_domain(scale, domain);
  scale->add_option("--margin", margin, "Scale margin >= 1")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kInvalidConfig;
  }

  try {
    std::string text;
    int rc = kOk;
    if (select->parsed()) {
      text = cmd_select(common, domain, k_min, k_max, restarts, margin);
    } else if (genlog_cmd->parsed()) {
      text = cmd_genlog(common, theta_min, theta_max);
    } else if (verify->parsed()) {
      if (domain.eps1 == "auto") domain.eps1 = "0.01";
      if (!domain.eps2) domain.eps2 = 0.25;
      bool pass = false;
      text = cmd_verify(common, domain, m, n, samples, pass);
      rc = pass ? kOk : kBoundViolated;
    } else if (scale->parsed()) {
      text = cmd_scale(common, domain, margin, err);
    }
    emit(text, common.output, out);
    return rc;
  } catch (const IoError& e) {
    err << "unml: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "unml: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

}  // namespace unml::cli
