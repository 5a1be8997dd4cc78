#include "nmvm/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmvm/errors.hpp"
#include "nmvm/fit.hpp"
#include "nmvm/model_io.hpp"
#include "nmvm/optimize.hpp"
#include "nmvm/risk.hpp"

namespace nmvm::cli {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    std::string tok = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start);
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t\r") + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      throw InputError("cannot parse " + what + " entry '" + tok + "'");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InputError("beta must lie in (0, 1), got " + fmt(beta));
}

void check_weights(const NmvmModel& model, const Eigen::VectorXd& w) {
  if (w.size() != model.dim()) {
    throw InputError("expected " + std::to_string(model.dim()) + " weights, got " +
                     std::to_string(w.size()));
  }
}

json diagnostics_json(const RiskResult& r) {
  json d;
  d["error_estimate"] = r.diagnostics.error_estimate;
  d["evaluations"] = r.diagnostics.evaluations;
  d["samples"] = r.diagnostics.samples;
  return d;
}

enum class Approx { TwoPoint, Piecewise, MonteCarlo };

struct ApproxOptions {
  Approx kind = Approx::TwoPoint;
  std::size_t pieces = 101;
  Interpolation interpolation = Interpolation::Step;
  std::size_t samples = 1000000;
  std::uint64_t seed = 42;
};

// Approximate risk of one portfolio; `rng` carries the stream across rows.
RiskResult approximate(const NmvmModel& model, const TransformedModel& tm,
                       const Eigen::VectorXd& w, Measure measure, double beta,
                       const ApproxOptions& opt, Rng& rng) {
  switch (opt.kind) {
    case Approx::TwoPoint:
      return portfolio_risk_two_point(tm, tm.to_x(w), measure, beta,
                                      global_two_point_cache().get(tm, beta));
    case Approx::Piecewise: {
      const PiecewiseTable table =
          build_piecewise_table(tm, measure, beta, uniform_partition(tm.gamma0_norm, opt.pieces),
                                opt.interpolation);
      return portfolio_risk_piecewise(tm, tm.to_x(w), table);
    }
    case Approx::MonteCarlo:
      return mc_risk(project(model, w), measure, beta, opt.samples, rng);
  }
  throw InputError("unknown approximation");
}

void add_approx_options(CLI::App* cmd, ApproxOptions& opt, std::string& interp) {
  cmd->add_option("--pieces", opt.pieces, "Partition points for the piecewise method")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  cmd->add_option("--interpolation", interp, "Piecewise interpolation")
      ->check(CLI::IsMember({"step", "linear"}));
  cmd->add_option("--samples", opt.samples, "Monte Carlo sample size")
      ->check(CLI::Range(std::size_t{10000}, std::size_t{100000000}));
  cmd->add_option("--seed", opt.seed, "Monte Carlo seed");
}

Approx parse_approx(const std::string& s) {
  if (s == "two-point") return Approx::TwoPoint;
  if (s == "piecewise") return Approx::Piecewise;
  return Approx::MonteCarlo;
}

FitConfig parse_fit_config(const std::string& path) {
  FitConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw InputError("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "lambda_mode") {
        const std::string mode = value.get<std::string>();
        if (mode == "fixed") {
          cfg.lambda_mode = LambdaMode::Fixed;
        } else if (mode == "free") {
          cfg.lambda_mode = LambdaMode::Free;
        } else {
          throw InputError("lambda_mode must be 'fixed' or 'free'");
        }
      } else if (key == "lambda") {
        cfg.lambda = value.get<double>();
      } else if (key == "include_mu") {
        cfg.include_mu = value.get<bool>();
      } else if (key == "max_iters") {
        cfg.max_iters = value.get<int>();
      } else if (key == "ll_tol") {
        cfg.ll_tol = value.get<double>();
      } else if (key == "identification") {
        const std::string id = value.get<std::string>();
        if (id == "none") {
          cfg.identification = Identification::None;
        } else if (id == "unit_ez") {
          cfg.identification = Identification::UnitEz;
        } else {
          throw InputError("identification must be 'none' or 'unit_ez'");
        }
      } else {
        throw InputError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::type_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<Eigen::VectorXd> load_portfolios(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open portfolio file '" + path + "'");
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(to_vector(parse_list(line, "weight")));
    } catch (const InputError& e) {
      // A non-numeric first row is a header.
      if (rows.empty() && line_no == 1) continue;
      throw ParseError(e.what(), line_no);
    }
  }
  if (rows.empty()) throw InputError("portfolio file '" + path + "' has no rows");
  return rows;
}

int cmd_fit(const std::string& input, const std::string& config, const std::string& out_path,
            std::ostream& out) {
  const FitConfig cfg = parse_fit_config(config);
  const ReturnsMatrix rm = load_prices(input);
  const FitResult fit = mcecm_fit(rm, cfg);
  save_model(out_path, fit.model);
  json j;
  j["iterations"] = fit.iterations;
  j["log_likelihood"] = fit.log_likelihood_trace.back();
  j["converged"] = fit.converged;
  j["observations"] = rm.values.rows();
  j["dropped_rows"] = rm.dropped_rows;
  j["model"] = out_path;
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_summary(const std::string& input, std::ostream& out) {
  const ReturnsMatrix rm = load_prices(input);
  out << "asset,mean,std,min,max\n";
  for (const AssetSummary& s : summarize(rm)) {
    out << s.asset << ',' << fmt(s.mean) << ',' << fmt(s.std_dev) << ',' << fmt(s.min) << ','
        << fmt(s.max) << '\n';
  }
  return 0;
}

int cmd_risk(const std::string& model_path, const std::string& weights_text,
             const std::string& measure_text, double beta, const std::string& method,
             const ApproxOptions& opt, std::ostream& out) {
  check_beta(beta);
  const NmvmModel model = load_model(model_path);
  const Eigen::VectorXd w = to_vector(parse_list(weights_text, "weight"));
  check_weights(model, w);
  const Measure measure = parse_measure(measure_text);
  const TransformedModel tm = transform(model);
  RiskResult r;
  if (method == "exact") {
    r = portfolio_risk_exact(tm, tm.to_x(w), measure, beta);
  } else {
    Rng rng(opt.seed);
    ApproxOptions o = opt;
    o.kind = parse_approx(method);
    r = approximate(model, tm, w, measure, beta, o, rng);
  }
  json j;
  j["value"] = r.value;
  j["method"] = to_string(r.method);
  j["measure"] = to_string(r.measure);
  j["beta"] = r.beta;
  j["diagnostics"] = diagnostics_json(r);
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_frontier(const std::string& model_path, double rmin, double rmax, int steps, double beta,
                 const std::string& out_path, std::ostream& out, std::ostream& err) {
  check_beta(beta);
  if (steps < 1) throw InputError("steps must be at least 1");
  if (steps > 1 && !(rmin < rmax)) throw InputError("rmin must be below rmax");
  const NmvmModel model = load_model(model_path);
  const TransformedModel tm = transform(model);
  std::vector<double> grid;
  for (int k = 0; k < steps; ++k) {
    grid.push_back(steps == 1 ? rmin : rmin + (rmax - rmin) * k / (steps - 1));
  }
  const std::vector<FrontierPoint> points = frontier(tm, grid, beta);

  std::ostringstream csv;
  csv << "return,cvar,skewness";
  for (Eigen::Index i = 0; i < model.dim(); ++i) csv << ",w" << i + 1;
  csv << ",error\n";
  std::size_t ok = 0;
  std::string first_error;
  for (const FrontierPoint& p : points) {
    csv << fmt(p.target_return) << ',' << fmt(p.cvar) << ',' << fmt(p.skewness);
    for (Eigen::Index i = 0; i < model.dim(); ++i) {
      csv << ',' << (p.weights.size() == model.dim() ? fmt(p.weights(i)) : "nan");
    }
    std::string msg = p.error.value_or("");
    for (char& c : msg) {
      if (c == ',' || c == '\n') c = ';';
    }
    csv << ',' << msg << '\n';
    if (p.error) {
      if (first_error.empty()) first_error = *p.error;
    } else {
      ++ok;
    }
  }
  if (ok == 0) {
    err << "error: every frontier point failed: " << first_error << '\n';
    return 2;
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(out_path);
    if (!f) throw InputError("cannot write '" + out_path + "'");
    f << csv.str();
  }
  return 0;
}

int cmd_compare(const std::string& model_path, const std::string& portfolios_path,
                const std::string& betas_text, const std::string& measure_text,
                const ApproxOptions& opt, std::ostream& out) {
  const NmvmModel model = load_model(model_path);
  const std::vector<Eigen::VectorXd> portfolios = load_portfolios(portfolios_path);
  const std::vector<double> betas = parse_list(betas_text, "beta");
  for (double b : betas) check_beta(b);
  std::vector<Measure> measures;
  if (measure_text == "both") {
    measures = {Measure::VaR, Measure::CVaR};
  } else {
    measures = {parse_measure(measure_text)};
  }
  for (const auto& w : portfolios) check_weights(model, w);
  const TransformedModel tm = transform(model);
  Rng rng(opt.seed);

  out << "portfolio,weights,measure,beta,exact,approx,abs_gap,approx_method,error\n";
  for (std::size_t p = 0; p < portfolios.size(); ++p) {
    const Eigen::VectorXd& w = portfolios[p];
    std::string wtext;
    for (Eigen::Index i = 0; i < w.size(); ++i) wtext += (i ? ";" : "") + fmt(w(i));
    for (const Measure measure : measures) {
      for (const double beta : betas) {
        double exact = std::nan("");
        double approx = std::nan("");
        std::string method;
        std::string error;
        try {
          exact = portfolio_risk_exact(tm, tm.to_x(w), measure, beta).value;
          const RiskResult r = approximate(model, tm, w, measure, beta, opt, rng);
          approx = r.value;
          method = to_string(r.method);
        } catch (const std::exception& e) {
          error = e.what();
          for (char& c : error) {
            if (c == ',' || c == '\n') c = ';';
          }
        }
        out << p + 1 << ',' << wtext << ',' << to_string(measure) << ',' << fmt(beta) << ','
            << fmt(exact) << ',' << fmt(approx) << ',' << fmt(std::abs(exact - approx)) << ','
            << method << ',' << error << '\n';
      }
    }
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk, frontier and fitting tools for normal mean-variance mixture models",
               "nmvm"};
  app.require_subcommand(1);

  std::string input, config, out_path, model_path, weights, measure = "cvar", method = "exact";
  std::string portfolios, betas = "0.1,0.05,0.01", interp = "step", approx = "two-point";
  double beta = 0.05, rmin = 0.0, rmax = 0.0;
  int steps = 0;
  ApproxOptions opt;

  auto* fit = app.add_subcommand("fit", "Fit a GH model to a price CSV by MCECM");
  fit->add_option("--input", input, "Price CSV")->required();
  fit->add_option("--config", config, "JSON fit configuration");
  fit->add_option("--out", out_path, "Model file to write")->required();

  auto* summary = app.add_subcommand("summary", "Per-asset log-return statistics");
  summary->add_option("--input", input, "Price CSV")->required();

  auto* risk = app.add_subcommand("risk", "VaR or CVaR of one portfolio");
  risk->add_option("--model", model_path, "Model file")->required();
  risk->add_option("--weights", weights, "Comma-separated weights")->required();
  risk->add_option("--measure", measure, "var or cvar")
      ->check(CLI::IsMember({"var", "cvar"}, CLI::ignore_case));
  risk->add_option("--beta", beta, "Tail probability");
  risk->add_option("--method", method, "Evaluation method")
      ->check(CLI::IsMember({"exact", "two-point", "piecewise", "mc"}));
  add_approx_options(risk, opt, interp);

  auto* front = app.add_subcommand("frontier", "Mean-risk-skewness efficient frontier as CSV");
  front->add_option("--model", model_path, "Model file")->required();
  front->add_option("--rmin", rmin, "Smallest target return")->required();
  front->add_option("--rmax", rmax, "Largest target return")->required();
  front->add_option("--steps", steps, "Number of grid points")->required();
  front->add_option("--beta", beta, "CVaR tail probability");
  front->add_option("--out", out_path, "CSV file (stdout when omitted)");

  auto* compare = app.add_subcommand("compare", "Exact against approximate risk, as CSV");
  compare->add_option("--model", model_path, "Model file")->required();
  compare->add_option("--portfolios", portfolios, "CSV, one weight row per line")->required();
  compare->add_option("--betas", betas, "Comma-separated tail probabilities");
  compare->add_option("--measure", measure, "var, cvar or both")
      ->check(CLI::IsMember({"var", "cvar", "both"}, CLI::ignore_case));
  compare->add_option("--approx", approx, "Approximation to compare against")
      ->check(CLI::IsMember({"two-point", "piecewise", "mc"}));
  add_approx_options(compare, opt, interp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  opt.interpolation = interp == "linear" ? Interpolation::Linear : Interpolation::Step;
  try {
    if (*fit) return cmd_fit(input, config, out_path, out);
    if (*summary) return cmd_summary(input, out);
    if (*risk) return cmd_risk(model_path, weights, measure, beta, method, opt, out);
    if (*front) return cmd_frontier(model_path, rmin, rmax, steps, beta, out_path, out, err);
    if (*compare) {
      opt.kind = parse_approx(approx);
      return cmd_compare(model_path, portfolios, betas, measure, opt, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace nmvm::cli
