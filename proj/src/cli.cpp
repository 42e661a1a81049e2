#include "fbmlt/cli.hpp"

#include "fbmlt/error.hpp"
#include "fbmlt/experiments.hpp"
#include "fbmlt/fbm_engine.hpp"
#include "fbmlt/hurst_constants.hpp"
#include "fbmlt/limit_constants.hpp"
#include "fbmlt/local_time.hpp"
#include "fbmlt/path_io.hpp"
#include "fbmlt/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fbmlt::cli {

using nlohmann::json;

namespace {

Beta3HalfMode half_mode_of(const std::string& s) {
  if (s == "zero") return Beta3HalfMode::zero;
  if (s == "formula_limit") return Beta3HalfMode::formula_limit;
  return Beta3HalfMode::literal;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

void emit(const std::string& target, const std::string& text, std::ostream& out) {
  if (target.empty() || target == "-")
    out << text;
  else
    write_text_file(target, text);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

const std::vector<std::string> kHalfModes{"zero", "formula_limit", "literal"};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional Brownian motion additive functionals: constants, simulation, local "
               "time, limit constants and Monte Carlo experiments.",
               "fbmlt"};
  app.require_subcommand(1, 1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = machine parallelism); never changes output")
      ->capture_default_str();

  // constants
  auto* c_const = app.add_subcommand(
      "constants",
      "Volterra normalization C_H, beta1 = C_H/(H-1/2) (H>1/2) or C_H, beta2 = beta1^2/(2H), "
      "beta3(s1,s2) = C_H^2 |H-1/2|^-2 int_0^inf ((t+s1)^(H-1/2) - (t+s2)^(H-1/2))^2 dt, and the "
      "normalizing sequence ell(n,H) (1 above H=1/3, (log n)^-1/2 at H=1/3).");
  double c_H = 0.0;
  std::vector<double> c_b3;
  std::string c_half = "zero", c_out;
  c_const->add_option("--H", c_H, "Hurst index in (0,1)")->required()->check(CLI::Range(0.0, 1.0));
  c_const->add_option("--beta3", c_b3, "s1,s2 at which to evaluate beta3")
      ->delimiter(',')
      ->expected(2);
  c_const->add_option("--beta3-half-mode", c_half, "Treatment of beta3 at H=1/2")
      ->check(CLI::IsMember(kHalfModes))
      ->capture_default_str();
  c_const->add_option("--out", c_out, "Output JSON file (default stdout)");

  // kernel
  auto* c_kernel = app.add_subcommand(
      "kernel",
      "Volterra kernel K_H(t,s) (zero for s >= t), its t-derivative, and optionally "
      "mu(r,s) = int_r^s K_H(s,theta)^2 dtheta.");
  double k_H = 0.0, k_t = 0.0, k_s = 0.0, k_r = -1.0;
  std::string k_out;
  c_kernel->add_option("--H", k_H, "Hurst index in (0,1)")->required()->check(CLI::Range(0.0, 1.0));
  c_kernel->add_option("--t", k_t, "Time t > 0")->required()->check(CLI::PositiveNumber);
  c_kernel->add_option("--s", k_s, "Time s > 0")->required()->check(CLI::PositiveNumber);
  c_kernel->add_option("--r", k_r, "Lower limit r in [0, s] for mu(r, s)")->check(CLI::NonNegativeNumber);
  c_kernel->add_option("--out", k_out, "Output JSON file (default stdout)");

  // simulate
  auto* c_sim = app.add_subcommand(
      "simulate",
      "Sample fBm paths with covariance R(s,t) = (s^2H + t^2H - |t-s|^2H)/2 on a uniform grid "
      "and write them as FBMP binary (.bin) or CSV (.csv).");
  double s_H = 0.0, s_T = 1.0;
  std::size_t s_N = 0, s_count = 1;
  std::uint64_t s_seed = 0;
  std::string s_method = "circulant", s_out;
  double s_budget = 2e9;
  c_sim->add_option("--H", s_H, "Hurst index in (0,1)")->required()->check(CLI::Range(0.0, 1.0));
  c_sim->add_option("--N", s_N, "Grid steps")->required()->check(CLI::Range(std::size_t{1}, std::size_t{1} << 26));
  c_sim->add_option("--count", s_count, "Number of paths")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 30))->capture_default_str();
  c_sim->add_option("--seed", s_seed, "Base seed")->capture_default_str();
  c_sim->add_option("--method", s_method, "Synthesis method")
      ->check(CLI::IsMember({"cholesky", "circulant", "volterra"}))
      ->capture_default_str();
  c_sim->add_option("--T", s_T, "Horizon")->check(CLI::PositiveNumber)->capture_default_str();
  c_sim->add_option("--cost-budget", s_budget, "Refuse if count*(N+1) exceeds this")->capture_default_str();
  c_sim->add_option("--out", s_out, "Output file (.bin for FBMP, .csv for CSV)")->required();

  // localtime
  auto* c_lt = app.add_subcommand(
      "localtime",
      "Local time L_t(lambda) along each path: mollified int_0^t p_eps(B_s - lambda) ds (or the "
      "lambda-derivative via p'_eps), or the truncated Fourier inversion "
      "(1/2pi) int_{|xi|<Xi} int_0^t e^{i xi (B_s - lambda)} ds dxi.");
  std::string l_in, l_out, l_eps = "auto", l_kind = "level", l_est = "mollified";
  double l_lambda = 0.0, l_T = 1.0, l_ximax = 0.0, l_dxi = 0.25;
  c_lt->add_option("--in", l_in, "FBMP path file")->required()->check(CLI::ExistingFile);
  c_lt->add_option("--T", l_T, "Horizon the paths were simulated on")->check(CLI::PositiveNumber)->capture_default_str();
  c_lt->add_option("--lambda", l_lambda, "Level")->capture_default_str();
  c_lt->add_option("--eps", l_eps, "Mollifier variance, or 'auto' for dt^2H")->capture_default_str();
  c_lt->add_option("--kind", l_kind, "level or derivative")
      ->check(CLI::IsMember({"level", "derivative"}))
      ->capture_default_str();
  c_lt->add_option("--estimator", l_est, "mollified or fourier")
      ->check(CLI::IsMember({"mollified", "fourier"}))
      ->capture_default_str();
  c_lt->add_option("--xi-max", l_ximax, "Fourier cutoff (default 1/sqrt(eps))");
  c_lt->add_option("--d-xi", l_dxi, "Fourier grid step")->check(CLI::PositiveNumber)->capture_default_str();
  c_lt->add_option("--out", l_out, "Output CSV (path,t,value); default stdout");

  // limit-const
  auto* c_lim = app.add_subcommand(
      "limit-const",
      "Limit covariance matrix A_H[f_i,f_j], evaluated as "
      "(beta1^2/pi) Gamma(1+1/2H)/(2H) U(H) E(f,g) with E = int |eta|^-1/H Re F conj G deta, "
      "or A_1/3 = (6 beta1^2/sqrt(pi)) m1(f) m1(g) J at H = 1/3; prints the matrix and its PSD "
      "square root.");
  double m_H = 0.0, m_tol = 1e-4;
  std::vector<std::string> m_f;
  std::string m_half = "zero", m_conv = "positive", m_out;
  c_lim->add_option("--H", m_H, "Hurst index in [1/3, 1)")->required()->check(CLI::Range(0.0, 1.0));
  c_lim->add_option("--f", m_f, "Test function, e.g. gaussian_derivative:sigma=1 (repeatable)")
      ->required()
      ->take_all();
  c_lim->add_option("--rel-tol", m_tol, "Relative quadrature tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  c_lim->add_option("--beta3-half-mode", m_half, "Treatment of beta3 at H=1/2")
      ->check(CLI::IsMember(kHalfModes))
      ->capture_default_str();
  c_lim->add_option("--convention", m_conv, "Sign of the eta integrand: positive or literal")
      ->check(CLI::IsMember({"positive", "literal"}))
      ->capture_default_str();
  c_lim->add_option("--out", m_out, "Output JSON file (default stdout)");

  // experiments
  std::string e_config, e_out, e_format = "json";
  auto add_experiment = [&](const char* name, const char* help) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("--config", e_config, "JSON config with ExperimentConfig field names")
        ->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--out", e_out, "Output file (default {experiment}_{H}_{seed}.json)");
    sc->add_option("--format", e_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    return sc;
  };
  auto* c_clt = add_experiment(
      "clt-experiment",
      "Monte Carlo check of the mixed-normal limit of "
      "Z = n^((H+1)/2) ell(n,H) (int_0^t f(n^H(B_s-lambda)) ds - n^-H L_t(lambda) int f): mean Z, "
      "slope of Z^2 on L, and the distance max_theta |E cos(theta Z) - E exp(-theta^2 A L/2)|.");
  auto* c_der = add_experiment(
      "derivative-experiment",
      "Monte Carlo check for H < 1/3 that e_n = n^H (n^H int_0^t f(n^H(B_s-lambda)) ds - L_t m0) "
      "+ (int_0^t p'_eps(B_s - lambda) ds) m1 tends to 0 in L2; reports ||e_n|| and its log-log slope.");

  // report
  auto* c_rep = app.add_subcommand(
      "report", "Plot-ready CSV series and static SVG line charts from an experiment report JSON.");
  std::string r_in, r_dir;
  c_rep->add_option("--in", r_in, "Experiment report JSON")->required()->check(CLI::ExistingFile);
  c_rep->add_option("--plots", r_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*c_const) {
      const HurstConfig hc = make_hurst_config(c_H);
      json j{{"H", c_H},
             {"regime", hc.regime == Regime::subcritical ? "subcritical"
                        : hc.regime == Regime::critical ? "critical"
                                                        : "supercritical"},
             {"c_h", hc.c_h},
             {"beta1", hc.beta1},
             {"beta2", hc.beta2}};
      if (!c_b3.empty()) {
        Beta3Options o;
        o.half_mode = half_mode_of(c_half);
        if (c_b3[0] < 0 || c_b3[1] < 0) throw DomainError("beta3 arguments must be nonnegative");
        const Beta3Result b = beta3_with_error(c_H, c_b3[0], c_b3[1], o);
        j["beta3"] = {{"s1", c_b3[0]}, {"s2", c_b3[1]}, {"value", b.value}, {"error", b.error}};
      }
      if (c_H >= 1.0 / 3.0 || is_critical(c_H)) {
        json table = json::array();
        for (std::uint64_t n = 2; n <= 1024; n *= 2) table.push_back({{"n", n}, {"ell", ell(n, c_H)}});
        j["ell"] = table;
      }
      emit(c_out, j.dump(2) + "\n", out);
      return kExitOk;
    }
    if (*c_kernel) {
      json j{{"H", k_H}, {"t", k_t}, {"s", k_s}, {"K", volterra_kernel(k_H, k_t, k_s)},
             {"dK_dt", volterra_kernel_dt(k_H, k_t, k_s)}};
      if (k_r >= 0.0) {
        if (k_r > k_s) throw DomainError("--r must not exceed --s");
        j["r"] = k_r;
        j["mu"] = mu(k_H, k_r, k_s);
      }
      emit(k_out, j.dump(2) + "\n", out);
      return kExitOk;
    }
    if (*c_sim) {
      const Method m = parse_method(s_method);
      if (m != Method::circulant && s_N > 4096)
        throw DomainError(s_method + " simulation is limited to N <= 4096");
      if (static_cast<double>(s_count) * static_cast<double>(s_N + 1) > s_budget)
        throw CostGuardError("count*(N+1) exceeds --cost-budget");
      if (!ends_with(s_out, ".bin") && !ends_with(s_out, ".csv"))
        throw DomainError("--out must end in .bin or .csv");
      if (s_N > 0xffffffffu || s_count > 0xffffffffu) throw DomainError("N and count must fit in 32 bits");
      const auto paths = sample_paths(s_H, s_T, s_N, s_count, s_seed, m, threads);
      if (ends_with(s_out, ".bin"))
        write_fbmp(s_out, to_path_file(paths));
      else
        write_text_file(s_out, paths_to_csv(paths));
      return kExitOk;
    }
    if (*c_lt) {
      const auto paths = from_path_file(read_fbmp(l_in), l_T);
      if (paths.empty()) throw DomainError("path file holds no paths");
      const double dt = paths.front().dt();
      double eps = 0.0;
      if (l_eps == "auto") {
        eps = default_epsilon(paths.front().H, dt);
      } else {
        try {
          eps = std::stod(l_eps);
        } catch (const std::exception&) {
          throw DomainError("--eps must be 'auto' or a positive number");
        }
        if (!(eps > 0.0)) throw DomainError("--eps must be positive");
      }
      const LocalTimeKind kind = l_kind == "level" ? LocalTimeKind::level : LocalTimeKind::derivative;
      std::ostringstream os;
      os.precision(17);
      os << "path,t,value\n";
      for (const auto& p : paths) {
        const LocalTimeCurve c =
            l_est == "mollified"
                ? mollified_local_time(p, l_lambda, eps, kind)
                : fourier_local_time(p, l_lambda, l_ximax > 0 ? l_ximax : 1.0 / std::sqrt(eps), l_dxi, kind);
        if (!c.warning.empty()) err << "path " << p.index << ": " << c.warning << "\n";
        for (std::size_t k = 0; k < c.values.size(); ++k)
          os << p.index << ',' << p.time(k) << ',' << c.values[k] << '\n';
      }
      emit(l_out, os.str(), out);
      return kExitOk;
    }
    if (*c_lim) {
      if (m_H < 1.0 / 3.0 && !is_critical(m_H)) throw DomainError("limit constants need H >= 1/3");
      std::vector<TestFunction> fs;
      for (const auto& s : m_f) fs.push_back(parse_test_function(s));
      AhOptions o;
      o.rel_tol = m_tol;
      o.beta3.half_mode = half_mode_of(m_half);
      o.convention = m_conv == "positive" ? BetaConvention::positive : BetaConvention::literal;
      const LimitMatrix L = covariance_matrix(fs, m_H, o);
      const json j{{"H", m_H},
                   {"labels", L.labels},
                   {"matrix", matrix_json(L.matrix)},
                   {"sqrt", matrix_json(L.sqrt_matrix)},
                   {"error_estimates", matrix_json(L.errors)}};
      emit(m_out, j.dump(2) + "\n", out);
      return kExitOk;
    }
    if (*c_clt || *c_der) {
      const std::string expected = *c_clt ? "clt" : "derivative";
      json cj;
      try {
        cj = json::parse(read_text_file(e_config));
      } catch (const json::exception& e) {
        throw DomainError(std::string("config is not valid JSON: ") + e.what());
      }
      if (cj.is_object() && !cj.contains("experiment")) cj["experiment"] = expected;
      ExperimentConfig cfg = ExperimentConfig::from_json(cj);
      if (cfg.experiment != expected)
        throw DomainError("config.experiment is '" + cfg.experiment + "' but the subcommand runs '" +
                          expected + "'");
      if (threads > 0) cfg.threads = threads;
      cfg.validate();
      const ExperimentReport r = run_experiment(cfg);
      std::string target = e_out;
      if (target.empty()) {
        std::ostringstream name;
        name << cfg.experiment << '_' << cfg.H << '_' << cfg.seed << '.' << e_format;
        target = name.str();
      }
      emit(target, serialize_report(r, e_format), out);
      return kExitOk;
    }
    if (*c_rep) {
      const ExperimentReport r = deserialize_report(read_text_file(r_in));
      std::filesystem::create_directories(r_dir);
      for (const auto& a : make_plots(r)) write_text_file((std::filesystem::path(r_dir) / a.filename).string(), a.contents);
      return kExitOk;
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const CostGuardError& e) {
    err << "refused: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace fbmlt::cli
