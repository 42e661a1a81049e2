#include "fbmlt/experiments.hpp"

#include "fbmlt/error.hpp"
#include "fbmlt/limit_constants.hpp"
#include "fbmlt/local_time.hpp"
#include "fbmlt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace fbmlt {

using nlohmann::json;

// ---------------------------------------------------------------- config

json ExperimentConfig::to_json() const {
  return json{{"experiment", experiment}, {"H", H},
              {"lambda", lambda},         {"f", f},
              {"t_list", t_list},         {"n_ladder", n_ladder},
              {"path_count", path_count}, {"grid_size", grid_size},
              {"seed", seed},             {"eps_scale", eps_scale},
              {"method", method},         {"beta3_half_mode", beta3_half_mode},
              {"cost_budget", cost_budget}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw DomainError("experiment config must be a JSON object");
  static const std::set<std::string> known{
      "experiment", "H",      "lambda",    "f",      "t_list",          "n_ladder", "path_count",
      "grid_size",  "seed",   "eps_scale", "method", "beta3_half_mode", "threads",  "cost_budget"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw DomainError("unknown config field '" + k + "'");
  ExperimentConfig c;
  try {
    if (j.contains("experiment")) c.experiment = j.at("experiment").get<std::string>();
    if (j.contains("H")) c.H = j.at("H").get<double>();
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("f")) {
      if (j.at("f").is_string())
        c.f = {j.at("f").get<std::string>()};
      else
        c.f = j.at("f").get<std::vector<std::string>>();
    }
    if (j.contains("t_list")) c.t_list = j.at("t_list").get<std::vector<double>>();
    if (j.contains("n_ladder")) c.n_ladder = j.at("n_ladder").get<std::vector<double>>();
    if (j.contains("path_count")) c.path_count = j.at("path_count").get<std::size_t>();
    if (j.contains("grid_size")) c.grid_size = j.at("grid_size").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("eps_scale")) c.eps_scale = j.at("eps_scale").get<double>();
    if (j.contains("method")) c.method = j.at("method").get<std::string>();
    if (j.contains("beta3_half_mode")) c.beta3_half_mode = j.at("beta3_half_mode").get<std::string>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("cost_budget")) c.cost_budget = j.at("cost_budget").get<double>();
  } catch (const json::exception& e) {
    throw DomainError(std::string("experiment config: ") + e.what());
  }
  return c;
}

namespace {

Beta3HalfMode parse_half_mode(const std::string& s) {
  if (s == "zero") return Beta3HalfMode::zero;
  if (s == "formula_limit") return Beta3HalfMode::formula_limit;
  if (s == "literal") return Beta3HalfMode::literal;
  throw DomainError("unknown beta3_half_mode '" + s + "'");
}

double ell_real(double n, double H) {
  if (!is_critical(H)) return 1.0;
  return 1.0 / std::sqrt(std::log(n));
}

std::vector<std::size_t> time_indices(const ExperimentConfig& c) {
  const double T = *std::max_element(c.t_list.begin(), c.t_list.end());
  std::vector<std::size_t> idx;
  for (double t : c.t_list) {
    const double k = t / T * static_cast<double>(c.grid_size);
    const double kr = std::round(k);
    if (std::abs(k - kr) > 1e-9 * std::max(1.0, k))
      throw DomainError("t_list entry " + std::to_string(t) + " is not on the simulation grid");
    idx.push_back(static_cast<std::size_t>(kr));
  }
  return idx;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (experiment != "clt" && experiment != "derivative")
    throw DomainError("experiment must be 'clt' or 'derivative'");
  if (!(H > 0.0 && H < 1.0)) throw DomainError("H must lie in (0,1)");
  if (experiment == "clt" && H < 1.0 / 3.0 && !is_critical(H))
    throw DomainError("clt experiment requires H >= 1/3");
  if (experiment == "derivative" && (H >= 1.0 / 3.0 || is_critical(H)))
    throw DomainError("derivative experiment requires H < 1/3");
  if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
  if (f.empty()) throw DomainError("f must name at least one test function");
  if (experiment == "derivative" && f.size() != 1)
    throw DomainError("derivative experiment takes exactly one test function");
  for (const auto& name : f) {
    const TestFunction tf = parse_test_function(name);
    if (!tf.xi().w1) throw DomainError(name + " is not in Xi_1");
    if (experiment == "clt" && is_critical(H) && !tf.xi().w2)
      throw DomainError(name + " is not in Xi_2, required at H = 1/3");
    if (experiment == "derivative" && !tf.xi().w1_plus_nu)
      throw DomainError(name + " is not in Xi_{1+nu}");
  }
  if (t_list.empty()) throw DomainError("t_list must be nonempty");
  for (double t : t_list)
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t_list entries must be positive");
  if (n_ladder.empty()) throw DomainError("n_ladder must be nonempty");
  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    if (!(n_ladder[i] >= 2.0) || !std::isfinite(n_ladder[i]))
      throw DomainError("n_ladder entries must be >= 2");
    if (i > 0 && !(n_ladder[i] > n_ladder[i - 1]))
      throw DomainError("n_ladder must be strictly increasing");
  }
  if (path_count < 1) throw DomainError("path_count must be >= 1 (empty report)");
  if (grid_size < 2) throw DomainError("grid_size must be >= 2");
  const Method m = parse_method(method);
  if ((m == Method::cholesky || m == Method::volterra) && grid_size > 4096)
    throw DomainError(method + " simulation is limited to grid_size <= 4096");
  if (!(eps_scale > 0.0)) throw DomainError("eps_scale must be positive");
  parse_half_mode(beta3_half_mode);
  time_indices(*this);
  const double N = static_cast<double>(grid_size);
  const double work = static_cast<double>(path_count) * N * std::log2(N) *
                      static_cast<double>(n_ladder.size() + 1);
  if (work > cost_budget)
    throw CostGuardError("experiment exceeds cost budget: path_count * grid_size * log2(grid_size) * "
                         "(ladder length + 1) = " + std::to_string(work) + " > " +
                         std::to_string(cost_budget));
  const double tmax = *std::max_element(t_list.begin(), t_list.end());
  if (N * n_ladder.back() * tmax > 1e12)
    throw CostGuardError("grid_size * max(n_ladder) * max(t_list) exceeds 1e12");
}

// ---------------------------------------------------------------- functionals

double scaled_additive_functional(std::span<const double> values, double dt, std::size_t steps,
                                  double H, const TestFunction& f, double lambda, double n) {
  if (!(n >= 1.0)) throw DomainError("scaled_additive_functional: n must be >= 1");
  if (steps + 1 > values.size()) throw DomainError("scaled_additive_functional: t beyond path");
  if (steps == 0) return 0.0;
  const double s = std::pow(n, H);
  double acc = 0.5 * (f(s * (values[0] - lambda)) + f(s * (values[steps] - lambda)));
  for (std::size_t k = 1; k < steps; ++k) acc += f(s * (values[k] - lambda));
  return acc * dt;
}

double scaled_additive_functional(const FbmPath& path, const TestFunction& f, double lambda,
                                  double n, double t) {
  if (t < 0.0 || t > path.T * (1.0 + 1e-12))
    throw DomainError("scaled_additive_functional: need 0 <= t <= T");
  const auto steps = static_cast<std::size_t>(std::llround(t / path.dt()));
  return scaled_additive_functional(path.values, path.dt(), steps, path.H, f, lambda, n);
}

bool undersampled(const FbmPath& path, const TestFunction& f, double n) {
  double ss = 0.0;
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    const double d = path.values[k] - path.values[k - 1];
    ss += d * d;
  }
  const double rms = std::sqrt(ss / static_cast<double>(std::max<std::size_t>(1, path.N)));
  return std::pow(n, path.H) * rms > f.scale();
}

double compensated_functional_Z(const FbmPath& path, const TestFunction& f, double lambda,
                                double n, double t, double eps) {
  if (path.H < 1.0 / 3.0 && !is_critical(path.H))
    throw DomainError("compensated_functional_Z requires H >= 1/3");
  if (!(eps > 0.0)) throw DomainError("compensated_functional_Z: eps must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(t / path.dt()));
  const double F = scaled_additive_functional(path.values, path.dt(), steps, path.H, f, lambda, n);
  const double m0 = moments(f).m0;
  const double L = m0 == 0.0 ? 0.0
                             : mollified_integral(path.values, path.dt(), steps, lambda, eps,
                                                  LocalTimeKind::level);
  return std::pow(n, 0.5 * (path.H + 1.0)) * ell_real(n, path.H) *
         (F - std::pow(n, -path.H) * L * m0);
}

// ---------------------------------------------------------------- statistics

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return pairwise_sum(xs.data(), xs.size()) / static_cast<double>(xs.size());
}

double slope_through_origin(std::span<const double> x, std::span<const double> y) {
  std::vector<double> xy(x.size()), xx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy[i] = x[i] * y[i];
    xx[i] = x[i] * x[i];
  }
  const double den = pairwise_sum(xx);
  return den > 0.0 ? pairwise_sum(xy) / den : 0.0;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double ks_critical(double alpha, std::size_t n, std::size_t m) {
  const double c = std::sqrt(-0.5 * std::log(0.5 * alpha));
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

// ---------------------------------------------------------------- experiments

namespace {

struct Setup {
  std::vector<TestFunction> fs;
  std::vector<Moments> mom;
  std::vector<std::size_t> tk;
  double T = 1.0;
  double dt = 1.0;
  double eps = 1.0;
};

Setup make_setup(const ExperimentConfig& cfg) {
  cfg.validate();
  Setup s;
  for (const auto& name : cfg.f) {
    s.fs.push_back(parse_test_function(name));
    s.mom.push_back(moments(s.fs.back()));
  }
  s.tk = time_indices(cfg);
  s.T = *std::max_element(cfg.t_list.begin(), cfg.t_list.end());
  s.dt = s.T / static_cast<double>(cfg.grid_size);
  s.eps = default_epsilon(cfg.H, s.dt, cfg.eps_scale);
  return s;
}

json base_audit(const ExperimentConfig& cfg, const Setup& s) {
  return json{{"rng", "mt19937_64 per path, key splitmix64(seed, index); Box-Muller normals"},
              {"seed", cfg.seed},
              {"method", cfg.method},
              {"paths", cfg.path_count},
              {"dt", s.dt},
              {"epsilon", s.eps}};
}

// Column j of per-path values.
std::vector<double> column(const std::vector<PathRecord>& recs, std::size_t j) {
  std::vector<double> out(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) out[i] = recs[i].values[j];
  return out;
}

std::vector<double> column_L(const std::vector<PathRecord>& recs, std::size_t j) {
  std::vector<double> out(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) out[i] = recs[i].L[j];
  return out;
}

}  // namespace

ExperimentReport clt_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment != "clt") throw DomainError("clt_experiment: config.experiment must be 'clt'");
  const Setup s = make_setup(cfg);
  const std::size_t nf = s.fs.size(), nn = cfg.n_ladder.size(), nt = cfg.t_list.size();
  const std::size_t M = cfg.path_count;
  const double H = cfg.H;

  AhOptions aopt;
  aopt.beta3.half_mode = parse_half_mode(cfg.beta3_half_mode);
  const LimitMatrix A = covariance_matrix(s.fs, H, aopt);

  const PathSampler sampler(H, s.T, cfg.grid_size, cfg.seed, parse_method(cfg.method));
  ExperimentReport rep;
  rep.config = cfg.to_json();
  rep.per_path.resize(M);
  std::vector<std::uint8_t> under(M * nf * nn, 0);
  std::vector<double> first_order(M * nf * nn * nt, 0.0);

  parallel_for(M, cfg.threads, [&](std::size_t i) {
    thread_local std::vector<double> values;
    sampler.sample_into(i, values);
    PathRecord& r = rep.per_path[i];
    r.index = i;
    r.L.resize(nt);
    for (std::size_t ti = 0; ti < nt; ++ti)
      r.L[ti] = mollified_integral(values, s.dt, s.tk[ti], cfg.lambda, s.eps, LocalTimeKind::level);
    r.values.assign(nf * nn * nt, 0.0);
    double ss = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k)
      ss += (values[k] - values[k - 1]) * (values[k] - values[k - 1]);
    const double rms = std::sqrt(ss / static_cast<double>(cfg.grid_size));
    for (std::size_t fi = 0; fi < nf; ++fi) {
      for (std::size_t ni = 0; ni < nn; ++ni) {
        const double n = cfg.n_ladder[ni];
        const double nH = std::pow(n, H);
        under[(i * nf + fi) * nn + ni] = nH * rms > s.fs[fi].scale();
        const double pre = std::pow(n, 0.5 * (H + 1.0)) * ell_real(n, H);
        for (std::size_t ti = 0; ti < nt; ++ti) {
          const double F =
              scaled_additive_functional(values, s.dt, s.tk[ti], H, s.fs[fi], cfg.lambda, n);
          const double comp = F - r.L[ti] * s.mom[fi].m0 / nH;
          r.values[(fi * nn + ni) * nt + ti] = pre * comp;
          const double fo = nH * F - r.L[ti] * s.mom[fi].m0;
          first_order[((i * nf + fi) * nn + ni) * nt + ti] = fo * fo;
        }
      }
    }
  });

  // Aggregates, always in path order.
  json series = json::array();
  json cross_time = json::array();
  json cross_f = json::array();
  std::size_t under_total = 0;
  for (auto u : under) under_total += u;
  const double sqrtM = std::sqrt(static_cast<double>(M));
  for (std::size_t fi = 0; fi < nf; ++fi) {
    const double a_hat = A.matrix(fi, fi);
    for (std::size_t ni = 0; ni < nn; ++ni) {
      for (std::size_t ti = 0; ti < nt; ++ti) {
        const auto Z = column(rep.per_path, (fi * nn + ni) * nt + ti);
        const auto L = column_L(rep.per_path, ti);
        const double mz = mean_of(Z);
        std::vector<double> dev(M), z2(M);
        for (std::size_t i = 0; i < M; ++i) {
          dev[i] = (Z[i] - mz) * (Z[i] - mz);
          z2[i] = Z[i] * Z[i];
        }
        const double var = M > 1 ? pairwise_sum(dev) / static_cast<double>(M - 1) : 0.0;
        const double se = std::sqrt(var) / sqrtM;
        const double slope = slope_through_origin(L, z2);
        const double mL = mean_of(L);
        // characteristic-function distance
        double D = 0.0;
        const double scale = std::sqrt(a_hat * mL);
        if (scale > 0.0) {
          std::vector<double> c1(M), c2(M);
          for (int k = 0; k < 16; ++k) {
            const double th = (0.2 + (3.0 - 0.2) * k / 15.0) / scale;
            for (std::size_t i = 0; i < M; ++i) {
              c1[i] = std::cos(th * Z[i]);
              c2[i] = std::exp(-0.5 * th * th * a_hat * L[i]);
            }
            D = std::max(D, std::abs(mean_of(c1) - mean_of(c2)));
          }
        }
        std::vector<double> fo(M);
        for (std::size_t i = 0; i < M; ++i) fo[i] = first_order[((i * nf + fi) * nn + ni) * nt + ti];
        std::size_t und = 0;
        for (std::size_t i = 0; i < M; ++i) und += under[(i * nf + fi) * nn + ni];
        series.push_back(json{{"f", cfg.f[fi]},
                              {"n", cfg.n_ladder[ni]},
                              {"t", cfg.t_list[ti]},
                              {"mean_Z", mz},
                              {"se_Z", se},
                              {"mean_L", mL},
                              {"slope", slope},
                              {"a_hat", a_hat},
                              {"slope_rel_err", a_hat != 0.0 ? (slope - a_hat) / a_hat : 0.0},
                              {"char_distance", D},
                              {"first_order_l2", mean_of(fo)},
                              {"undersampled_paths", und}});
        for (std::size_t tj = ti + 1; tj < nt; ++tj) {
          const auto Z2 = column(rep.per_path, (fi * nn + ni) * nt + tj);
          std::vector<double> prod(M);
          for (std::size_t i = 0; i < M; ++i) prod[i] = Z[i] * Z2[i];
          const double t_min_first = cfg.t_list[ti] <= cfg.t_list[tj];
          const auto Lmin = column_L(rep.per_path, t_min_first ? ti : tj);
          cross_time.push_back(json{{"f", cfg.f[fi]},
                                    {"n", cfg.n_ladder[ni]},
                                    {"t1", cfg.t_list[ti]},
                                    {"t2", cfg.t_list[tj]},
                                    {"cov_empirical", mean_of(prod)},
                                    {"cov_predicted", a_hat * mean_of(Lmin)}});
        }
      }
    }
  }
  for (std::size_t fi = 0; fi < nf; ++fi)
    for (std::size_t fj = fi + 1; fj < nf; ++fj)
      for (std::size_t ni = 0; ni < nn; ++ni)
        for (std::size_t ti = 0; ti < nt; ++ti) {
          const auto Zi = column(rep.per_path, (fi * nn + ni) * nt + ti);
          const auto Zj = column(rep.per_path, (fj * nn + ni) * nt + ti);
          const auto L = column_L(rep.per_path, ti);
          std::vector<double> prod(M);
          for (std::size_t i = 0; i < M; ++i) prod[i] = Zi[i] * Zj[i];
          cross_f.push_back(json{{"f_i", cfg.f[fi]},
                                 {"f_j", cfg.f[fj]},
                                 {"n", cfg.n_ladder[ni]},
                                 {"t", cfg.t_list[ti]},
                                 {"slope", slope_through_origin(L, prod)},
                                 {"a_ij", A.matrix(fi, fj)}});
        }
  json amat = json::array();
  for (Eigen::Index i = 0; i < A.matrix.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < A.matrix.cols(); ++j) row.push_back(A.matrix(i, j));
    amat.push_back(row);
  }
  rep.aggregates = json{{"series", series},
                        {"cross_time", cross_time},
                        {"cross_f", cross_f},
                        {"limit_matrix", amat}};
  rep.audit = base_audit(cfg, s);
  rep.audit["undersampled_path_count"] = under_total;
  return rep;
}

ExperimentReport derivative_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment != "derivative")
    throw DomainError("derivative_experiment: config.experiment must be 'derivative'");
  const Setup s = make_setup(cfg);
  const std::size_t nn = cfg.n_ladder.size(), nt = cfg.t_list.size();
  const std::size_t M = cfg.path_count;
  const double H = cfg.H;
  const TestFunction& f = s.fs[0];
  const Moments mo = s.mom[0];

  const PathSampler sampler(H, s.T, cfg.grid_size, cfg.seed, parse_method(cfg.method));
  ExperimentReport rep;
  rep.config = cfg.to_json();
  rep.per_path.resize(M);
  std::vector<double> first_order(M * nn * nt, 0.0);
  std::vector<std::uint8_t> under(M * nn, 0);

  parallel_for(M, cfg.threads, [&](std::size_t i) {
    thread_local std::vector<double> values;
    sampler.sample_into(i, values);
    PathRecord& r = rep.per_path[i];
    r.index = i;
    r.L.resize(nt);
    r.Lprime.resize(nt);
    for (std::size_t ti = 0; ti < nt; ++ti) {
      r.L[ti] = mollified_integral(values, s.dt, s.tk[ti], cfg.lambda, s.eps, LocalTimeKind::level);
      r.Lprime[ti] =
          mollified_integral(values, s.dt, s.tk[ti], cfg.lambda, s.eps, LocalTimeKind::derivative);
    }
    double ss = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k)
      ss += (values[k] - values[k - 1]) * (values[k] - values[k - 1]);
    const double rms = std::sqrt(ss / static_cast<double>(cfg.grid_size));
    r.values.assign(nn * nt, 0.0);
    for (std::size_t ni = 0; ni < nn; ++ni) {
      const double n = cfg.n_ladder[ni];
      const double nH = std::pow(n, H);
      under[i * nn + ni] = nH * rms > f.scale();
      for (std::size_t ti = 0; ti < nt; ++ti) {
        const double F = scaled_additive_functional(values, s.dt, s.tk[ti], H, f, cfg.lambda, n);
        const double fo = nH * F - r.L[ti] * mo.m0;
        first_order[(i * nn + ni) * nt + ti] = fo * fo;
        // d/dlambda L = -int p'_eps(B_s - lambda) ds, hence the plus sign.
        r.values[ni * nt + ti] = nH * fo + r.Lprime[ti] * mo.m1;
      }
    }
  });

  json series = json::array();
  json fits = json::array();
  std::size_t under_total = 0;
  for (auto u : under) under_total += u;
  for (std::size_t ti = 0; ti < nt; ++ti) {
    std::vector<double> logn, loge;
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t ni = 0; ni < nn; ++ni) {
      const auto e = column(rep.per_path, ni * nt + ti);
      std::vector<double> e2(M), fo(M);
      for (std::size_t i = 0; i < M; ++i) {
        e2[i] = e[i] * e[i];
        fo[i] = first_order[(i * nn + ni) * nt + ti];
      }
      const double norm = std::sqrt(mean_of(e2));
      decreasing = decreasing && norm < prev;
      prev = norm;
      logn.push_back(std::log(cfg.n_ladder[ni]));
      loge.push_back(std::log(norm));
      std::size_t und = 0;
      for (std::size_t i = 0; i < M; ++i) und += under[i * nn + ni];
      series.push_back(json{{"n", cfg.n_ladder[ni]},
                            {"t", cfg.t_list[ti]},
                            {"e_norm", norm},
                            {"mean_e", mean_of(e)},
                            {"first_order_l2", mean_of(fo)},
                            {"undersampled_paths", und}});
    }
    fits.push_back(json{{"t", cfg.t_list[ti]},
                        {"loglog_slope", nn > 1 ? ols_slope(logn, loge) : 0.0},
                        {"strictly_decreasing", decreasing}});
  }
  rep.aggregates = json{{"series", series}, {"fits", fits}, {"m0", mo.m0}, {"m1", mo.m1}};
  rep.audit = base_audit(cfg, s);
  rep.audit["undersampled_path_count"] = under_total;
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "clt") return clt_experiment(cfg);
  if (cfg.experiment == "derivative") return derivative_experiment(cfg);
  throw DomainError("experiment must be 'clt' or 'derivative'");
}

// ---------------------------------------------------------------- serialization

namespace {

json record_to_json(const PathRecord& r) {
  json j{{"index", r.index}, {"L", r.L}, {"values", r.values}};
  if (!r.Lprime.empty()) j["Lprime"] = r.Lprime;
  return j;
}

}  // namespace

std::string serialize_report(const ExperimentReport& r, const std::string& format) {
  if (format == "json") {
    json per = json::array();
    for (const auto& rec : r.per_path) per.push_back(record_to_json(rec));
    const json j{{"config", r.config}, {"per_path", per}, {"aggregates", r.aggregates},
                 {"audit", r.audit}};
    return j.dump(1) + "\n";
  }
  if (format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "path,f,n,t,L,value\n";
    const json& c = r.config;
    const auto fl = c.value("f", std::vector<std::string>{});
    const auto nl = c.value("n_ladder", std::vector<double>{});
    const auto tl = c.value("t_list", std::vector<double>{});
    const bool clt = c.value("experiment", std::string("clt")) == "clt";
    const std::size_t nf = clt ? fl.size() : 1;
    for (const auto& rec : r.per_path) {
      for (std::size_t fi = 0; fi < nf; ++fi)
        for (std::size_t ni = 0; ni < nl.size(); ++ni)
          for (std::size_t ti = 0; ti < tl.size(); ++ti) {
            const std::size_t j = (fi * nl.size() + ni) * tl.size() + ti;
            if (j >= rec.values.size() || ti >= rec.L.size())
              throw DomainError("serialize_report: record shape does not match config");
            os << rec.index << ",\"" << (fi < fl.size() ? fl[fi] : "") << "\"," << nl[ni]
               << ',' << tl[ti] << ',' << rec.L[ti] << ',' << rec.values[j] << '\n';
          }
    }
    return os.str();
  }
  throw DomainError("serialize_report: format must be 'json' or 'csv'");
}

ExperimentReport deserialize_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("report is not valid JSON: ") + e.what());
  }
  ExperimentReport r;
  try {
    r.config = j.at("config");
    r.aggregates = j.at("aggregates");
    r.audit = j.at("audit");
    for (const auto& p : j.at("per_path")) {
      PathRecord rec;
      rec.index = p.at("index").get<std::uint64_t>();
      rec.L = p.at("L").get<std::vector<double>>();
      rec.values = p.at("values").get<std::vector<double>>();
      if (p.contains("Lprime")) rec.Lprime = p.at("Lprime").get<std::vector<double>>();
      r.per_path.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("report JSON lacks a required field: ") + e.what());
  }
  return r;
}

}  // namespace fbmlt
