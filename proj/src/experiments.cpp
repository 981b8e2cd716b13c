#include "matmcmc/experiments.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include <chrono>

#include "matmcmc/csv.hpp"
#include "matmcmc/diagnostics.hpp"
#include "matmcmc/drift.hpp"
#include "matmcmc/kernels.hpp"
#include "matmcmc/sv.hpp"

namespace matmcmc {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

const json& require(const json& j, const std::string& field) {
  if (!j.contains(field)) config_fail(field, "missing");
  return j.at(field);
}

double require_number(const json& j, const std::string& field) {
  const json& v = require(j, field);
  if (!v.is_number()) config_fail(field, "expected a number");
  return v.get<double>();
}

long long require_integer(const json& j, const std::string& field) {
  const json& v = require(j, field);
  if (!v.is_number_integer()) config_fail(field, "expected an integer");
  return v.get<long long>();
}

std::string require_string(const json& j, const std::string& field) {
  const json& v = require(j, field);
  if (!v.is_string()) config_fail(field, "expected a string");
  return v.get<std::string>();
}

double number_or(const json& j, const std::string& field, double fallback) {
  if (!j.contains(field)) return fallback;
  if (!j.at(field).is_number()) config_fail(field, "expected a number");
  return j.at(field).get<double>();
}

long long integer_or(const json& j, const std::string& field, long long fallback) {
  if (!j.contains(field)) return fallback;
  if (!j.at(field).is_number_integer()) config_fail(field, "expected an integer");
  return j.at(field).get<long long>();
}

// Matrix spec: {"kind":"identity","dim":q} or {"kind":"scaled_identity","dim":q,
// "scale":c} or {"kind":"matrix","data":[[...]]} or
// {"kind":"wishart_draw","dim":q,"dof":r,"seed":s}.
SpdMatrix parse_spd(const json& j, const std::string& field, int expected_dim = -1) {
  if (!j.is_object()) config_fail(field, "expected an object");
  const std::string kind = require_string(j, "kind");
  SpdMatrix out = SpdMatrix::identity(1);
  if (kind == "identity" || kind == "scaled_identity") {
    const int dim = expected_dim > 0 ? expected_dim
                                     : static_cast<int>(require_integer(j, "dim"));
    const double scale = kind == "identity" ? 1.0 : require_number(j, "scale");
    if (!(scale > 0.0)) config_fail(field + ".scale", "must be positive");
    out = SpdMatrix::trusted(scale * Eigen::MatrixXd::Identity(dim, dim));
  } else if (kind == "matrix") {
    const json& data = require(j, "data");
    if (!data.is_array() || data.empty()) config_fail(field + ".data", "expected a nonempty array of rows");
    const int n = static_cast<int>(data.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
      if (!data[i].is_array() || static_cast<int>(data[i].size()) != n) {
        config_fail(field + ".data", "expected a square row-major array");
      }
      for (int k = 0; k < n; ++k) m(i, k) = data[i][k].get<double>();
    }
    try {
      out = SpdMatrix(m);
    } catch (const std::exception& e) {
      config_fail(field + ".data", e.what());
    }
  } else if (kind == "wishart_draw") {
    const int dim = static_cast<int>(require_integer(j, "dim"));
    const double dof = require_number(j, "dof");
    const auto seed = static_cast<std::uint64_t>(require_integer(j, "seed"));
    if (!(dof > dim - 1)) config_fail(field + ".dof", "needs dof > dim - 1");
    Rng rng(seed, 0xD1CEu);
    out = sample_wishart({dof, SpdMatrix::identity(dim)}, rng);
  } else {
    config_fail(field + ".kind", "unknown kind '" + kind + "'");
  }
  if (expected_dim > 0 && out.dim() != expected_dim) {
    config_fail(field, "dimension mismatch");
  }
  return out;
}

struct TargetSpec {
  std::string family;  // wishart | inverse-wishart
  WishartParams params{2.0, SpdMatrix::identity(1)};
};

TargetSpec parse_target(const json& j) {
  if (!j.is_object()) config_fail("target", "expected an object");
  TargetSpec spec;
  spec.family = require_string(j, "family");
  if (spec.family != "wishart" && spec.family != "inverse-wishart") {
    config_fail("target.family", "expected 'wishart' or 'inverse-wishart'");
  }
  spec.params.dof = require_number(j, "dof");
  spec.params.scale = parse_spd(require(j, "scale"), "target.scale");
  if (!(spec.params.dof > spec.params.scale.dim() - 1)) {
    config_fail("target.dof", "the constraint r > q - 1 is violated");
  }
  return spec;
}

SpdTarget make_spd_target(const TargetSpec& spec) {
  return spec.family == "wishart" ? wishart_spd_target(spec.params)
                                  : invwishart_spd_target(spec.params);
}

SpdMatrix target_true_mean(const TargetSpec& spec) {
  const int q = spec.params.scale.dim();
  if (spec.family == "wishart") {
    return SpdMatrix::trusted(spec.params.dof * spec.params.scale.mat());
  }
  if (!(spec.params.dof > q + 1)) {
    config_fail("target.dof", "inverse-wishart mean needs r > q + 1");
  }
  return SpdMatrix::trusted(spec.params.scale.mat() / (spec.params.dof - q - 1));
}

KernelConfig parse_kernel(const json& j, int q) {
  if (!j.is_object()) config_fail("kernel", "expected an object");
  const std::string kind = require_string(j, "kind");
  const int p = static_cast<int>(integer_or(j, "p", q));
  if (p < q) config_fail("kernel.p", "need p >= q");
  SpdMatrix u = j.contains("u") ? parse_spd(j.at("u"), "kernel.u", p)
                                : SpdMatrix::identity(p);
  SpdMatrix v = j.contains("v") ? parse_spd(j.at("v"), "kernel.v", q)
                                : SpdMatrix::identity(q);
  if (kind == "rwm") {
    const double sigma = number_or(j, "sigma", 1.0);
    if (!(sigma > 0.0)) config_fail("kernel.sigma", "must be positive");
    return rwm_config(sigma, u, v);
  }
  const double rho = number_or(j, "rho", 0.9);
  if (!(rho >= 0.0 && rho < 1.0)) config_fail("kernel.rho", "must lie in [0,1)");
  if (kind == "pcn") return pcn_config(rho, u, v);
  if (kind == "mpcn") return mpcn_config(rho, u);
  config_fail("kernel.kind", "expected 'rwm', 'pcn' or 'mpcn'");
}

MatrixTarget build_matrix_target(const SpdTarget& pi, const KernelConfig& cfg) {
  switch (cfg.kind) {
    case KernelKind::Rwm:
      return upcast_target_lebesgue(pi, cfg.u, cfg.p());
    case KernelKind::Pcn:
      return as_gaussian_reference(upcast_target_lebesgue(pi, cfg.u, cfg.p()),
                                   cfg.u, cfg.v);
    case KernelKind::Mpcn:
      return upcast_target(pi, cfg.u, cfg.p());
  }
  throw std::logic_error("build_matrix_target: unreachable");
}

std::vector<double> upper_triangle(const Eigen::MatrixXd& s) {
  std::vector<double> out;
  for (int i = 0; i < s.rows(); ++i)
    for (int j = i; j < s.cols(); ++j) out.push_back(s(i, j));
  return out;
}

std::string upper_triangle_header(const std::string& stem, int q) {
  std::string h;
  for (int i = 1; i <= q; ++i)
    for (int j = i; j <= q; ++j) {
      h += "," + stem + "_" + std::to_string(i) + std::to_string(j);
    }
  return h;
}

void write_manifest(const json& config, const std::string& out_dir) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config;
  std::ofstream out(out_dir + "/manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + out_dir);
  out << manifest.dump(2) << "\n";
}

// ---- experiment bodies ------------------------------------------------

void run_sample(const json& j, const std::string& out_dir, int /*threads*/) {
  const auto seed = static_cast<std::uint64_t>(require_integer(j, "seed"));
  const TargetSpec spec = parse_target(require(j, "target"));
  const int q = spec.params.scale.dim();
  KernelConfig cfg = parse_kernel(require(j, "kernel"), q);
  const int n_steps = static_cast<int>(require_integer(j, "n_steps"));
  const int burn_in = static_cast<int>(integer_or(j, "burn_in", 0));
  const int thin = static_cast<int>(integer_or(j, "thin", 1));
  if (n_steps < 0 || burn_in < 0 || thin < 1) config_fail("n_steps/burn_in/thin", "out of range");

  const SpdTarget pi = make_spd_target(spec);
  const MatrixTarget target = build_matrix_target(pi, cfg);
  Rng rng(seed, 1);
  if (j.value("tune", false)) {
    cfg = tune_scalar(target, cfg, rng).config;
  }
  ChainRunner runner(target, cfg);
  Rng chain_rng = rng.child(1);
  std::vector<std::vector<double>> rows;
  for (int n = 0; n < burn_in; ++n) runner.step(chain_rng);
  for (int n = 0; n < n_steps; ++n) {
    const bool acc = runner.step(chain_rng);
    if (n % thin == 0) {
      std::vector<double> row{static_cast<double>(n), acc ? 1.0 : 0.0, runner.log_target()};
      const auto tri = upper_triangle(runner.induced_state().mat());
      row.insert(row.end(), tri.begin(), tri.end());
      rows.push_back(std::move(row));
    }
  }
  write_csv(out_dir + "/trace.csv", "step,accepted,log_target" + upper_triangle_header("s", q), rows);
  write_manifest(j, out_dir);
}

void run_benchmark(const json& j, const std::string& out_dir, int threads) {
  const auto seed = static_cast<std::uint64_t>(require_integer(j, "seed"));
  const int n_steps = static_cast<int>(require_integer(j, "n_steps"));
  const int burn_in = static_cast<int>(integer_or(j, "burn_in", 0));
  const TargetSpec spec = parse_target(require(j, "target"));
  const int q = spec.params.scale.dim();
  const int p = static_cast<int>(integer_or(j, "p", q));
  const SpdTarget pi = make_spd_target(spec);
  const SpdMatrix true_mean = target_true_mean(spec);

  const std::vector<std::string> kernel_names{"rwm", "pcn", "mpcn"};
  struct Task {
    std::string name;
    KernelConfig cfg;
  };
  std::vector<Task> tasks;
  const SpdMatrix u = SpdMatrix::identity(p);
  const SpdMatrix v = SpdMatrix::identity(q);
  for (const auto& name : kernel_names) {
    if (name == "rwm") tasks.push_back({name, rwm_config(1.0, u, v)});
    if (name == "pcn") tasks.push_back({name, pcn_config(0.9, u, v)});
    if (name == "mpcn") tasks.push_back({name, mpcn_config(0.9, u)});
  }

  json summary;
  std::vector<json> task_summaries(tasks.size());
  auto work = [&](std::size_t t) {
    const Task& task = tasks[t];
    const MatrixTarget target = build_matrix_target(pi, task.cfg);
    Rng tune_rng(seed, 100 + t);
    const TuneResult tuned = tune_scalar(target, task.cfg, tune_rng);
    ChainRunner runner(target, tuned.config);
    Rng chain_rng(seed, 200 + t);
    RunningMeanDistance dist(true_mean);
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(n_steps));
    std::vector<std::vector<double>> diag_series(static_cast<std::size_t>(q));
    long accepted = 0;
    for (int n = 0; n < burn_in; ++n) runner.step(chain_rng);
    const auto t0 = std::chrono::steady_clock::now();
    for (int n = 0; n < n_steps; ++n) {
      accepted += runner.step(chain_rng) ? 1 : 0;
      const SpdMatrix s_n = runner.induced_state();
      const auto d = dist.update(s_n.mat());
      rows.push_back({static_cast<double>(n + 1),
                      d ? *d : std::numeric_limits<double>::quiet_NaN()});
      if (n % 10 == 0) {  // thinned: keeps the ESS computation O(n^2/100)
        for (int k = 0; k < q; ++k) diag_series[static_cast<std::size_t>(k)].push_back(s_n(k, k));
      }
    }
    const double per_step_us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0)
            .count() / std::max(1, n_steps);
    write_csv(out_dir + "/distance_" + task.name + ".csv", "iteration,distance", rows);
    json s;
    s["kernel"] = task.name;
    s["acceptance_rate"] = static_cast<double>(accepted) / n_steps;
    s["tuned_sigma"] = tuned.config.sigma;
    s["tuned_rho"] = tuned.config.rho;
    s["tuning_in_band"] = tuned.in_band;
    s["final_distance"] = rows.empty() ? 0.0 : rows.back()[1];
    s["wall_time_per_step_us"] = per_step_us;  // informational; includes the distance update
    std::vector<double> ess_diag;
    for (const auto& series : diag_series) {
      ess_diag.push_back(series.size() >= 10 ? ess(series).ess : 0.0);
    }
    s["ess_diagonal_thin10"] = ess_diag;
    task_summaries[t] = s;
  };

  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  if (n_workers == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) work(t);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1)) work(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  summary["kernels"] = task_summaries;
  std::ofstream out(out_dir + "/benchmark_summary.json");
  out << summary.dump(2) << "\n";
  write_manifest(j, out_dir);
}

void run_drift_sweep(const json& j, const std::string& out_dir, int threads) {
  const auto seed = static_cast<std::uint64_t>(require_integer(j, "seed"));
  DriftConfig cfg;
  cfg.r = require_number(j, "r");
  cfg.p = static_cast<int>(require_integer(j, "p"));
  cfg.q = static_cast<int>(require_integer(j, "q"));
  cfg.n_samples = static_cast<int>(integer_or(j, "n_samples", 100000));
  cfg.pareto_shape = number_or(j, "pareto_shape", 1.0);
  const std::string method = j.value("method", std::string("direct"));
  if (method == "direct") {
    cfg.method = DriftMethod::Direct;
  } else if (method == "pareto_is") {
    cfg.method = DriftMethod::ParetoIs;
  } else {
    config_fail("method", "expected 'direct' or 'pareto_is'");
  }
  std::vector<double> s_grid, alpha_grid;
  for (const auto& v : require(j, "s_grid")) s_grid.push_back(v.get<double>());
  for (const auto& v : require(j, "alpha_grid")) alpha_grid.push_back(v.get<double>());
  for (double a : alpha_grid) {
    if (!(a > 0.0 && a < 1.0)) config_fail("alpha_grid", "entries must lie in (0,1)");
  }
  cfg.alpha = alpha_grid.empty() ? 0.5 : alpha_grid.front();
  cfg.validate();

  const Rng rng(seed, 7);
  const auto rows = drift_sweep(s_grid, alpha_grid, cfg, rng, threads);
  std::vector<std::vector<double>> out_rows;
  for (const auto& r : rows) {
    out_rows.push_back({r.s, r.alpha, r.estimate, r.std_error, static_cast<double>(r.n_samples)});
  }
  write_csv(out_dir + "/drift_sweep.csv", "s,alpha,estimate,std_error,n_samples", out_rows);
  write_manifest(j, out_dir);
}

void run_proposal_cloud(const json& j, const std::string& out_dir, int /*threads*/) {
  const auto seed = static_cast<std::uint64_t>(require_integer(j, "seed"));
  const int q = static_cast<int>(require_integer(j, "q"));
  if (q < 2) config_fail("q", "need q >= 2");
  const KernelConfig cfg = parse_kernel(require(j, "kernel"), q);
  const int n = static_cast<int>(integer_or(j, "n", 1000));
  Rng rng(seed, 9);
  const auto rows = proposal_cloud(cfg, q, n, rng);
  std::vector<std::vector<double>> out_rows;
  for (const auto& r : rows) {
    out_rows.push_back({static_cast<double>(r.pair_index), r.log_lambda_min, r.log_lambda_max});
  }
  write_csv(out_dir + "/proposal_cloud.csv", "pair_index,logl1,logl2", out_rows);
  write_manifest(j, out_dir);
}

SvModel parse_sv_model(const json& j) {
  const SpdMatrix omega = parse_spd(require(j, "omega"), "omega");
  const SpdMatrix sigma0 = parse_spd(require(j, "sigma0"), "sigma0", omega.dim());
  SvModel model{omega, sigma0, require_number(j, "jump_intensity"), require_number(j, "jump_mean")};
  model.validate();
  return model;
}

void run_sv_simulate(const json& j, const std::string& out_dir, int /*threads*/) {
  const auto seed = static_cast<std::uint64_t>(require_integer(j, "seed"));
  const SvModel model = parse_sv_model(j);
  const double horizon = require_number(j, "horizon");
  const int n_obs = static_cast<int>(require_integer(j, "n_observations"));
  if (!(horizon > 0.0) || n_obs < 1 || n_obs > horizon) {
    config_fail("horizon/n_observations", "need horizon > 0 and 1 <= n_observations <= horizon");
  }
  Rng rng(seed, 11);
  const SvPath path = simulate_path(model, horizon, rng);
  std::vector<double> times(n_obs);
  for (int i = 0; i < n_obs; ++i) times[i] = i + 1.0;
  Rng obs_rng = rng.child(1);
  const ObservationSeries obs = observe_path(path, times, obs_rng);

  const int q = model.dim();
  std::vector<std::vector<double>> path_rows;
  for (const auto& seg : path.segments()) {
    std::vector<double> row{seg.time};
    const auto tri = upper_triangle(seg.sigma);
    row.insert(row.end(), tri.begin(), tri.end());
    path_rows.push_back(std::move(row));
  }
  write_csv(out_dir + "/path_segments.csv", "time" + upper_triangle_header("sigma", q), path_rows);

  // the ingestible returns format: one row per day, ret columns only
  std::vector<std::vector<double>> obs_rows;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    std::vector<double> row;
    for (int k = 0; k < q; ++k) row.push_back(obs.values[i][k]);
    obs_rows.push_back(std::move(row));
  }
  std::string header = "ret1";
  for (int k = 2; k <= q; ++k) header += ",ret" + std::to_string(k);
  write_csv(out_dir + "/observations.csv", header, obs_rows);
  write_manifest(j, out_dir);
}

void run_sv_fit(const json& j, const std::string& out_dir, int /*threads*/) {
  const auto seed = static_cast<std::uint64_t>(require_integer(j, "seed"));
  ObservationSeries data;
  if (j.contains("data_csv")) {
    data = ingest_returns(require_string(j, "data_csv"), number_or(j, "rescale", 1.0));
  } else {
    config_fail("data_csv", "missing (sv-fit runs on an ingested returns file)");
  }
  const int q = static_cast<int>(data.values.front().size());

  const json& prior_j = require(j, "prior");
  WishartParams prior_params{require_number(prior_j, "dof"),
                             parse_spd(require(prior_j, "scale"), "prior.scale", q)};
  if (!(prior_params.dof > q - 1)) config_fail("prior.dof", "needs dof > q - 1");
  const SpdTarget prior = invwishart_spd_target(prior_params);

  const KernelConfig cfg = parse_kernel(require(j, "kernel"), q);
  PfConfig pf_cfg;
  pf_cfg.n_particles = static_cast<int>(integer_or(j, "n_particles", 1000));
  pf_cfg.ess_threshold_fraction = number_or(j, "ess_fraction", 0.25);
  pf_cfg.validate();

  PseudoMarginalOptions opt;
  opt.n_steps = static_cast<int>(require_integer(j, "n_steps"));
  opt.sigma0 = j.contains("sigma0") ? parse_spd(j.at("sigma0"), "sigma0", q)
                                    : SpdMatrix::trusted(0.05 * Eigen::MatrixXd::Identity(q, q));
  opt.jump_intensity = number_or(j, "jump_intensity", 0.4);
  opt.jump_mean = number_or(j, "jump_mean", 1.0 / 60.0);

  Rng rng(seed, 13);
  const PseudoMarginalTrace trace = pseudo_marginal_chain(data, prior, cfg, pf_cfg, opt, rng);

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < trace.omegas.size(); ++i) {
    std::vector<double> row{static_cast<double>(i),
                            static_cast<double>(trace.accepted[i]), trace.loglik_hat[i]};
    const auto tri = upper_triangle(trace.omegas[i]);
    row.insert(row.end(), tri.begin(), tri.end());
    rows.push_back(std::move(row));
  }
  write_csv(out_dir + "/omega_chain.csv",
            "step,accepted,loglik_hat" + upper_triangle_header("omega", q), rows);
  write_manifest(j, out_dir);
}

void dispatch(const json& config, const std::string& out_dir, int threads, bool execute) {
  if (!config.is_object()) throw ConfigError("config root must be a JSON object");
  const std::string kind = require_string(config, "experiment");
  if (!config.contains("seed")) config_fail("seed", "missing (a seed is mandatory)");
  if (!config.at("seed").is_number_integer()) config_fail("seed", "expected an integer");

  if (kind == "sample") {
    if (execute) run_sample(config, out_dir, threads);
    else {
      parse_kernel(require(config, "kernel"), parse_target(require(config, "target")).params.scale.dim());
      require_integer(config, "n_steps");
    }
  } else if (kind == "benchmark") {
    if (execute) run_benchmark(config, out_dir, threads);
    else {
      target_true_mean(parse_target(require(config, "target")));
      require_integer(config, "n_steps");
    }
  } else if (kind == "drift-sweep") {
    if (execute) {
      run_drift_sweep(config, out_dir, threads);
    } else {
      DriftConfig cfg;
      cfg.r = require_number(config, "r");
      cfg.p = static_cast<int>(require_integer(config, "p"));
      cfg.q = static_cast<int>(require_integer(config, "q"));
      cfg.pareto_shape = number_or(config, "pareto_shape", 1.0);
      for (const auto& v : require(config, "alpha_grid")) {
        const double a = v.get<double>();
        if (!(a > 0.0 && a < 1.0)) config_fail("alpha_grid", "entries must lie in (0,1)");
        cfg.alpha = a;
      }
      require(config, "s_grid");
      cfg.validate();
    }
  } else if (kind == "proposal-cloud") {
    if (execute) run_proposal_cloud(config, out_dir, threads);
    else parse_kernel(require(config, "kernel"), static_cast<int>(require_integer(config, "q")));
  } else if (kind == "sv-simulate") {
    if (execute) run_sv_simulate(config, out_dir, threads);
    else parse_sv_model(config);
  } else if (kind == "sv-fit") {
    if (execute) run_sv_fit(config, out_dir, threads);
    else {
      require_string(config, "data_csv");
      require_integer(config, "n_steps");
      require(config, "prior");
      require(config, "kernel");
    }
  } else {
    config_fail("experiment", "unknown experiment '" + kind + "'");
  }
}

}  // namespace

std::string validate_config(const nlohmann::json& config) {
  dispatch(config, "", 1, /*execute=*/false);
  return "ok";
}

void run_config(const nlohmann::json& config, const std::string& out_dir, int threads) {
  std::filesystem::create_directories(out_dir);
  dispatch(config, out_dir, threads, /*execute=*/true);
}

namespace {

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json config;
  try {
    in >> config;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("JSON parse error: ") + e.what());
  }
  return config;
}

}  // namespace

std::string validate_config_file(const std::string& path) {
  return validate_config(load_config(path));
}

void run_config_file(const std::string& path, const std::string& out_dir,
                     int threads, long long seed_override) {
  json config = load_config(path);
  if (seed_override >= 0) config["seed"] = seed_override;
  run_config(config, out_dir, threads);
}

}  // namespace matmcmc
