#include "matmcmc/sv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "matmcmc/csv.hpp"

namespace matmcmc {

void SvModel::validate() const {
  if (sigma0.dim() != omega.dim()) throw std::invalid_argument("SvModel: dimension mismatch");
  if (!(jump_intensity >= 0.0)) throw std::invalid_argument("SvModel: jump_intensity >= 0");
  if (!(jump_mean > 0.0)) throw std::invalid_argument("SvModel: jump_mean > 0");
}

void ObservationSeries::validate() const {
  if (times.size() != values.size()) throw std::invalid_argument("ObservationSeries: length mismatch");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("ObservationSeries: times must be strictly increasing");
    }
  }
}

void PfConfig::validate() const {
  if (n_particles < 1) throw std::invalid_argument("PfConfig: n_particles >= 1");
  if (!(ess_threshold_fraction > 0.0 && ess_threshold_fraction <= 1.0)) {
    throw std::invalid_argument("PfConfig: ess_threshold_fraction in (0,1]");
  }
}

SvPath::SvPath(const SvModel& model, std::vector<SvPathSegment> segments, double horizon)
    : segments_(std::move(segments)), horizon_(horizon) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.omega.mat());
  evecs_ = es.eigenvectors();
  evals_ = es.eigenvalues();
}

Eigen::MatrixXd SvPath::decay(const Eigen::MatrixXd& sigma, double dt) const {
  const Eigen::MatrixXd flow =
      evecs_ * (-dt * evals_.array()).exp().matrix().asDiagonal() * evecs_.transpose();
  const Eigen::MatrixXd out = flow * sigma * flow.transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd SvPath::at(double t) const {
  if (t < 0.0 || t > horizon_) throw std::out_of_range("SvPath::at: time outside [0, horizon]");
  // Last segment starting at or before t.
  std::size_t lo = 0, hi = segments_.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (segments_[mid].time <= t) lo = mid; else hi = mid;
  }
  return decay(segments_[lo].sigma, t - segments_[lo].time);
}

namespace {

// Exact OU propagation of one covariance with freshly sampled jumps on
// (t_from, t_to]; `flow(dt)` must return exp(-Omega dt).
template <typename Flow>
Eigen::MatrixXd propagate_exact(Eigen::MatrixXd sigma, double t_from, double t_to,
                                const SvModel& model, const Flow& flow, Rng& rng) {
  double t = t_from;
  const int q = model.dim();
  if (model.jump_intensity > 0.0) {
    for (;;) {
      const double gap = rng.exponential(1.0 / model.jump_intensity);
      if (t + gap > t_to) break;
      t += gap;
      const Eigen::MatrixXd f = flow(gap);
      sigma = f * sigma * f.transpose();
      for (int i = 0; i < q; ++i) sigma(i, i) += rng.exponential(model.jump_mean);
    }
  }
  const Eigen::MatrixXd f = flow(t_to - t);
  sigma = f * sigma * f.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

double gaussian_logpdf(const Eigen::VectorXd& y, const Eigen::MatrixXd& sigma) {
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const int q = static_cast<int>(y.size());
  double log_det = 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  for (int i = 0; i < q; ++i) log_det += std::log(l(i, i));
  log_det *= 2.0;
  const double quad = y.dot(llt.solve(y));
  return -0.5 * (q * std::log(2.0 * M_PI) + log_det + quad);
}

}  // namespace

SvPath simulate_path(const SvModel& model, double horizon, Rng& rng) {
  model.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate_path: horizon must be positive");
  const int q = model.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.omega.mat());
  const Eigen::MatrixXd evecs = es.eigenvectors();
  const Eigen::VectorXd evals = es.eigenvalues();
  auto flow = [&](double dt) -> Eigen::MatrixXd {
    return evecs * (-dt * evals.array()).exp().matrix().asDiagonal() * evecs.transpose();
  };

  std::vector<SvPathSegment> segments;
  segments.push_back({0.0, model.sigma0.mat()});
  if (model.jump_intensity > 0.0) {
    double t = 0.0;
    Eigen::MatrixXd sigma = model.sigma0.mat();
    for (;;) {
      const double gap = rng.exponential(1.0 / model.jump_intensity);
      if (t + gap > horizon) break;
      t += gap;
      const Eigen::MatrixXd f = flow(gap);
      sigma = f * sigma * f.transpose();
      for (int i = 0; i < q; ++i) sigma(i, i) += rng.exponential(model.jump_mean);
      sigma = 0.5 * (sigma + sigma.transpose());
      segments.push_back({t, sigma});
    }
  }
  return SvPath(model, std::move(segments), horizon);
}

ObservationSeries observe_path(const SvPath& path, const std::vector<double>& times, Rng& rng) {
  ObservationSeries out;
  out.times = times;
  out.values.reserve(times.size());
  for (const double t : times) {
    const Eigen::MatrixXd sigma = path.at(t);
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("observe_path: covariance not positive-definite");
    }
    Eigen::VectorXd z(sigma.rows());
    for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
    out.values.push_back(Eigen::MatrixXd(llt.matrixL()) * z);
  }
  out.validate();
  return out;
}

PfResult pf_loglik(const SvModel& model, const ObservationSeries& data,
                   const PfConfig& cfg, Rng& rng) {
  model.validate();
  data.validate();
  cfg.validate();
  if (data.size() == 0) return {0.0, false};
  const int n = cfg.n_particles;
  const int q = model.dim();
  if (data.values.front().size() != q) throw std::invalid_argument("pf_loglik: dimension mismatch");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.omega.mat());
  const Eigen::MatrixXd evecs = es.eigenvectors();
  const Eigen::VectorXd evals = es.eigenvalues();
  auto flow = [&](double dt) -> Eigen::MatrixXd {
    return evecs * (-dt * evals.array()).exp().matrix().asDiagonal() * evecs.transpose();
  };

  std::vector<Eigen::MatrixXd> sigmas(n, model.sigma0.mat());
  std::vector<double> weights(n, 1.0 / n);
  std::vector<double> log_w(n);
  std::vector<double> scaled(n);
  std::vector<Eigen::MatrixXd> resampled(n);
  PfResult out;
  double prev_t = 0.0;

  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = data.times[i];
    for (int j = 0; j < n; ++j) {
      sigmas[j] = propagate_exact(std::move(sigmas[j]), prev_t, t, model, flow, rng);
      log_w[j] = gaussian_logpdf(data.values[i], sigmas[j]);
    }
    prev_t = t;

    double max_lw = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) max_lw = std::max(max_lw, log_w[j]);
    if (!std::isfinite(max_lw)) {
      out.loglik = -std::numeric_limits<double>::infinity();
      out.degenerate = true;
      return out;
    }
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      scaled[j] = weights[j] * std::exp(log_w[j] - max_lw);
      z += scaled[j];
    }
    if (!(z > 0.0)) {
      out.loglik = -std::numeric_limits<double>::infinity();
      out.degenerate = true;
      return out;
    }
    out.loglik += max_lw + std::log(z);

    double ess_inv = 0.0;
    for (int j = 0; j < n; ++j) {
      weights[j] = scaled[j] / z;
      ess_inv += weights[j] * weights[j];
    }
    const double ess_val = 1.0 / ess_inv;
    if (ess_val < cfg.ess_threshold_fraction * n && i + 1 < data.size()) {
      // Systematic resampling from a single uniform.
      const double u0 = rng.uniform();
      double cum = weights[0];
      int k = 0;
      for (int j = 0; j < n; ++j) {
        const double pos = (j + u0) / n;
        while (cum < pos && k + 1 < n) cum += weights[++k];
        resampled[j] = sigmas[k];
      }
      sigmas.swap(resampled);
      std::fill(weights.begin(), weights.end(), 1.0 / n);
    }
  }
  return out;
}

double exact_loglik_no_jumps(const SvModel& model, const ObservationSeries& data) {
  model.validate();
  data.validate();
  if (model.jump_intensity != 0.0) {
    throw std::invalid_argument("exact_loglik_no_jumps: requires zero jump intensity");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.omega.mat());
  const Eigen::MatrixXd evecs = es.eigenvectors();
  const Eigen::VectorXd evals = es.eigenvalues();
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::MatrixXd f =
        evecs * (-data.times[i] * evals.array()).exp().matrix().asDiagonal() * evecs.transpose();
    const Eigen::MatrixXd sigma = f * model.sigma0.mat() * f.transpose();
    acc += gaussian_logpdf(data.values[i], 0.5 * (sigma + sigma.transpose()));
  }
  return acc;
}

PseudoMarginalTrace pseudo_marginal_chain(const ObservationSeries& data,
                                          const SpdTarget& prior,
                                          const KernelConfig& kernel_cfg,
                                          const PfConfig& pf_cfg,
                                          const PseudoMarginalOptions& opt,
                                          Rng& rng) {
  data.validate();
  pf_cfg.validate();
  const int q = prior.dim;
  const int p = kernel_cfg.p();

  MatrixTarget target;
  if (kernel_cfg.kind == KernelKind::Mpcn) {
    target = upcast_target(prior, kernel_cfg.u, p);
  } else if (kernel_cfg.kind == KernelKind::Pcn) {
    target = as_gaussian_reference(upcast_target_lebesgue(prior, kernel_cfg.u, p),
                                   kernel_cfg.u, kernel_cfg.v);
  } else {
    throw std::invalid_argument("pseudo_marginal_chain: kernel must be MpCN or pCN");
  }
  ChainRunner runner(target, kernel_cfg);

  auto likelihood_at = [&](const SpdMatrix& omega, std::uint64_t step) -> double {
    if (!opt.use_likelihood) return 0.0;
    SvModel model{omega, opt.sigma0, opt.jump_intensity, opt.jump_mean};
    if (opt.exact_when_deterministic && opt.jump_intensity == 0.0) {
      return exact_loglik_no_jumps(model, data);
    }
    // PF randomness lives on its own per-step stream so the Omega-proposal
    // sequence is unchanged whether the likelihood is exact or estimated.
    Rng pf_rng = rng.child(0x9F1AA5u).child(step);
    return pf_loglik(model, data, pf_cfg, pf_rng).loglik;
  };

  PseudoMarginalTrace trace;
  trace.seed = rng.seed();
  SpdMatrix omega = runner.induced_state();
  double loglik = likelihood_at(omega, 0);
  if (!std::isfinite(loglik) && opt.use_likelihood) {
    throw std::domain_error("pseudo_marginal_chain: initial likelihood estimate is degenerate");
  }
  trace.omegas.push_back(omega.mat());
  trace.accepted.push_back(1);
  trace.loglik_hat.push_back(loglik);
  trace.log_prior.push_back(runner.log_target());

  for (int step = 1; step <= opt.n_steps; ++step) {
    const ChainRunner::Proposal prop = runner.propose(rng);
    const double log_u = std::log(rng.uniform());
    bool accepted = false;
    if (prop.usable) {
      SpdMatrix omega_prop = runner.induced_of(prop.state);
      const double loglik_prop = likelihood_at(omega_prop, static_cast<std::uint64_t>(step));
      const double delta = (prop.log_target - runner.log_target()) + (loglik_prop - loglik);
      if (std::isfinite(loglik_prop) && !std::isnan(delta) && log_u < std::min(0.0, delta)) {
        runner.commit(prop);
        omega = omega_prop;
        loglik = loglik_prop;
        accepted = true;
      }
    }
    trace.omegas.push_back(omega.mat());
    trace.accepted.push_back(accepted ? 1 : 0);
    trace.loglik_hat.push_back(loglik);
    trace.log_prior.push_back(runner.log_target());
  }
  return trace;
}

ObservationSeries ingest_returns(const std::string& csv_path, double rescale) {
  const CsvTable table = read_numeric_csv(csv_path);
  const std::size_t n = table.rows.size();
  if (n < 3) throw std::runtime_error("ingest_returns: need at least 3 rows");
  const std::size_t q = table.rows.front().size();
  if (q < 1) throw std::runtime_error("ingest_returns: need at least one column");

  // Per-column OLS detrend against t = 1..n.
  const double tn = static_cast<double>(n);
  const double t_mean = 0.5 * (tn + 1.0);
  double stt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = (i + 1.0) - t_mean;
    stt += dt * dt;
  }
  ObservationSeries out;
  out.times.resize(n);
  out.values.assign(n, Eigen::VectorXd(q));
  for (std::size_t j = 0; j < q; ++j) {
    double y_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) y_mean += table.rows[i][j];
    y_mean /= tn;
    double sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) sty += ((i + 1.0) - t_mean) * (table.rows[i][j] - y_mean);
    const double slope = sty / stt;
    for (std::size_t i = 0; i < n; ++i) {
      const double fitted = y_mean + slope * ((i + 1.0) - t_mean);
      out.values[i][static_cast<int>(j)] = (table.rows[i][j] - fitted) * rescale;
    }
  }
  for (std::size_t i = 0; i < n; ++i) out.times[i] = static_cast<double>(i + 1);
  out.validate();
  return out;
}

}  // namespace matmcmc
