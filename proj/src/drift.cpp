#include "matmcmc/drift.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "matmcmc/distributions.hpp"
#include "matmcmc/noise_law.hpp"

namespace matmcmc {

namespace {

// {eta^{-alpha} - 1} min{1, eta} from log eta; bounded by 1 in absolute
// value for alpha in (0,1), so no overflow anywhere on the grid.
double drift_integrand(double log_eta, double alpha) {
  if (log_eta <= 0.0) {
    return std::exp((1.0 - alpha) * log_eta) - std::exp(log_eta);
  }
  return std::exp(-alpha * log_eta) - 1.0;
}

// Density of the per-eigenvalue Pareto reference: lambda ~ Pareto(a, 1),
// inverted with probability 1/2. Supported on all of (0, infinity).
double log_pareto_mixture_density(double lambda, double shape) {
  if (lambda >= 1.0) {
    return std::log(0.5 * shape) - (shape + 1.0) * std::log(lambda);
  }
  return std::log(0.5 * shape) + (shape - 1.0) * std::log(lambda);
}

double sample_pareto_mixture(double shape, Rng& rng) {
  const double u = rng.uniform();
  const double lam = std::pow(rng.uniform(), -1.0 / shape);  // Pareto(shape, 1)
  return (u < 0.5) ? lam : 1.0 / lam;
}

Eigen::MatrixXd haar_orthogonal(int q, Rng& rng) {
  return sample_uniform_stiefel(q, q, rng).mat();
}

}  // namespace

SemiDefiniteMatrix::SemiDefiniteMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() < 1 || m.rows() != m.cols() || !m.allFinite()) {
    throw std::invalid_argument("SemiDefiniteMatrix: need a finite square matrix");
  }
  m_ = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
  const double hi = std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(hi, 1.0)) {
    throw std::domain_error("SemiDefiniteMatrix: negative eigenvalue");
  }
}

SemiDefiniteMatrix SemiDefiniteMatrix::diag_with_zeros(double s, int q) {
  if (!(s >= 0.0)) throw std::domain_error("SemiDefiniteMatrix: s must be nonnegative");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(q, q);
  m(0, 0) = s;
  return SemiDefiniteMatrix(m);
}

void DriftConfig::validate() const {
  if (q < 1 || p < q) throw std::invalid_argument("DriftConfig: need p >= q >= 1");
  if (!(r > q - 1)) throw std::invalid_argument("DriftConfig: need r > q - 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("DriftConfig: alpha must lie in (0,1)");
  if (n_samples < 1) throw std::invalid_argument("DriftConfig: n_samples >= 1");
  if (!(pareto_shape > 0.0)) throw std::invalid_argument("DriftConfig: pareto_shape > 0");
}

double eta_log(const SpdMatrix& eps, const SemiDefiniteMatrix& s, double r) {
  if (eps.dim() != s.dim()) throw std::invalid_argument("eta_log: dimension mismatch");
  const Eigen::MatrixXd diff = eps.mat() - Eigen::MatrixXd::Identity(eps.dim(), eps.dim());
  return 0.5 * r * log_det(eps) - 0.5 * (diff * s.mat()).trace();
}

DriftEstimate drift_ratio(const SemiDefiniteMatrix& s, const DriftConfig& cfg, Rng& rng) {
  cfg.validate();
  if (s.dim() != cfg.q) throw std::invalid_argument("drift_ratio: dimension mismatch");
  DriftEstimate out;
  out.n_samples = cfg.n_samples;

  if (cfg.method == DriftMethod::Direct) {
    const EpsilonLawParams law{0.0, cfg.p, cfg.q};
    double acc = 0.0, acc2 = 0.0;
    for (int n = 0; n < cfg.n_samples; ++n) {
      const SpdMatrix eps = sample_epsilon(law, rng);
      const double f = drift_integrand(eta_log(eps, s, cfg.r), cfg.alpha);
      acc += f;
      acc2 += f * f;
    }
    const double n = static_cast<double>(cfg.n_samples);
    out.estimate = acc / n;
    out.std_error = std::sqrt(std::max(acc2 / n - out.estimate * out.estimate, 0.0) / n);
    return out;
  }

  // Self-normalized importance sampling: eigenvalues from the symmetrized
  // Pareto reference against the (unnormalized) rho = 0 eigenvalue density,
  // rotation Haar on O(q). Sorting adds a constant q! that cancels.
  std::vector<double> lam(cfg.q);
  double sw = 0.0, swf = 0.0;
  std::vector<double> ws(cfg.n_samples), fs(cfg.n_samples);
  for (int n = 0; n < cfg.n_samples; ++n) {
    double log_ref = 0.0;
    for (int i = 0; i < cfg.q; ++i) {
      lam[i] = sample_pareto_mixture(cfg.pareto_shape, rng);
      log_ref += log_pareto_mixture_density(lam[i], cfg.pareto_shape);
    }
    std::sort(lam.begin(), lam.end());
    const Eigen::MatrixXd rot = haar_orthogonal(cfg.q, rng);
    double log_w = eigen_logdensity_rho0(lam, cfg.p, cfg.q) - log_ref;
    if (!std::isfinite(log_w)) log_w = -std::numeric_limits<double>::infinity();
    const double w = std::exp(log_w);
    Eigen::VectorXd lv(cfg.q);
    for (int i = 0; i < cfg.q; ++i) lv[i] = lam[i];
    const SpdMatrix eps = SpdMatrix::trusted(rot * lv.asDiagonal() * rot.transpose());
    const double f = drift_integrand(eta_log(eps, s, cfg.r), cfg.alpha);
    ws[n] = w;
    fs[n] = f;
    sw += w;
    swf += w * f;
  }
  if (!(sw > 0.0)) throw std::runtime_error("drift_ratio: importance weights vanished");
  out.estimate = swf / sw;
  double var_acc = 0.0;
  for (int n = 0; n < cfg.n_samples; ++n) {
    const double d = ws[n] * (fs[n] - out.estimate);
    var_acc += d * d;
  }
  out.std_error = std::sqrt(var_acc) / sw;
  return out;
}

std::vector<DriftSweepRow> drift_sweep(const std::vector<double>& s_grid,
                                       const std::vector<double>& alpha_grid,
                                       const DriftConfig& cfg, const Rng& rng,
                                       int threads) {
  std::vector<DriftSweepRow> rows(s_grid.size() * alpha_grid.size());
  if (rows.empty()) return rows;
  const int n_tasks = static_cast<int>(rows.size());
  const int n_workers = std::max(1, std::min(threads, n_tasks));

  auto work = [&](int task) {
    const std::size_t i = static_cast<std::size_t>(task) / alpha_grid.size();
    const std::size_t j = static_cast<std::size_t>(task) % alpha_grid.size();
    DriftConfig point_cfg = cfg;
    point_cfg.alpha = alpha_grid[j];
    Rng stream = rng.child(static_cast<std::uint64_t>(i)).child(static_cast<std::uint64_t>(j));
    const auto est = drift_ratio(SemiDefiniteMatrix::diag_with_zeros(s_grid[i], cfg.q),
                                 point_cfg, stream);
    rows[task] = {s_grid[i], alpha_grid[j], est.estimate, est.std_error, est.n_samples};
  };

  if (n_workers == 1) {
    for (int t = 0; t < n_tasks; ++t) work(t);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) work(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::vector<DriftEstimate> tail_drift_probe(const SpdTarget& target,
                                            const std::vector<SpdMatrix>& s_sequence,
                                            const DriftConfig& cfg, Rng& rng) {
  cfg.validate();
  if (target.dim != cfg.q) throw std::invalid_argument("tail_drift_probe: dimension mismatch");
  std::vector<DriftEstimate> out;
  out.reserve(s_sequence.size());
  const EpsilonLawParams law{0.0, cfg.p, cfg.q};
  for (const auto& s : s_sequence) {
    const double log_pi_s = target.log_density(s);
    double acc = 0.0, acc2 = 0.0;
    for (int n = 0; n < cfg.n_samples; ++n) {
      const SpdMatrix eps = sample_epsilon(law, rng);
      const double log_ratio = target.log_density(circ(eps, s)) - log_pi_s;
      const double f = drift_integrand(log_ratio, cfg.alpha);
      acc += f;
      acc2 += f * f;
    }
    const double n = static_cast<double>(cfg.n_samples);
    DriftEstimate est;
    est.n_samples = cfg.n_samples;
    est.estimate = acc / n;
    est.std_error = std::sqrt(std::max(acc2 / n - est.estimate * est.estimate, 0.0) / n);
    out.push_back(est);
  }
  return out;
}

}  // namespace matmcmc
