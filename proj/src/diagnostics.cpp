#include "matmcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "matmcmc/distributions.hpp"

namespace matmcmc {

RunningMeanDistance::RunningMeanDistance(const SpdMatrix& true_mean)
    : true_mean_(true_mean),
      sum_(Eigen::MatrixXd::Zero(true_mean.dim(), true_mean.dim())) {}

std::optional<double> RunningMeanDistance::update(const Eigen::MatrixXd& s) {
  sum_ += s;
  ++count_;
  const Eigen::MatrixXd mean = sum_ / static_cast<double>(count_);
  try {
    return spd_metric(SpdMatrix(mean), true_mean_);
  } catch (const std::domain_error&) {
    flagged_ = true;
    return std::nullopt;
  }
}

std::vector<double> running_mean_distance(const ChainTrace& spd_trace,
                                          const SpdMatrix& true_mean) {
  if (spd_trace.space != StateSpace::Spd) {
    throw std::invalid_argument("running_mean_distance: expected a P+(q) trace");
  }
  if (spd_trace.states.empty()) {
    throw std::invalid_argument("running_mean_distance: empty trace");
  }
  RunningMeanDistance acc(true_mean);
  std::vector<double> out;
  out.reserve(spd_trace.states.size());
  for (const auto& s : spd_trace.states) {
    const auto d = acc.update(s);
    out.push_back(d ? *d : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

double acceptance_rate(const ChainTrace& trace, std::size_t window) {
  const std::size_t n_steps = trace.size() > 0 ? trace.size() - 1 : 0;
  if (window < 1 || window > n_steps) {
    throw std::invalid_argument("acceptance_rate: window must lie in [1, steps]");
  }
  std::size_t hits = 0;
  for (std::size_t i = trace.size() - window; i < trace.size(); ++i) {
    hits += trace.accepted[i];
  }
  return static_cast<double>(hits) / static_cast<double>(window);
}

TuningEstimate estimate_tuning(const std::vector<DenseMatrix>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("estimate_tuning: need at least 2 samples");
  const long p = samples.front().rows();
  const long q = samples.front().cols();
  DenseMatrix mean = Eigen::MatrixXd::Zero(p, q);
  for (const auto& x : samples) mean += x;
  mean /= static_cast<double>(samples.size());

  Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd e2 = Eigen::MatrixXd::Zero(q, q);
  for (const auto& x : samples) {
    const DenseMatrix c = x - mean;
    e1 += c * c.transpose();
    e2 += c.transpose() * c;
  }
  const double denom = static_cast<double>(samples.size()) - 1.0;
  e1 /= denom;
  e2 /= denom;

  TuningEstimate out{SpdMatrix::identity(static_cast<int>(p)),
                     SpdMatrix::identity(static_cast<int>(q)), false};
  auto ensure_pd = [&out](Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double hi = es.eigenvalues().maxCoeff();
    if (!(es.eigenvalues().minCoeff() > kSpdRelTol * hi) || !(hi > 0.0)) {
      double ridge = 1e-8 * m.trace() / static_cast<double>(m.rows());
      if (!(ridge > 0.0)) ridge = 1e-8;
      m += ridge * Eigen::MatrixXd::Identity(m.rows(), m.cols());
      out.ridged = true;
    }
  };
  ensure_pd(e1);
  ensure_pd(e2);
  e2 /= e2.trace();
  e2(q - 1, q - 1) += 1.0 - e2.trace();  // make the trace exactly one
  out.u_hat = SpdMatrix(e1);
  out.v_hat = SpdMatrix(e2);
  return out;
}

TuneResult tune_scalar(const MatrixTarget& target, const KernelConfig& initial,
                       Rng& rng, double band_lo, double band_hi,
                       int pilot_steps, int max_rounds) {
  KernelConfig cfg = initial;
  cfg.validate();

  const bool is_rwm = cfg.kind == KernelKind::Rwm;
  auto knob_to_u = [is_rwm](const KernelConfig& c) {
    if (is_rwm) return std::log(c.sigma);
    const double r = std::clamp(c.rho, 1e-12, 1.0 - 1e-12);
    return -std::log(r / (1.0 - r));  // acceptance decreases in u for both knobs
  };
  auto u_to_cfg = [is_rwm](KernelConfig c, double u) {
    if (is_rwm) {
      c.sigma = std::exp(u);
    } else {
      c.rho = 1.0 / (1.0 + std::exp(u));
    }
    return c;
  };
  auto pilot_rate = [&](const KernelConfig& c, Rng stream) {
    ChainRunner runner(target, c);
    int hits = 0;
    for (int n = 0; n < pilot_steps; ++n) hits += runner.step(stream) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(pilot_steps);
  };

  double u = knob_to_u(cfg);
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double step = 1.0;
  TuneResult out;
  for (int round = 0; round < max_rounds; ++round) {
    const KernelConfig trial = u_to_cfg(cfg, u);
    const double rate = pilot_rate(trial, rng.child(static_cast<std::uint64_t>(round)));
    out.config = trial;
    out.achieved_rate = rate;
    out.rounds = round + 1;
    if (rate >= band_lo && rate <= band_hi) {
      out.in_band = true;
      return out;
    }
    if (rate > band_hi) {
      lo = u;  // acceptance too high: push the knob towards smaller acceptance
      u = std::isfinite(hi) ? 0.5 * (lo + hi) : u + step;
    } else {
      hi = u;
      u = std::isfinite(lo) ? 0.5 * (lo + hi) : u - step;
    }
    step *= 2.0;
  }
  return out;  // best effort, in_band = false
}

std::vector<ProposalCloudRow> proposal_cloud(const KernelConfig& cfg, int q, int n, Rng& rng) {
  if (q < 2) throw std::invalid_argument("proposal_cloud: need q >= 2");
  KernelConfig c = cfg;
  c.validate();
  const int p = c.p();
  if (p < q) throw std::invalid_argument("proposal_cloud: need p >= q");

  const Eigen::MatrixXd root_u = spd_sqrt(c.u).mat();
  Eigen::MatrixXd root_v;
  if (c.kind != KernelKind::Mpcn) root_v = spd_sqrt(c.v).mat();
  DenseMatrix z0 = Eigen::MatrixXd::Zero(p, q);
  z0.topRows(q) = Eigen::MatrixXd::Identity(q, q);
  const DenseMatrix x0 = root_u * z0;

  std::vector<ProposalCloudRow> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    DenseMatrix z(p, q);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < q; ++b) z(a, b) = rng.normal();
    DenseMatrix y;
    switch (c.kind) {
      case KernelKind::Rwm:
        y = x0 + c.sigma * (root_u * z * root_v);
        break;
      case KernelKind::Pcn:
        y = std::sqrt(c.rho) * x0 + std::sqrt(1.0 - c.rho) * (root_u * z * root_v);
        break;
      case KernelKind::Mpcn: {
        // Whitened coordinates; gram at z0 is exactly I_q.
        const SpdMatrix v = sample_inverse_wishart(
            {static_cast<double>(p), SpdMatrix::identity(q)}, rng);
        const DenseMatrix w = z * spd_sqrt(v).mat();
        DenseMatrix zy = std::sqrt(1.0 - c.rho) * w;
        zy.topRows(q) += std::sqrt(c.rho) * Eigen::MatrixXd::Identity(q, q);
        y = root_u * zy;
        break;
      }
    }
    const SpdMatrix s_star = gram(y, c.u);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s_star.mat(), Eigen::EigenvaluesOnly);
    rows.push_back({i, std::log(es.eigenvalues().minCoeff()),
                    std::log(es.eigenvalues().maxCoeff())});
  }
  return rows;
}

EssResult ess(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 10) throw std::invalid_argument("ess: need at least 10 points");
  const double nn = static_cast<double>(n);
  double m = 0.0;
  for (double x : series) m += x;
  m /= nn;
  double g0 = 0.0;
  for (double x : series) g0 += (x - m) * (x - m);
  g0 /= nn;
  EssResult out;
  if (!(g0 > 1e-20 * (m * m + 1.0))) {  // constant series
    out.ess = nn;
    out.flagged = true;
    return out;
  }
  auto rho = [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) acc += (series[i] - m) * (series[i + k] - m);
    return acc / nn / g0;
  };
  // Geyer: accumulate pair sums rho_{2m} + rho_{2m+1} while positive.
  double sum_pairs = 0.0;
  const std::size_t m_max = n / 2 - 1;
  for (std::size_t pair = 0; pair <= m_max; ++pair) {
    const double g = rho(2 * pair) + rho(2 * pair + 1);
    if (g <= 0.0) break;
    sum_pairs += g;
  }
  double tau = -1.0 + 2.0 * sum_pairs;
  if (tau < 0.9) {
    // Antithetic chains legitimately give tau below one (ESS above n); keep
    // the value but flag it, with a floor against a vanishing denominator.
    out.flagged = true;
    tau = std::max(tau, 0.01);
  }
  out.ess = nn / tau;
  return out;
}

}  // namespace matmcmc
