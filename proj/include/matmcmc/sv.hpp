#ifndef MATMCMC_SV_HPP
#define MATMCMC_SV_HPP

#include <string>
#include <vector>

#include "matmcmc/kernels.hpp"
#include "matmcmc/linalg.hpp"
#include "matmcmc/rng.hpp"
#include "matmcmc/target.hpp"

namespace matmcmc {

// Matrix OU stochastic-volatility model: between jumps the covariance flows
// as Sigma_t = exp(-Omega(t-s)) Sigma_s exp(-Omega(t-s)); a compound Poisson
// subordinator adds diag(E_1, ..., E_q) with iid Exponential(jump_mean)
// entries at each jump.
struct SvModel {
  SpdMatrix omega;          // mean reversion, 1/day
  SpdMatrix sigma0;         // covariance at time 0
  double jump_intensity;    // jumps/day, >= 0
  double jump_mean;         // mean jump size, > 0

  int dim() const { return omega.dim(); }
  void validate() const;
};

// Piecewise-exact covariance path: state right after time `time`, decaying
// under the OU flow until the next segment.
struct SvPathSegment {
  double time = 0.0;
  Eigen::MatrixXd sigma;
};

class SvPath {
 public:
  SvPath(const SvModel& model, std::vector<SvPathSegment> segments, double horizon);
  Eigen::MatrixXd at(double t) const;  // exact evaluation, t in [0, horizon]
  const std::vector<SvPathSegment>& segments() const { return segments_; }
  double horizon() const { return horizon_; }

 private:
  Eigen::MatrixXd decay(const Eigen::MatrixXd& sigma, double dt) const;
  Eigen::MatrixXd evecs_;
  Eigen::VectorXd evals_;
  std::vector<SvPathSegment> segments_;
  double horizon_ = 0.0;
};

struct ObservationSeries {
  std::vector<double> times;                 // strictly increasing
  std::vector<Eigen::VectorXd> values;       // q-vectors

  std::size_t size() const { return times.size(); }
  void validate() const;
};

struct PfConfig {
  int n_particles = 1000;
  double ess_threshold_fraction = 0.25;  // in (0, 1]

  void validate() const;
};

SvPath simulate_path(const SvModel& model, double horizon, Rng& rng);

ObservationSeries observe_path(const SvPath& path, const std::vector<double>& times, Rng& rng);

struct PfResult {
  double loglik = 0.0;
  bool degenerate = false;  // all weights vanished at some step
};

// Bootstrap particle filter with exact between-observation propagation and
// systematic resampling under an ESS trigger; returns the log of the
// standard unbiased likelihood estimator.
PfResult pf_loglik(const SvModel& model, const ObservationSeries& data,
                   const PfConfig& cfg, Rng& rng);

// Exact log-likelihood, available when jump_intensity == 0 (deterministic path).
double exact_loglik_no_jumps(const SvModel& model, const ObservationSeries& data);

struct PseudoMarginalTrace {
  std::vector<Eigen::MatrixXd> omegas;  // q x q per step
  std::vector<std::uint8_t> accepted;
  std::vector<double> loglik_hat;
  std::vector<double> log_prior;
  std::uint64_t seed = 0;
};

struct PseudoMarginalOptions {
  int n_steps = 1000;
  // Fixed model ingredients around the unknown Omega.
  SpdMatrix sigma0 = SpdMatrix::identity(1);
  double jump_intensity = 0.4;
  double jump_mean = 1.0 / 60.0;
  // When false the likelihood is forced to 1 (prior-only chain).
  bool use_likelihood = true;
  // When true and jump_intensity == 0, the exact likelihood replaces the
  // particle estimate (consumes no PF randomness).
  bool exact_when_deterministic = false;
};

// Pseudo-marginal Metropolis over Omega: MpCN (or pCN) proposals on the
// upcasted space, particle-filter likelihood refreshed on proposal and
// retained on rejection. PF randomness comes from per-step child streams, so
// proposal draws are unaffected by the likelihood path.
PseudoMarginalTrace pseudo_marginal_chain(const ObservationSeries& data,
                                          const SpdTarget& prior,
                                          const KernelConfig& kernel_cfg,
                                          const PfConfig& pf_cfg,
                                          const PseudoMarginalOptions& opt,
                                          Rng& rng);

// Reads one column of log-returns per CSV column, removes a per-column OLS
// linear trend, rescales, and assigns times 1..n.
ObservationSeries ingest_returns(const std::string& csv_path, double rescale);

}  // namespace matmcmc

#endif
