#ifndef MATMCMC_DIAGNOSTICS_HPP
#define MATMCMC_DIAGNOSTICS_HPP

#include <optional>
#include <vector>

#include "matmcmc/kernels.hpp"

namespace matmcmc {

// Streaming distance between the running Frobenius average of a P+(q) chain
// and a fixed reference point, in the log-eigenvalue metric.
class RunningMeanDistance {
 public:
  explicit RunningMeanDistance(const SpdMatrix& true_mean);
  // Returns the distance after absorbing s; nullopt when the running mean is
  // not positive-definite (flagged, possible only at tiny n).
  std::optional<double> update(const Eigen::MatrixXd& s);
  bool flagged() const { return flagged_; }

 private:
  SpdMatrix true_mean_;
  Eigen::MatrixXd sum_;
  long count_ = 0;
  bool flagged_ = false;
};

// Distance series for a whole P+(q) trace.
std::vector<double> running_mean_distance(const ChainTrace& spd_trace,
                                          const SpdMatrix& true_mean);

// Fraction of accepted steps in the trailing window.
double acceptance_rate(const ChainTrace& trace, std::size_t window);

struct TuningEstimate {
  SpdMatrix u_hat;
  SpdMatrix v_hat;   // unit trace
  bool ridged = false;
};

// Moment-matching scale estimates from pilot samples: U_hat is the centered
// row-Gram average, V_hat the centered column-Gram average scaled to unit
// trace. Singular estimates are ridge-regularized and flagged.
TuningEstimate estimate_tuning(const std::vector<DenseMatrix>& samples);

struct TuneResult {
  KernelConfig config;
  double achieved_rate = 0.0;
  int rounds = 0;
  bool in_band = false;
};

// Bisection on sigma (RWM) or logit(rho) (pCN/MpCN) over pilot runs until
// the acceptance rate enters [band_lo, band_hi], at most max_rounds pilots.
TuneResult tune_scalar(const MatrixTarget& target, const KernelConfig& initial,
                       Rng& rng, double band_lo = 0.2, double band_hi = 0.4,
                       int pilot_steps = 2000, int max_rounds = 20);

struct ProposalCloudRow {
  int pair_index = 0;
  double log_lambda_min = 0.0;
  double log_lambda_max = 0.0;
};

// Log-eigenvalue extremes of n blind proposals S* drawn at the state with
// gram(x, U) = I_q; one row per realisation.
std::vector<ProposalCloudRow> proposal_cloud(const KernelConfig& cfg, int q, int n, Rng& rng);

struct EssResult {
  double ess = 0.0;
  bool flagged = false;  // constant series, or antithetic (ESS > n)
};

// Effective sample size n / (1 + 2 sum rho_k) with Geyer initial-positive-
// sequence truncation of the autocorrelation sums.
EssResult ess(const std::vector<double>& series);

}  // namespace matmcmc

#endif
