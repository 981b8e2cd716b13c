#ifndef MATMCMC_DRIFT_HPP
#define MATMCMC_DRIFT_HPP

#include <vector>

#include "matmcmc/linalg.hpp"
#include "matmcmc/rng.hpp"
#include "matmcmc/target.hpp"

namespace matmcmc {

// Symmetric positive semi-definite matrix; the single entry point where the
// drift evaluation is allowed to touch the boundary of the cone.
class SemiDefiniteMatrix {
 public:
  explicit SemiDefiniteMatrix(const Eigen::MatrixXd& m);
  static SemiDefiniteMatrix diag_with_zeros(double s, int q);  // diag(s, 0, ..., 0)
  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

enum class DriftMethod { Direct, ParetoIs };

struct DriftConfig {
  double r = 2.0;        // Wishart degrees of freedom, > q - 1
  int p = 2;             // upcast dimension
  int q = 2;
  double alpha = 0.3;    // drift exponent, in (0,1)
  int n_samples = 100000;
  DriftMethod method = DriftMethod::Direct;
  double pareto_shape = 1.0;

  void validate() const;
};

// log eta(eps, S) = (r/2) log det eps - tr[(eps - I) S] / 2, defined also for
// degenerate S (target W_q(r, I_q)).
double eta_log(const SpdMatrix& eps, const SemiDefiniteMatrix& s, double r);

struct DriftEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int n_samples = 0;
};

// Monte-Carlo estimate of the relative expected drift change
// E[{eta^{-alpha} - 1} min{1, eta}] at the rho = 0 noise law.
DriftEstimate drift_ratio(const SemiDefiniteMatrix& s, const DriftConfig& cfg, Rng& rng);

struct DriftSweepRow {
  double s = 0.0;
  double alpha = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  int n_samples = 0;
};

// Grid evaluation at S = diag(s, 0, ..., 0); each grid point runs on its own
// derived stream, so results do not depend on evaluation order.
std::vector<DriftSweepRow> drift_sweep(const std::vector<double>& s_grid,
                                       const std::vector<double>& alpha_grid,
                                       const DriftConfig& cfg, const Rng& rng,
                                       int threads = 1);

// (P V - V) / V estimates along a sequence of nondegenerate states for a
// general target on P+(q).
std::vector<DriftEstimate> tail_drift_probe(const SpdTarget& target,
                                            const std::vector<SpdMatrix>& s_sequence,
                                            const DriftConfig& cfg, Rng& rng);

}  // namespace matmcmc

#endif
