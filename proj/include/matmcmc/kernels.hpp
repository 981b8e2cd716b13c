#ifndef MATMCMC_KERNELS_HPP
#define MATMCMC_KERNELS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "matmcmc/target.hpp"

namespace matmcmc {

enum class KernelKind { Rwm, Pcn, Mpcn };
enum class StateSpace { Matrix, Spd };

struct KernelConfig {
  KernelKind kind = KernelKind::Rwm;
  double rho = 0.9;    // pCN / MpCN, in [0,1)
  double sigma = 1.0;  // RWM step scale, > 0
  SpdMatrix u = SpdMatrix::identity(1);
  SpdMatrix v = SpdMatrix::identity(1);  // RWM / pCN only

  int p() const { return u.dim(); }
  void validate() const;
};

KernelConfig rwm_config(double sigma, const SpdMatrix& u, const SpdMatrix& v);
KernelConfig pcn_config(double rho, const SpdMatrix& u, const SpdMatrix& v);
KernelConfig mpcn_config(double rho, const SpdMatrix& u);

struct StepResult {
  DenseMatrix state;
  bool accepted = false;
  double log_target = 0.0;
};

// One Metropolis step of each kernel. The target's reference tag must match
// the proposal's reversibility measure (Lebesgue / Gaussian / nu_U).
StepResult rwm_step(const DenseMatrix& x, const MatrixTarget& target,
                    const KernelConfig& cfg, Rng& rng);
StepResult pcn_step(const DenseMatrix& x, const MatrixTarget& target,
                    const KernelConfig& cfg, Rng& rng);
StepResult mpcn_step(const DenseMatrix& x, const MatrixTarget& target,
                     const KernelConfig& cfg, Rng& rng);

// log q(x,y) of the MpCN proposal with respect to nu_U(dy).
double mpcn_log_proposal_density(const DenseMatrix& x, const DenseMatrix& y,
                                 const KernelConfig& cfg);

struct ChainTrace {
  StateSpace space = StateSpace::Matrix;
  std::vector<DenseMatrix> states;
  std::vector<std::uint8_t> accepted;
  std::vector<double> log_target;
  std::uint64_t seed = 0;
  // MpCN matrix chains store states in U-whitened coordinates z = U^{-1/2} x;
  // the induced P+(q) state z^T z is then arithmetically independent of U.
  bool whitened = false;
  Eigen::MatrixXd root_u;  // U^{1/2}, set when whitened

  std::size_t size() const { return states.size(); }
  // Ambient state on M(p,q) (materializes U^{1/2} z when whitened).
  DenseMatrix ambient_state(std::size_t i) const;
};

// Stepwise driver; caches the factorizations of U and V.
class ChainRunner {
 public:
  // Canonical start: x0 with gram(x0, U) = I_q, q = target.cols.
  ChainRunner(const MatrixTarget& target, const KernelConfig& cfg);
  ChainRunner(const MatrixTarget& target, const KernelConfig& cfg,
              const DenseMatrix& initial);

  struct Proposal {
    DenseMatrix state;       // internal coordinates
    double log_target = 0.0;
    bool usable = false;     // finite, inside the reference support
  };

  // Draws one proposal (no accept decision, no accept uniform consumed).
  Proposal propose(Rng& rng);
  void commit(const Proposal& proposal);

  // One Metropolis step; consumes the proposal draws plus exactly one
  // uniform regardless of the outcome.
  bool step(Rng& rng);

  // Whitened state for MpCN, ambient state otherwise.
  const DenseMatrix& internal_state() const { return state_; }
  DenseMatrix ambient_state() const;
  SpdMatrix induced_state() const;  // x^T U^{-1} x (z^T z when whitened)
  SpdMatrix induced_of(const DenseMatrix& internal_state) const;
  double log_target() const { return log_target_; }
  bool whitened() const { return whitened_; }
  const Eigen::MatrixXd& root_u() const { return root_u_; }

 private:
  void init(const DenseMatrix& internal_initial, bool materialize = true);
  double eval_log_target(const DenseMatrix& state) const;

  MatrixTarget target_;
  KernelConfig cfg_;
  bool whitened_ = false;
  Eigen::MatrixXd root_u_, root_v_;
  DenseMatrix state_;
  double log_target_ = 0.0;
};

// Iterates the configured kernel n_steps times from the canonical initial
// state; the trace holds the initial state plus one entry per step.
ChainTrace run_chain(const MatrixTarget& target, const KernelConfig& cfg,
                     int n_steps, Rng& rng);
ChainTrace run_chain(const DenseMatrix& initial, const MatrixTarget& target,
                     const KernelConfig& cfg, int n_steps, Rng& rng);

// S_n = X_n^T U^{-1} X_n per step, acceptance flags copied.
ChainTrace induced_spd_chain(const ChainTrace& trace, const SpdMatrix& u);

}  // namespace matmcmc

#endif
