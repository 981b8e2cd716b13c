#ifndef MATMCMC_NOISE_LAW_HPP
#define MATMCMC_NOISE_LAW_HPP

#include <vector>

#include "matmcmc/linalg.hpp"
#include "matmcmc/rng.hpp"

namespace matmcmc {

// Parameters of the multiplicative noise law of the induced P+(q) random
// walk: the proposal at S factors as eps o S with eps independent of the
// state and of U.
struct EpsilonLawParams {
  double rho = 0.0;  // in [0,1)
  int p = 1;
  int q = 1;

  void validate() const;
};

// Draws eps = y^T y with y one MpCN proposal at the canonical state
// x0 = [I_q; 0], U = I_p.
SpdMatrix sample_epsilon(const EpsilonLawParams& params, Rng& rng);

// Same draw started from an arbitrary full-rank x0 and U; the law does not
// depend on either as long as x0^T U^{-1} x0 = I_q.
SpdMatrix sample_epsilon_at(const DenseMatrix& x0, const SpdMatrix& u, double rho, Rng& rng);

// Unnormalized log joint density of the ascending eigenvalues of eps in the
// rho = 0 regime: sum_i [(p-q-1)/2 log l_i - p log(1+l_i)] + sum_{i<j} log(l_j - l_i).
double eigen_logdensity_rho0(const std::vector<double>& lambdas, int p, int q);

// One random-walk proposal on P+(q): eps o S.
SpdMatrix spd_random_walk_step(const SpdMatrix& s, const EpsilonLawParams& params, Rng& rng);

}  // namespace matmcmc

#endif
