#include "matmcmc/noise_law.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "matmcmc/distributions.hpp"

namespace matmcmc {

void EpsilonLawParams::validate() const {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("EpsilonLawParams: rho in [0,1)");
  if (q < 1 || p < q) throw std::invalid_argument("EpsilonLawParams: need p >= q >= 1");
}

SpdMatrix sample_epsilon(const EpsilonLawParams& params, Rng& rng) {
  params.validate();
  // Canonical x0 = [I_q; 0] gives x0^T x0 = I_q exactly; draw one MpCN
  // proposal y and return y^T y.
  const SpdMatrix v = sample_inverse_wishart(
      {static_cast<double>(params.p), SpdMatrix::identity(params.q)}, rng);
  const Eigen::MatrixXd root_v = spd_sqrt(v).mat();
  DenseMatrix w(params.p, params.q);
  for (int i = 0; i < params.p; ++i)
    for (int j = 0; j < params.q; ++j) w(i, j) = rng.normal();
  DenseMatrix y = std::sqrt(1.0 - params.rho) * (w * root_v);
  y.topRows(params.q) += std::sqrt(params.rho) * Eigen::MatrixXd::Identity(params.q, params.q);
  return SpdMatrix::trusted(y.transpose() * y);
}

SpdMatrix sample_epsilon_at(const DenseMatrix& x0, const SpdMatrix& u, double rho, Rng& rng) {
  const int p = static_cast<int>(x0.rows());
  const int q = static_cast<int>(x0.cols());
  if (u.dim() != p) throw std::invalid_argument("sample_epsilon_at: U must be p x p");
  const SpdMatrix g = gram(x0, u);
  const SpdMatrix v = sample_inverse_wishart({static_cast<double>(p), g}, rng);
  const Eigen::MatrixXd root_v = spd_sqrt(v).mat();
  const Eigen::MatrixXd root_u = spd_sqrt(u).mat();
  DenseMatrix z(p, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) z(i, j) = rng.normal();
  const DenseMatrix y = std::sqrt(rho) * x0 + std::sqrt(1.0 - rho) * (root_u * z * root_v);
  return gram(y, u);
}

double eigen_logdensity_rho0(const std::vector<double>& lambdas, int p, int q) {
  if (static_cast<int>(lambdas.size()) != q) {
    throw std::invalid_argument("eigen_logdensity_rho0: expected q eigenvalues");
  }
  for (int i = 0; i < q; ++i) {
    if (!(lambdas[i] > 0.0)) throw std::invalid_argument("eigen_logdensity_rho0: nonpositive eigenvalue");
    if (i > 0 && lambdas[i] < lambdas[i - 1]) {
      throw std::invalid_argument("eigen_logdensity_rho0: eigenvalues must be ascending");
    }
  }
  double acc = 0.0;
  for (int i = 0; i < q; ++i) {
    acc += 0.5 * (p - q - 1) * std::log(lambdas[i]) - p * std::log1p(lambdas[i]);
  }
  for (int i = 0; i < q; ++i) {
    for (int j = i + 1; j < q; ++j) {
      const double gap = lambdas[j] - lambdas[i];
      if (gap <= 0.0) return -std::numeric_limits<double>::infinity();
      acc += std::log(gap);
    }
  }
  return acc;
}

SpdMatrix spd_random_walk_step(const SpdMatrix& s, const EpsilonLawParams& params, Rng& rng) {
  if (s.dim() != params.q) throw std::invalid_argument("spd_random_walk_step: dimension mismatch");
  return circ(sample_epsilon(params, rng), s);
}

}  // namespace matmcmc
