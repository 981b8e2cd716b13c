#include "matmcmc/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace matmcmc {

namespace {

DenseMatrix standard_normal_matrix(int p, int q, Rng& rng) {
  DenseMatrix z(p, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) z(i, j) = rng.normal();
  return z;
}

void check_wishart_params(const WishartParams& params, const char* what) {
  const int q = params.scale.dim();
  if (!(params.dof > q - 1)) {
    throw std::domain_error(std::string(what) + ": need dof > q - 1");
  }
}

}  // namespace

DenseMatrix sample_matrix_normal(const MatrixNormalParams& params, Rng& rng) {
  const int p = params.row_cov.dim();
  const int q = params.col_cov.dim();
  if (params.mean.rows() != p || params.mean.cols() != q) {
    throw std::invalid_argument("sample_matrix_normal: mean shape mismatch");
  }
  const DenseMatrix z = standard_normal_matrix(p, q, rng);
  return params.mean + spd_sqrt(params.row_cov).mat() * z * spd_sqrt(params.col_cov).mat();
}

double logpdf_matrix_normal(const DenseMatrix& x, const MatrixNormalParams& params) {
  const int p = params.row_cov.dim();
  const int q = params.col_cov.dim();
  if (x.rows() != p || x.cols() != q) {
    throw std::invalid_argument("logpdf_matrix_normal: shape mismatch");
  }
  const DenseMatrix centered = x - params.mean;
  const Eigen::MatrixXd sig_inv_c = params.row_cov.mat().llt().solve(centered);
  const Eigen::MatrixXd t_inv_ct =
      params.col_cov.mat().llt().solve(centered.transpose());
  const double quad = (t_inv_ct * sig_inv_c).trace();
  return -0.5 * quad - 0.5 * p * q * std::log(2.0 * M_PI) -
         0.5 * q * log_det(params.row_cov) - 0.5 * p * log_det(params.col_cov);
}

SpdMatrix sample_wishart(const WishartParams& params, Rng& rng) {
  check_wishart_params(params, "sample_wishart");
  const int q = params.scale.dim();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(q, q);
  for (int i = 0; i < q; ++i) {
    l(i, i) = std::sqrt(rng.chi_square(params.dof - i));
    for (int j = 0; j < i; ++j) l(i, j) = rng.normal();
  }
  const Eigen::MatrixXd root = spd_sqrt(params.scale).mat();
  const Eigen::MatrixXd rl = root * l;
  return SpdMatrix::trusted(rl * rl.transpose());
}

SpdMatrix sample_inverse_wishart(const WishartParams& params, Rng& rng) {
  check_wishart_params(params, "sample_inverse_wishart");
  const SpdMatrix w = sample_wishart({params.dof, spd_inverse(params.scale)}, rng);
  return spd_inverse(w);
}

double logpdf_wishart_mu(const SpdMatrix& s, const WishartParams& params) {
  check_wishart_params(params, "logpdf_wishart_mu");
  const int q = params.scale.dim();
  if (s.dim() != q) throw std::invalid_argument("logpdf_wishart_mu: dimension mismatch");
  const double r = params.dof;
  const double tr_term = params.scale.mat().llt().solve(s.mat()).trace();
  return 0.5 * r * log_det(s) - 0.5 * tr_term - 0.5 * r * q * std::log(2.0) -
         0.5 * r * log_det(params.scale) - multivariate_log_gamma(q, 0.5 * r);
}

double logpdf_invwishart_mu(const SpdMatrix& s, const WishartParams& params) {
  check_wishart_params(params, "logpdf_invwishart_mu");
  const int q = params.scale.dim();
  if (s.dim() != q) throw std::invalid_argument("logpdf_invwishart_mu: dimension mismatch");
  const double r = params.dof;
  const double tr_term = (params.scale.mat() * s.mat().llt().solve(
                              Eigen::MatrixXd::Identity(q, q))).trace();
  return 0.5 * r * log_det(params.scale) - 0.5 * tr_term -
         0.5 * r * q * std::log(2.0) - 0.5 * r * log_det(s) -
         multivariate_log_gamma(q, 0.5 * r);
}

StiefelPoint sample_uniform_stiefel(int p, int q, Rng& rng) {
  if (p < q || q < 1) throw std::invalid_argument("sample_uniform_stiefel: need p >= q >= 1");
  const DenseMatrix z = standard_normal_matrix(p, q, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::MatrixXd qfull = qr.householderQ() * Eigen::MatrixXd::Identity(p, q);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  for (int j = 0; j < q; ++j) {
    if (r(j, j) < 0.0) qfull.col(j) = -qfull.col(j);
  }
  return StiefelPoint(qfull);
}

double log_nu_u_density(const DenseMatrix& x, const SpdMatrix& u) {
  const int p = static_cast<int>(x.rows());
  const int q = static_cast<int>(x.cols());
  if (u.dim() != p) throw std::invalid_argument("log_nu_u_density: U must be p x p");
  const SpdMatrix g = gram(x, u);
  return multivariate_log_gamma(q, 0.5 * p) - 0.5 * p * q * std::log(M_PI) -
         0.5 * q * log_det(u) - 0.5 * p * log_det(g);
}

}  // namespace matmcmc
