#ifndef MATMCMC_LINALG_HPP
#define MATMCMC_LINALG_HPP

#include <Eigen/Dense>

namespace matmcmc {

// A point of M(p,q); plain dense storage, no constraints beyond finiteness.
using DenseMatrix = Eigen::MatrixXd;

// Relative eigenvalue floor below which a symmetric matrix is treated as
// outside the open cone P+(q).
inline constexpr double kSpdRelTol = 1e-12;

// Symmetric positive-definite matrix. Symmetrized on construction; the
// smallest eigenvalue must exceed kSpdRelTol times the largest.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Eigen::MatrixXd& m);
  static SpdMatrix identity(int dim);

  // Wraps without the eigenvalue check (still symmetrizes). For internal
  // construction sites where positive-definiteness holds by construction.
  static SpdMatrix trusted(const Eigen::MatrixXd& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  struct Trusted {};
  SpdMatrix(const Eigen::MatrixXd& m, Trusted);
  Eigen::MatrixXd m_;
};

// p x q matrix with orthonormal columns (U^T U = I_q within 1e-10).
class StiefelPoint {
 public:
  explicit StiefelPoint(const Eigen::MatrixXd& m);
  int rows() const { return static_cast<int>(m_.rows()); }
  int cols() const { return static_cast<int>(m_.cols()); }
  const Eigen::MatrixXd& mat() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

// Symmetric square root: B in P+(q) with B B = S.
SpdMatrix spd_sqrt(const SpdMatrix& s);

// Inverse of the symmetric square root, i.e. (S^{1/2})^{-1} = (S^{-1})^{1/2}.
SpdMatrix spd_inv_sqrt(const SpdMatrix& s);

SpdMatrix spd_inverse(const SpdMatrix& s);

// A o B = B^{1/2} A B^{1/2}.
SpdMatrix circ(const SpdMatrix& a, const SpdMatrix& b);

// Distance induced by the logarithmic map: {sum_i log^2 lambda_i}^{1/2}
// over the eigenvalues of A o B^{-1}.
double spd_metric(const SpdMatrix& a, const SpdMatrix& b);

// Matrix logarithm through the eigendecomposition; result is symmetric.
Eigen::MatrixXd spd_log(const SpdMatrix& s);

// exp(-A t) for symmetric positive-definite A and real t.
SpdMatrix spd_exp_scaled(const SpdMatrix& a, double t);

// x^T U^{-1} x for full-column-rank x; throws std::domain_error at (numeric)
// rank deficiency.
SpdMatrix gram(const DenseMatrix& x, const SpdMatrix& u);

double log_det(const SpdMatrix& s);

// log Gamma_q(a), a > (q-1)/2.
double multivariate_log_gamma(int q, double a);

}  // namespace matmcmc

#endif
