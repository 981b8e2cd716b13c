#include "matmcmc/linalg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace matmcmc {

namespace {

void check_square_finite(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& m) {
  check_square_finite(m, "SpdMatrix");
  m_ = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > kSpdRelTol * hi)) {
    std::ostringstream os;
    os << "SpdMatrix: not positive-definite (min eigenvalue " << lo
       << ", max eigenvalue " << hi << ")";
    throw std::domain_error(os.str());
  }
}

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& m, Trusted) : m_(0.5 * (m + m.transpose())) {}

SpdMatrix SpdMatrix::trusted(const Eigen::MatrixXd& m) { return SpdMatrix(m, Trusted{}); }

SpdMatrix SpdMatrix::identity(int dim) {
  return SpdMatrix::trusted(Eigen::MatrixXd::Identity(dim, dim));
}

StiefelPoint::StiefelPoint(const Eigen::MatrixXd& m) : m_(m) {
  if (m.rows() < m.cols() || m.cols() < 1) {
    throw std::invalid_argument("StiefelPoint: need p >= q >= 1");
  }
  const Eigen::MatrixXd gram = m.transpose() * m;
  const double err = (gram - Eigen::MatrixXd::Identity(m.cols(), m.cols())).norm();
  if (!(err < 1e-10)) {
    std::ostringstream os;
    os << "StiefelPoint: columns not orthonormal (|U^T U - I|_F = " << err << ")";
    throw std::invalid_argument(os.str());
  }
}

SpdMatrix spd_sqrt(const SpdMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.mat());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spd_sqrt: eigendecomposition failed");
  }
  const Eigen::VectorXd lam = es.eigenvalues();
  if (lam.minCoeff() <= 0.0) {
    std::ostringstream os;
    os << "spd_sqrt: nonpositive eigenvalue " << lam.minCoeff();
    throw std::domain_error(os.str());
  }
  return SpdMatrix::trusted(es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
                            es.eigenvectors().transpose());
}

SpdMatrix spd_inv_sqrt(const SpdMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.mat());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spd_inv_sqrt: eigendecomposition failed");
  }
  return SpdMatrix::trusted(es.eigenvectors() *
                            es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose());
}

SpdMatrix spd_inverse(const SpdMatrix& s) {
  return SpdMatrix::trusted(s.mat().llt().solve(
      Eigen::MatrixXd::Identity(s.dim(), s.dim())));
}

SpdMatrix circ(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("circ: dimension mismatch");
  const Eigen::MatrixXd rb = spd_sqrt(b).mat();
  return SpdMatrix::trusted(rb * a.mat() * rb);
}

double spd_metric(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("spd_metric: dimension mismatch");
  // Eigenvalues of A o B^{-1} equal the generalized eigenvalues of (A, B);
  // whiten by the Cholesky factor of B and solve the symmetric problem.
  const Eigen::MatrixXd lb = b.mat().llt().matrixL();
  const Eigen::MatrixXd w =
      lb.triangularView<Eigen::Lower>().solve(a.mat()).transpose();
  const Eigen::MatrixXd c = lb.triangularView<Eigen::Lower>().solve(w);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double l = std::log(es.eigenvalues()[i]);
    acc += l * l;
  }
  return std::sqrt(acc);
}

Eigen::MatrixXd spd_log(const SpdMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.mat());
  const Eigen::MatrixXd out = es.eigenvectors() *
                              es.eigenvalues().array().log().matrix().asDiagonal() *
                              es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

SpdMatrix spd_exp_scaled(const SpdMatrix& a, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.mat());
  return SpdMatrix::trusted(es.eigenvectors() *
                            (-t * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                            es.eigenvectors().transpose());
}

SpdMatrix gram(const DenseMatrix& x, const SpdMatrix& u) {
  if (x.rows() != u.dim()) throw std::invalid_argument("gram: U must be p x p");
  if (x.rows() < x.cols()) throw std::invalid_argument("gram: need p >= q");
  const Eigen::MatrixXd g = x.transpose() * u.mat().llt().solve(x);
  const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > kSpdRelTol * es.eigenvalues().maxCoeff())) {
    throw std::domain_error("gram: x is (numerically) rank-deficient");
  }
  return SpdMatrix::trusted(sym);
}

double log_det(const SpdMatrix& s) {
  const Eigen::MatrixXd l = s.mat().llt().matrixL();
  double acc = 0.0;
  for (int i = 0; i < s.dim(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

double multivariate_log_gamma(int q, double a) {
  if (q < 1) throw std::domain_error("multivariate_log_gamma: q must be >= 1");
  if (!(a > 0.5 * (q - 1))) {
    std::ostringstream os;
    os << "multivariate_log_gamma: need a > (q-1)/2, got a = " << a << ", q = " << q;
    throw std::domain_error(os.str());
  }
  double acc = 0.25 * q * (q - 1) * std::log(M_PI);
  for (int j = 1; j <= q; ++j) acc += std::lgamma(a + 0.5 * (1 - j));
  return acc;
}

}  // namespace matmcmc
