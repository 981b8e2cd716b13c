#include <doctest.h>

#include <cmath>

#include "matmcmc/linalg.hpp"
#include "matmcmc/rng.hpp"

using namespace matmcmc;

namespace {

SpdMatrix random_spd(int q, Rng& rng, double jitter = 0.5) {
  Eigen::MatrixXd a(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) a(i, j) = rng.normal();
  return SpdMatrix(a * a.transpose() + jitter * Eigen::MatrixXd::Identity(q, q));
}

Eigen::MatrixXd random_dense(int p, int q, Rng& rng) {
  Eigen::MatrixXd x(p, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) x(i, j) = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("SpdMatrix symmetrizes and rejects non-PD input") {
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 0.1, 0.3, 1.0;
  const SpdMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == doctest::Approx(0.2));

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1e-9;
  CHECK_THROWS_AS(SpdMatrix{bad}, std::domain_error);
}

TEST_CASE("spd_sqrt identity and diagonal cases") {
  const SpdMatrix eye = SpdMatrix::identity(3);
  CHECK((spd_sqrt(eye).mat() - eye.mat()).norm() < 1e-14);

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const SpdMatrix root = spd_sqrt(SpdMatrix(d));
  CHECK(root(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(root(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("spd_sqrt reconstructs seeded random matrices") {
  Rng rng(11);
  const SpdMatrix s = random_spd(5, rng);
  const SpdMatrix b = spd_sqrt(s);
  CHECK((b.mat() * b.mat() - s.mat()).norm() / s.mat().norm() < 1e-10);
}

TEST_CASE("circ basic identities") {
  Rng rng(12);
  const SpdMatrix a = random_spd(4, rng);
  const SpdMatrix b = random_spd(4, rng);
  const SpdMatrix eye = SpdMatrix::identity(4);

  CHECK((circ(a, eye).mat() - a.mat()).norm() < 1e-12);
  CHECK((circ(eye, b).mat() - b.mat()).norm() < 1e-12);
  // tr(A o B) = tr(AB)
  CHECK(circ(a, b).mat().trace() ==
        doctest::Approx((a.mat() * b.mat()).trace()).epsilon(1e-10));
}

TEST_CASE("circ commutes with inversion") {
  Rng rng(13);
  const SpdMatrix a = random_spd(3, rng);
  const SpdMatrix b = random_spd(3, rng);
  const Eigen::MatrixXd lhs = circ(spd_inverse(a), spd_inverse(b)).mat();
  const Eigen::MatrixXd rhs = spd_inverse(circ(a, b)).mat();
  CHECK((lhs - rhs).norm() / rhs.norm() < 1e-9);
}

TEST_CASE("spd_metric basics") {
  Rng rng(14);
  const SpdMatrix s = random_spd(3, rng);
  CHECK(spd_metric(s, s) < 1e-12);

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = std::exp(2.0);
  d(1, 1) = std::exp(-2.0);
  CHECK(spd_metric(SpdMatrix(d), SpdMatrix::identity(2)) ==
        doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
}

TEST_CASE("spd_metric congruence invariance") {
  Rng rng(15);
  const int q = 3;
  const SpdMatrix s = random_spd(q, rng);
  const SpdMatrix t = random_spd(q, rng);
  Eigen::MatrixXd a = random_dense(q, q, rng);
  a += 3.0 * Eigen::MatrixXd::Identity(q, q);  // comfortably invertible
  const SpdMatrix sa = SpdMatrix(a * s.mat() * a.transpose());
  const SpdMatrix ta = SpdMatrix(a * t.mat() * a.transpose());
  CHECK(spd_metric(sa, ta) == doctest::Approx(spd_metric(s, t)).epsilon(1e-9));
}

TEST_CASE("spd_metric is a metric on seeded triples") {
  Rng rng(16);
  for (int q : {2, 3, 4}) {
    for (int it = 0; it < 1000; ++it) {
      const SpdMatrix a = random_spd(q, rng);
      const SpdMatrix b = random_spd(q, rng);
      const SpdMatrix c = random_spd(q, rng);
      const double dab = spd_metric(a, b);
      const double dba = spd_metric(b, a);
      const double dac = spd_metric(a, c);
      const double dcb = spd_metric(c, b);
      CHECK(dab >= 0.0);
      CHECK(dab == doctest::Approx(dba).epsilon(1e-9));
      CHECK(dab <= dac + dcb + 1e-9);
    }
    const SpdMatrix s = random_spd(q, rng);
    CHECK(spd_metric(s, s) < 1e-12);
  }
}

TEST_CASE("spd_log of identity and diagonal") {
  CHECK(spd_log(SpdMatrix::identity(3)).norm() < 1e-14);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = std::exp(1.0);
  d(1, 1) = 1.0;
  const Eigen::MatrixXd l = spd_log(SpdMatrix(d));
  CHECK(l(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(l(1, 1)) < 1e-12);
}

TEST_CASE("spd_log round trip") {
  Rng rng(17);
  const SpdMatrix s = random_spd(6, rng);
  const Eigen::MatrixXd l = spd_log(s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
  const Eigen::MatrixXd back = es.eigenvectors() *
                               es.eigenvalues().array().exp().matrix().asDiagonal() *
                               es.eigenvectors().transpose();
  CHECK((back - s.mat()).norm() / s.mat().norm() < 1e-10);
}

TEST_CASE("spd_exp_scaled") {
  Rng rng(18);
  const SpdMatrix a = random_spd(2, rng);
  CHECK((spd_exp_scaled(a, 0.0).mat() - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-13);

  const double omega = 0.7, t = 1.3;
  const SpdMatrix scaled = spd_exp_scaled(
      SpdMatrix(omega * Eigen::MatrixXd::Identity(3, 3)), t);
  CHECK((scaled.mat() - std::exp(-omega * t) * Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);

  const Eigen::MatrixXd semi = spd_exp_scaled(a, 0.4).mat() * spd_exp_scaled(a, 0.9).mat();
  CHECK((semi - spd_exp_scaled(a, 1.3).mat()).norm() < 1e-9);
}

TEST_CASE("gram products") {
  Rng rng(19);
  const int p = 4, q = 3;
  // stacked identity gives I_q
  Eigen::MatrixXd x0 = Eigen::MatrixXd::Zero(p, q);
  x0.topRows(q) = Eigen::MatrixXd::Identity(q, q);
  CHECK((gram(x0, SpdMatrix::identity(p)).mat() - Eigen::MatrixXd::Identity(q, q)).norm() < 1e-14);

  // U = I reduces to x^T x, checked entrywise
  const Eigen::MatrixXd x = random_dense(p, q, rng);
  const Eigen::MatrixXd direct = x.transpose() * x;
  CHECK((gram(x, SpdMatrix::identity(p)).mat() - direct).norm() < 1e-12);

  // gram(U^{1/2} z, U) = z^T z
  const SpdMatrix u = random_spd(p, rng);
  const Eigen::MatrixXd z = random_dense(p, q, rng);
  CHECK((gram(spd_sqrt(u).mat() * z, u).mat() - z.transpose() * z).norm() < 1e-10);

  // rank-deficient input is rejected
  Eigen::MatrixXd defect = random_dense(p, q, rng);
  defect.col(2) = defect.col(0) + defect.col(1);
  CHECK_THROWS_AS(gram(defect, SpdMatrix::identity(p)), std::domain_error);

  // gram output is SPD for full-rank input
  const SpdMatrix g = gram(random_dense(p, q, rng), u);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.mat(), Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("multivariate_log_gamma") {
  CHECK(multivariate_log_gamma(1, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(multivariate_log_gamma(1, 0.5) == doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-14));
  // q=3, a=4 against the direct product of scalar gammas
  const double direct = 1.5 * std::log(M_PI) + std::lgamma(4.0) + std::lgamma(3.5) + std::lgamma(3.0);
  CHECK(multivariate_log_gamma(3, 4.0) == doctest::Approx(direct).epsilon(1e-14));
  CHECK_THROWS_AS(multivariate_log_gamma(3, 1.0), std::domain_error);
}

TEST_CASE("StiefelPoint validates orthonormality") {
  Eigen::MatrixXd ok = Eigen::MatrixXd::Zero(3, 2);
  ok(0, 0) = 1.0;
  ok(1, 1) = 1.0;
  CHECK_NOTHROW(StiefelPoint{ok});
  ok(2, 0) = 0.5;
  CHECK_THROWS_AS(StiefelPoint{ok}, std::invalid_argument);
}
