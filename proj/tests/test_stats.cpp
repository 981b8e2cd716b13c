#include <doctest.h>

#include <cmath>

#include "matmcmc/rng.hpp"
#include "matmcmc/stats.hpp"

using namespace matmcmc;

TEST_CASE("incomplete gamma endpoints and known values") {
  CHECK(gamma_p(1.0, 0.0) == 0.0);
  CHECK(gamma_q(1.0, 0.0) == 1.0);
  // P(1, x) = 1 - exp(-x)
  CHECK(gamma_p(1.0, 2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
  // chi-square with 2 dof: sf(x) = exp(-x/2)
  CHECK(chi_square_sf(3.0, 2.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
  CHECK(gamma_p(3.5, 2.0) + gamma_q(3.5, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-sample KS accepts equal laws and rejects different ones") {
  Rng rng(100);
  std::vector<double> a(4000), b(4000), c(4000);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal();
  for (auto& x : c) x = rng.normal() + 0.4;
  CHECK(ks_two_sample(a, b).p_value > 0.05);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("one-sample KS against the exact CDF") {
  Rng rng(101);
  std::vector<double> u(5000);
  for (auto& x : u) x = rng.uniform();
  CHECK(ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value > 0.05);
}

TEST_CASE("chi-square GOF uniform cells") {
  Rng rng(102);
  std::vector<double> counts(10, 0.0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(rng.uniform() * 10)] += 1.0;
  const std::vector<double> probs(10, 0.1);
  CHECK(chi_square_gof(counts, probs).p_value > 0.01);

  // a clearly wrong model is rejected
  std::vector<double> skew(10, 0.05);
  skew[0] = 0.55;
  CHECK(chi_square_gof(counts, skew).p_value < 1e-10);
}

TEST_CASE("quantile interpolation") {
  std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(8, 0.0, 2.0, x, w);
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) acc += w[i] * (x[i] * x[i] * x[i] + 1.0);
  CHECK(acc == doctest::Approx(4.0 + 2.0).epsilon(1e-12));  // ∫ x^3 + 1 over [0,2]
}
