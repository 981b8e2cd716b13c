#ifndef MATMCMC_STATS_HPP
#define MATMCMC_STATS_HPP

#include <functional>
#include <vector>

namespace matmcmc {

// Regularized lower incomplete gamma P(a, x); Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-square distribution with dof degrees.
double chi_square_sf(double x, double dof);

// Kolmogorov distribution tail Q_KS(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// One-sample KS against a continuous CDF.
KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

struct ChiSquareGofResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 0.0;
};

// Goodness of fit of observed counts against cell probabilities; cells with
// expected count below min_expected are pooled into their predecessor.
ChiSquareGofResult chi_square_gof(const std::vector<double>& observed,
                                  const std::vector<double>& expected_probs,
                                  double min_expected = 5.0);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);

// Empirical quantile (linear interpolation between order statistics).
double quantile(std::vector<double> v, double prob);

// Nodes and weights of the n-point Gauss-Legendre rule on [a, b].
void gauss_legendre(int n, double a, double b,
                    std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace matmcmc

#endif
