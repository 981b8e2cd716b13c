#include <doctest.h>

#include <cmath>
#include <vector>

#include "matmcmc/diagnostics.hpp"
#include "matmcmc/stats.hpp"

using namespace matmcmc;

namespace {

SpdMatrix random_spd(int q, Rng& rng, double jitter = 0.5) {
  Eigen::MatrixXd a(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) a(i, j) = rng.normal();
  return SpdMatrix(a * a.transpose() + jitter * Eigen::MatrixXd::Identity(q, q));
}

ChainTrace spd_trace(const std::vector<Eigen::MatrixXd>& states,
                     const std::vector<std::uint8_t>& accepted) {
  ChainTrace t;
  t.space = StateSpace::Spd;
  t.states = states;
  t.accepted = accepted;
  t.log_target.assign(states.size(), 0.0);
  return t;
}

}  // namespace

TEST_CASE("running mean distance basics") {
  Rng rng(110);
  const SpdMatrix mean = random_spd(3, rng);

  // constant trace at the true mean stays at zero
  const ChainTrace constant = spd_trace({mean.mat(), mean.mat(), mean.mat()}, {1, 1, 1});
  for (double d : running_mean_distance(constant, mean)) CHECK(d < 1e-9);

  // a single state reports its own distance
  const SpdMatrix s = random_spd(3, rng);
  const ChainTrace single = spd_trace({s.mat()}, {1});
  CHECK(running_mean_distance(single, mean)[0] ==
        doctest::Approx(spd_metric(s, mean)).epsilon(1e-12));
}

TEST_CASE("acceptance rate over trailing windows") {
  ChainTrace t;
  t.space = StateSpace::Spd;
  t.states.assign(7, Eigen::MatrixXd::Identity(2, 2));
  t.accepted = {1, 1, 1, 1, 1, 1, 1};
  t.log_target.assign(7, 0.0);
  CHECK(acceptance_rate(t, 6) == 1.0);

  t.accepted = {1, 1, 0, 1, 0, 1, 0};
  CHECK(acceptance_rate(t, 6) == 0.5);
  CHECK_THROWS_AS(acceptance_rate(t, 7), std::invalid_argument);
}

TEST_CASE("tuning estimates recover the kronecker scale structure") {
  Rng rng(111);
  const int p = 3, q = 2, n = 100000;
  const SpdMatrix sigma = random_spd(p, rng);
  const SpdMatrix t = random_spd(q, rng);
  MatrixNormalParams params{Eigen::MatrixXd::Zero(p, q), sigma, t};
  std::vector<DenseMatrix> samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) samples.push_back(sample_matrix_normal(params, rng));
  const TuningEstimate est = estimate_tuning(samples);
  CHECK_FALSE(est.ridged);
  CHECK(est.v_hat.mat().trace() == 1.0);

  // U_hat (x) V_hat should match Sigma (x) T entrywise (the expectation makes
  // the Kronecker ambiguity constant exactly one)
  const Eigen::MatrixXd uv = est.u_hat.mat();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) {
          const double got = uv(i, j) * est.v_hat(a, b);
          const double want = sigma(i, j) * t(a, b);
          CHECK(std::fabs(got - want) < 0.05 * (std::fabs(want) + 0.2));
        }
}

TEST_CASE("tuning estimate ridge path on degenerate samples") {
  const DenseMatrix x = Eigen::MatrixXd::Constant(2, 2, 0.7);
  const TuningEstimate est = estimate_tuning({x, x});
  CHECK(est.ridged);
  CHECK(est.v_hat.mat().trace() == 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est.u_hat.mat(), Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("scalar tuning drives the acceptance rate into the band") {
  // scalar standard normal target under RWM, starting far off
  MatrixTarget target;
  target.rows = 1;
  target.cols = 1;
  target.reference = LebesgueRef{};
  target.log_density = [](const DenseMatrix& x) {
    return -0.5 * std::log(2.0 * M_PI) - 0.5 * x(0, 0) * x(0, 0);
  };
  Rng rng(112);
  const TuneResult tuned =
      tune_scalar(target, rwm_config(50.0, SpdMatrix::identity(1), SpdMatrix::identity(1)), rng);
  CHECK(tuned.in_band);
  CHECK(tuned.achieved_rate >= 0.2);
  CHECK(tuned.achieved_rate <= 0.4);
}

TEST_CASE("tuning flags a self-target pcn whose acceptance is stuck at one") {
  const int p = 2, q = 2;
  MatrixTarget self;
  self.rows = p;
  self.cols = q;
  self.reference = GaussianRef{MatrixNormalParams{Eigen::MatrixXd::Zero(p, q),
                                                  SpdMatrix::identity(p), SpdMatrix::identity(q)}};
  self.log_density = [](const DenseMatrix&) { return 0.0; };
  Rng rng(113);
  const TuneResult tuned = tune_scalar(
      self, pcn_config(0.5, SpdMatrix::identity(p), SpdMatrix::identity(q)), rng);
  CHECK_FALSE(tuned.in_band);
  CHECK(tuned.achieved_rate == 1.0);
  CHECK(tuned.rounds == 20);
}

TEST_CASE("acceptance moves monotonically with the knobs on an upcast wishart") {
  const int p = 2, q = 2;
  const SpdTarget pi = wishart_spd_target({2.0, SpdMatrix::identity(q)});
  const SpdMatrix u = SpdMatrix::identity(p);
  const SpdMatrix v = SpdMatrix::identity(q);

  auto rate = [&](const KernelConfig& cfg, const MatrixTarget& target, std::uint64_t seed) {
    ChainRunner runner(target, cfg);
    Rng rng(seed);
    int hits = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) hits += runner.step(rng) ? 1 : 0;
    return static_cast<double>(hits) / n;
  };

  const MatrixTarget nu_target = upcast_target(pi, u, p);
  CHECK(rate(mpcn_config(0.9, u), nu_target, 1) > rate(mpcn_config(0.2, u), nu_target, 2));

  const MatrixTarget leb_target = upcast_target_lebesgue(pi, u, p);
  CHECK(rate(rwm_config(0.1, u, v), leb_target, 3) > rate(rwm_config(2.0, u, v), leb_target, 4));
}

TEST_CASE("proposal clouds show the p-trends of each kernel") {
  const int q = 4, n = 1000;
  const SpdMatrix v = SpdMatrix::identity(q);
  Rng rng(114);

  auto mean_log_lambda = [](const std::vector<ProposalCloudRow>& rows) {
    double acc = 0.0;
    for (const auto& r : rows) acc += 0.5 * (r.log_lambda_min + r.log_lambda_max);
    return acc / static_cast<double>(rows.size());
  };
  auto mean_norm = [](const std::vector<ProposalCloudRow>& rows) {
    double acc = 0.0;
    for (const auto& r : rows) {
      acc += std::sqrt(r.log_lambda_min * r.log_lambda_min +
                       r.log_lambda_max * r.log_lambda_max);
    }
    return acc / static_cast<double>(rows.size());
  };

  // RWM and pCN: S* grows with p
  for (auto kind : {KernelKind::Rwm, KernelKind::Pcn}) {
    auto cfg_for = [&](int p) {
      return kind == KernelKind::Rwm ? rwm_config(1.0, SpdMatrix::identity(p), v)
                                     : pcn_config(0.5, SpdMatrix::identity(p), v);
    };
    Rng r4 = rng.child(4 + static_cast<std::uint64_t>(kind));
    Rng r16 = rng.child(16 + static_cast<std::uint64_t>(kind));
    const double low_p = mean_log_lambda(proposal_cloud(cfg_for(4), q, n, r4));
    const double high_p = mean_log_lambda(proposal_cloud(cfg_for(16), q, n, r16));
    CHECK(high_p > low_p);
  }

  // MpCN: the cloud collapses towards the current state as p grows
  Rng m4 = rng.child(100);
  Rng m64 = rng.child(101);
  const double spread_p4 = mean_norm(proposal_cloud(mpcn_config(0.5, SpdMatrix::identity(4)), q, n, m4));
  const double spread_p64 =
      mean_norm(proposal_cloud(mpcn_config(0.5, SpdMatrix::identity(64)), q, n, m64));
  CHECK(spread_p64 < spread_p4);

  Rng empty_rng(115);
  CHECK(proposal_cloud(mpcn_config(0.5, SpdMatrix::identity(4)), q, 0, empty_rng).empty());
}

TEST_CASE("effective sample size") {
  Rng rng(116);
  const int n = 10000;

  std::vector<double> iid(n);
  for (auto& x : iid) x = rng.normal();
  const EssResult r_iid = ess(iid);
  CHECK_FALSE(r_iid.flagged);
  CHECK(std::fabs(r_iid.ess - n) < 0.1 * n);

  std::vector<double> alternating(n);
  for (int i = 0; i < n; ++i) alternating[static_cast<std::size_t>(i)] = (i % 2 == 0) ? 1.0 : -1.0;
  const EssResult r_alt = ess(alternating);
  CHECK(r_alt.flagged);
  CHECK(r_alt.ess > n);

  const EssResult r_const = ess(std::vector<double>(n, 3.14));
  CHECK(r_const.flagged);
  CHECK(r_const.ess == n);

  CHECK_THROWS_AS(ess(std::vector<double>(5, 1.0)), std::invalid_argument);
}
