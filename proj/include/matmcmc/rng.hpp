#ifndef MATMCMC_RNG_HPP
#define MATMCMC_RNG_HPP

#include <array>
#include <cstdint>

namespace matmcmc {

// Counter-based Philox4x32-10 stream. Every consumer owns its own stream;
// child streams are derived by key mixing, so results never depend on
// scheduling order. All variate algorithms below are fixed-order and
// self-contained, keeping output identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent stream for a subtask; safe to call any number of times
  // with distinct tags.
  Rng child(std::uint64_t tag) const;

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on the open interval (0,1); never returns an endpoint.
  double uniform();

  // Standard normal via the inverse-CDF rational approximation (AS 241,
  // double precision), driven by one uniform.
  double normal();

  // Gamma(shape, scale 1), shape > 0. Marsaglia-Tsang for shape >= 1,
  // boosted for shape < 1.
  double gamma(double shape);

  double chi_square(double dof);           // dof > 0, real-valued
  double exponential(double mean);         // mean > 0

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> ctr_{};
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
};

// Quantile of the standard normal distribution (AS 241); exposed for
// oracle use in tests.
double normal_quantile(double u);

}  // namespace matmcmc

#endif
