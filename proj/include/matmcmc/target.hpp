#ifndef MATMCMC_TARGET_HPP
#define MATMCMC_TARGET_HPP

#include <functional>
#include <memory>

#include "matmcmc/distributions.hpp"
#include "matmcmc/linalg.hpp"
#include "matmcmc/rng.hpp"

namespace matmcmc {

// Target on P+(q), density taken with respect to mu.
struct SpdTarget {
  int dim = 0;
  std::function<double(const SpdMatrix&)> log_density;
};

// Target on M(p,q): a log-density together with the reference measure it is
// taken against. Kernels refuse a tag that does not match their proposal's
// reversibility measure.
struct MatrixTarget {
  int rows = 0;
  int cols = 0;
  ReferenceTag reference = LebesgueRef{};
  std::function<double(const DenseMatrix&)> log_density;
  // Set when this target was produced by upcast_target; lets the MpCN chain
  // evaluate the density directly on the induced P+(q) state.
  std::shared_ptr<const SpdTarget> upcasted;
};

SpdTarget wishart_spd_target(const WishartParams& params);
SpdTarget invwishart_spd_target(const WishartParams& params);

// x -> log pi~(x^T U^{-1} x) tagged with reference nu_U; pushing chain
// samples through gram(., U) yields draws from pi~.
MatrixTarget upcast_target(const SpdTarget& pi, const SpdMatrix& u, int p);

// Re-express a Lebesgue-reference target against N_{p,q}(0, U, V) (for pCN)
// or against nu_U (for MpCN), by subtracting the reference log-density.
MatrixTarget as_gaussian_reference(const MatrixTarget& lebesgue_target,
                                   const SpdMatrix& u, const SpdMatrix& v);
MatrixTarget as_nu_u_reference(const MatrixTarget& lebesgue_target, const SpdMatrix& u);

// Lebesgue-reference density of the upcasted law (target density times the
// nu_U density); the form RWM needs.
MatrixTarget upcast_target_lebesgue(const SpdTarget& pi, const SpdMatrix& u, int p);

// Exact draw from the upcasted law: X = U^{1/2} W S^{1/2} with S a draw from
// pi~ supplied by the caller and W Haar-uniform on O(p,q).
DenseMatrix upcast_exact_draw(const SpdMatrix& s, const SpdMatrix& u, int p, Rng& rng);

}  // namespace matmcmc

#endif
