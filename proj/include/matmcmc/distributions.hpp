#ifndef MATMCMC_DISTRIBUTIONS_HPP
#define MATMCMC_DISTRIBUTIONS_HPP

#include <variant>

#include "matmcmc/linalg.hpp"
#include "matmcmc/rng.hpp"

namespace matmcmc {

struct MatrixNormalParams {
  DenseMatrix mean;    // p x q
  SpdMatrix row_cov;   // p x p
  SpdMatrix col_cov;   // q x q
};

struct WishartParams {
  double dof;       // > q - 1, real-valued
  SpdMatrix scale;  // q x q
};

// Reference measure tags. Acceptance ratios pair a target density strictly
// against the measure for which the proposal is reversible, so the tag
// travels with every density.
struct LebesgueRef {};
struct NuURef {
  SpdMatrix u;  // p x p
};
struct GaussianRef {
  MatrixNormalParams params;
};
struct MuRef {};
using ReferenceTag = std::variant<LebesgueRef, NuURef, GaussianRef, MuRef>;

// M + Sigma^{1/2} Z T^{1/2}, Z a p x q array of standard normals.
DenseMatrix sample_matrix_normal(const MatrixNormalParams& params, Rng& rng);

double logpdf_matrix_normal(const DenseMatrix& x, const MatrixNormalParams& params);

// Bartlett construction, valid for real dof > q - 1.
SpdMatrix sample_wishart(const WishartParams& params, Rng& rng);

// Inverse of a W_q(r, T^{-1}) draw, distributed W_q^{-1}(r, T).
SpdMatrix sample_inverse_wishart(const WishartParams& params, Rng& rng);

// Log densities with respect to the reference measure mu on P+(q).
double logpdf_wishart_mu(const SpdMatrix& s, const WishartParams& params);
double logpdf_invwishart_mu(const SpdMatrix& s, const WishartParams& params);

// Haar-uniform point of O(p, q) via QR with positive diagonal signs.
StiefelPoint sample_uniform_stiefel(int p, int q, Rng& rng);

// log d(nu_U)/d(Leb) at x.
double log_nu_u_density(const DenseMatrix& x, const SpdMatrix& u);

}  // namespace matmcmc

#endif
