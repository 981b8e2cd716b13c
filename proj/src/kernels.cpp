#include "matmcmc/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace matmcmc {

namespace {

bool matrices_match(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const double scale = std::max(a.norm(), b.norm());
  return (a - b).norm() <= 1e-12 * std::max(scale, 1.0);
}

DenseMatrix standard_normal_matrix(int p, int q, Rng& rng) {
  DenseMatrix z(p, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) z(i, j) = rng.normal();
  return z;
}

// Column-rank check used on proposals; mirrors the SpdMatrix tolerance.
bool full_column_rank(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > kSpdRelTol * es.eigenvalues().maxCoeff();
}

}  // namespace

SpdTarget wishart_spd_target(const WishartParams& params) {
  SpdTarget t;
  t.dim = params.scale.dim();
  t.log_density = [params](const SpdMatrix& s) { return logpdf_wishart_mu(s, params); };
  return t;
}

SpdTarget invwishart_spd_target(const WishartParams& params) {
  SpdTarget t;
  t.dim = params.scale.dim();
  t.log_density = [params](const SpdMatrix& s) { return logpdf_invwishart_mu(s, params); };
  return t;
}

MatrixTarget upcast_target(const SpdTarget& pi, const SpdMatrix& u, int p) {
  if (p < pi.dim) throw std::invalid_argument("upcast_target: need p >= q");
  if (u.dim() != p) throw std::invalid_argument("upcast_target: U must be p x p");
  auto shared = std::make_shared<SpdTarget>(pi);
  MatrixTarget t;
  t.rows = p;
  t.cols = pi.dim;
  t.reference = NuURef{u};
  t.log_density = [shared, u](const DenseMatrix& x) {
    return shared->log_density(gram(x, u));
  };
  t.upcasted = shared;
  return t;
}

MatrixTarget upcast_target_lebesgue(const SpdTarget& pi, const SpdMatrix& u, int p) {
  if (p < pi.dim) throw std::invalid_argument("upcast_target_lebesgue: need p >= q");
  if (u.dim() != p) throw std::invalid_argument("upcast_target_lebesgue: U must be p x p");
  auto shared = std::make_shared<SpdTarget>(pi);
  MatrixTarget t;
  t.rows = p;
  t.cols = pi.dim;
  t.reference = LebesgueRef{};
  t.log_density = [shared, u](const DenseMatrix& x) {
    return shared->log_density(gram(x, u)) + log_nu_u_density(x, u);
  };
  return t;
}

MatrixTarget as_gaussian_reference(const MatrixTarget& lebesgue_target,
                                   const SpdMatrix& u, const SpdMatrix& v) {
  if (!std::holds_alternative<LebesgueRef>(lebesgue_target.reference)) {
    throw std::invalid_argument("as_gaussian_reference: input must be Lebesgue-referenced");
  }
  MatrixNormalParams ref{Eigen::MatrixXd::Zero(u.dim(), v.dim()), u, v};
  MatrixTarget t = lebesgue_target;
  t.reference = GaussianRef{ref};
  auto base = lebesgue_target.log_density;
  t.log_density = [base, ref](const DenseMatrix& x) {
    return base(x) - logpdf_matrix_normal(x, ref);
  };
  return t;
}

MatrixTarget as_nu_u_reference(const MatrixTarget& lebesgue_target, const SpdMatrix& u) {
  if (!std::holds_alternative<LebesgueRef>(lebesgue_target.reference)) {
    throw std::invalid_argument("as_nu_u_reference: input must be Lebesgue-referenced");
  }
  MatrixTarget t = lebesgue_target;
  t.reference = NuURef{u};
  auto base = lebesgue_target.log_density;
  t.log_density = [base, u](const DenseMatrix& x) {
    return base(x) - log_nu_u_density(x, u);
  };
  return t;
}

DenseMatrix upcast_exact_draw(const SpdMatrix& s, const SpdMatrix& u, int p, Rng& rng) {
  const int q = s.dim();
  if (p < q) throw std::invalid_argument("upcast_exact_draw: need p >= q");
  const StiefelPoint w = sample_uniform_stiefel(p, q, rng);
  return spd_sqrt(u).mat() * w.mat() * spd_sqrt(s).mat();
}

void KernelConfig::validate() const {
  if (kind != KernelKind::Rwm) {
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("KernelConfig: rho must be in [0,1)");
  }
  if (kind == KernelKind::Rwm && !(sigma > 0.0)) {
    throw std::invalid_argument("KernelConfig: sigma must be positive");
  }
}

KernelConfig rwm_config(double sigma, const SpdMatrix& u, const SpdMatrix& v) {
  KernelConfig cfg;
  cfg.kind = KernelKind::Rwm;
  cfg.sigma = sigma;
  cfg.u = u;
  cfg.v = v;
  cfg.validate();
  return cfg;
}

KernelConfig pcn_config(double rho, const SpdMatrix& u, const SpdMatrix& v) {
  KernelConfig cfg;
  cfg.kind = KernelKind::Pcn;
  cfg.rho = rho;
  cfg.u = u;
  cfg.v = v;
  cfg.validate();
  return cfg;
}

KernelConfig mpcn_config(double rho, const SpdMatrix& u) {
  KernelConfig cfg;
  cfg.kind = KernelKind::Mpcn;
  cfg.rho = rho;
  cfg.u = u;
  cfg.validate();
  return cfg;
}

double mpcn_log_proposal_density(const DenseMatrix& x, const DenseMatrix& y,
                                 const KernelConfig& cfg) {
  const int p = static_cast<int>(x.rows());
  const int q = static_cast<int>(x.cols());
  if (y.rows() != p || y.cols() != q) {
    throw std::invalid_argument("mpcn_log_proposal_density: shape mismatch");
  }
  const Eigen::MatrixXd uinv_y = cfg.u.mat().llt().solve(y);
  const SpdMatrix gx = gram(x, cfg.u);
  const SpdMatrix gy = gram(y, cfg.u);
  const Eigen::MatrixXd cross = x.transpose() * uinv_y;
  Eigen::MatrixXd r = gx.mat() + gy.mat() -
                      std::sqrt(cfg.rho) * (cross + cross.transpose());
  r = 0.5 * (r + r.transpose());
  Eigen::LLT<Eigen::MatrixXd> rllt(r);
  if (rllt.info() != Eigen::Success) {
    throw std::runtime_error("mpcn_log_proposal_density: R(x,y) not positive-definite");
  }
  double log_det_r = 0.0;
  const Eigen::MatrixXd l = rllt.matrixL();
  for (int i = 0; i < q; ++i) log_det_r += std::log(l(i, i));
  log_det_r *= 2.0;
  const double log_c = multivariate_log_gamma(q, p) - 2.0 * multivariate_log_gamma(q, 0.5 * p);
  return 0.5 * p * q * std::log1p(-cfg.rho) + log_c +
         0.5 * p * (log_det(gx) + log_det(gy)) - p * log_det_r;
}

DenseMatrix ChainTrace::ambient_state(std::size_t i) const {
  if (!whitened) return states[i];
  return root_u * states[i];
}

ChainRunner::ChainRunner(const MatrixTarget& target, const KernelConfig& cfg)
    : target_(target), cfg_(cfg) {
  const int p = cfg_.u.dim();
  const int q = target_.cols;
  if (target_.rows != p) throw std::invalid_argument("ChainRunner: target rows != dim(U)");
  DenseMatrix z0 = Eigen::MatrixXd::Zero(p, q);
  z0.topRows(q) = Eigen::MatrixXd::Identity(q, q);
  // z0 satisfies gram(U^{1/2} z0, U) = I_q; the whitened MpCN chain keeps it
  // exact, the ambient kernels start from U^{1/2} z0.
  init(z0, /*materialize=*/true);
}

ChainRunner::ChainRunner(const MatrixTarget& target, const KernelConfig& cfg,
                         const DenseMatrix& initial)
    : target_(target), cfg_(cfg) {
  if (initial.rows() != target_.rows || initial.cols() != target_.cols) {
    throw std::invalid_argument("ChainRunner: initial state shape mismatch");
  }
  if (cfg_.kind == KernelKind::Mpcn) {
    init(spd_inv_sqrt(cfg_.u).mat() * initial);
  } else {
    init(initial, /*materialize=*/false);
  }
}

void ChainRunner::init(const DenseMatrix& internal_initial, bool materialize) {
  cfg_.validate();
  root_u_ = spd_sqrt(cfg_.u).mat();
  switch (cfg_.kind) {
    case KernelKind::Rwm:
      if (!std::holds_alternative<LebesgueRef>(target_.reference)) {
        throw std::invalid_argument("rwm: target must be Lebesgue-referenced");
      }
      root_v_ = spd_sqrt(cfg_.v).mat();
      break;
    case KernelKind::Pcn: {
      const auto* g = std::get_if<GaussianRef>(&target_.reference);
      if (g == nullptr || g->params.mean.norm() != 0.0 ||
          !matrices_match(g->params.row_cov.mat(), cfg_.u.mat()) ||
          !matrices_match(g->params.col_cov.mat(), cfg_.v.mat())) {
        throw std::invalid_argument(
            "pcn: target must be referenced against N(0, U, V) with the kernel's U, V");
      }
      root_v_ = spd_sqrt(cfg_.v).mat();
      break;
    }
    case KernelKind::Mpcn: {
      const auto* nu = std::get_if<NuURef>(&target_.reference);
      if (nu == nullptr || !matrices_match(nu->u.mat(), cfg_.u.mat())) {
        throw std::invalid_argument("mpcn: target must be referenced against nu_U with the kernel's U");
      }
      whitened_ = true;
      break;
    }
  }
  if (whitened_) {
    state_ = internal_initial;
  } else {
    state_ = materialize ? DenseMatrix(root_u_ * internal_initial) : internal_initial;
  }
  log_target_ = eval_log_target(state_);
  if (!std::isfinite(log_target_)) {
    throw std::domain_error("ChainRunner: log-target not finite at the initial state");
  }
}

double ChainRunner::eval_log_target(const DenseMatrix& state) const {
  if (whitened_) {
    if (target_.upcasted) {
      const Eigen::MatrixXd g = state.transpose() * state;
      return target_.upcasted->log_density(SpdMatrix::trusted(g));
    }
    return target_.log_density(root_u_ * state);
  }
  return target_.log_density(state);
}

DenseMatrix ChainRunner::ambient_state() const {
  return whitened_ ? DenseMatrix(root_u_ * state_) : state_;
}

SpdMatrix ChainRunner::induced_state() const { return induced_of(state_); }

SpdMatrix ChainRunner::induced_of(const DenseMatrix& internal_state) const {
  if (whitened_) return gram(internal_state, SpdMatrix::identity(cfg_.u.dim()));
  return gram(internal_state, cfg_.u);
}

ChainRunner::Proposal ChainRunner::propose(Rng& rng) {
  const int p = target_.rows;
  const int q = target_.cols;
  Proposal out;
  switch (cfg_.kind) {
    case KernelKind::Rwm: {
      const DenseMatrix w = root_u_ * standard_normal_matrix(p, q, rng) * root_v_;
      out.state = state_ + cfg_.sigma * w;
      break;
    }
    case KernelKind::Pcn: {
      const DenseMatrix w = root_u_ * standard_normal_matrix(p, q, rng) * root_v_;
      out.state = std::sqrt(cfg_.rho) * state_ + std::sqrt(1.0 - cfg_.rho) * w;
      break;
    }
    case KernelKind::Mpcn: {
      const Eigen::MatrixXd g = state_.transpose() * state_;
      const SpdMatrix v = sample_inverse_wishart({static_cast<double>(p), SpdMatrix::trusted(g)}, rng);
      const DenseMatrix w = standard_normal_matrix(p, q, rng) * spd_sqrt(v).mat();
      out.state = std::sqrt(cfg_.rho) * state_ + std::sqrt(1.0 - cfg_.rho) * w;
      break;
    }
  }
  out.usable = out.state.allFinite();
  if (out.usable && cfg_.kind == KernelKind::Mpcn) {
    // Proposals at (numeric) column-rank deficiency leave the support of
    // nu_U; reject without evaluating the density.
    out.usable = full_column_rank(out.state.transpose() * out.state);
  }
  out.log_target = -std::numeric_limits<double>::infinity();
  if (out.usable) {
    try {
      out.log_target = eval_log_target(out.state);
    } catch (const std::domain_error&) {
      // e.g. gram at a (numerically) rank-deficient proposal: the target
      // vanishes there, so the move is rejected.
      out.usable = false;
      out.log_target = -std::numeric_limits<double>::infinity();
    }
    if (std::isnan(out.log_target)) out.usable = false;
  }
  return out;
}

void ChainRunner::commit(const Proposal& proposal) {
  if (!proposal.usable) throw std::logic_error("ChainRunner::commit: unusable proposal");
  state_ = proposal.state;
  log_target_ = proposal.log_target;
}

bool ChainRunner::step(Rng& rng) {
  const Proposal prop = propose(rng);
  const double log_u = std::log(rng.uniform());
  const double delta = prop.log_target - log_target_;
  if (prop.usable && !std::isnan(delta) && log_u < std::min(0.0, delta)) {
    commit(prop);
    return true;
  }
  return false;
}

namespace {

StepResult single_step(const DenseMatrix& x, const MatrixTarget& target,
                       const KernelConfig& cfg, Rng& rng) {
  ChainRunner runner(target, cfg, x);
  StepResult out;
  out.accepted = runner.step(rng);
  out.state = runner.ambient_state();
  out.log_target = runner.log_target();
  return out;
}

}  // namespace

StepResult rwm_step(const DenseMatrix& x, const MatrixTarget& target,
                    const KernelConfig& cfg, Rng& rng) {
  if (cfg.kind != KernelKind::Rwm) throw std::invalid_argument("rwm_step: config kind mismatch");
  return single_step(x, target, cfg, rng);
}

StepResult pcn_step(const DenseMatrix& x, const MatrixTarget& target,
                    const KernelConfig& cfg, Rng& rng) {
  if (cfg.kind != KernelKind::Pcn) throw std::invalid_argument("pcn_step: config kind mismatch");
  return single_step(x, target, cfg, rng);
}

StepResult mpcn_step(const DenseMatrix& x, const MatrixTarget& target,
                     const KernelConfig& cfg, Rng& rng) {
  if (cfg.kind != KernelKind::Mpcn) throw std::invalid_argument("mpcn_step: config kind mismatch");
  return single_step(x, target, cfg, rng);
}

ChainTrace run_chain(const MatrixTarget& target, const KernelConfig& cfg,
                     int n_steps, Rng& rng) {
  ChainRunner runner(target, cfg);
  ChainTrace trace;
  trace.space = StateSpace::Matrix;
  trace.seed = rng.seed();
  trace.whitened = runner.whitened();
  trace.root_u = runner.root_u();
  trace.states.push_back(runner.internal_state());
  trace.accepted.push_back(1);
  trace.log_target.push_back(runner.log_target());
  for (int n = 0; n < n_steps; ++n) {
    const bool acc = runner.step(rng);
    trace.states.push_back(runner.internal_state());
    trace.accepted.push_back(acc ? 1 : 0);
    trace.log_target.push_back(runner.log_target());
  }
  return trace;
}

ChainTrace run_chain(const DenseMatrix& initial, const MatrixTarget& target,
                     const KernelConfig& cfg, int n_steps, Rng& rng) {
  ChainRunner runner(target, cfg, initial);
  ChainTrace trace;
  trace.space = StateSpace::Matrix;
  trace.seed = rng.seed();
  trace.whitened = runner.whitened();
  trace.root_u = runner.root_u();
  trace.states.push_back(runner.internal_state());
  trace.accepted.push_back(1);
  trace.log_target.push_back(runner.log_target());
  for (int n = 0; n < n_steps; ++n) {
    const bool acc = runner.step(rng);
    trace.states.push_back(runner.internal_state());
    trace.accepted.push_back(acc ? 1 : 0);
    trace.log_target.push_back(runner.log_target());
  }
  return trace;
}

ChainTrace induced_spd_chain(const ChainTrace& trace, const SpdMatrix& u) {
  ChainTrace out;
  out.space = StateSpace::Spd;
  out.seed = trace.seed;
  out.accepted = trace.accepted;
  out.log_target = trace.log_target;
  out.states.reserve(trace.states.size());
  const SpdMatrix eye = SpdMatrix::identity(
      trace.whitened ? static_cast<int>(trace.root_u.rows()) : u.dim());
  for (const auto& x : trace.states) {
    // Whitened states carry U inside: z^T z equals x^T U^{-1} x.
    out.states.push_back(trace.whitened ? gram(x, eye).mat() : gram(x, u).mat());
  }
  return out;
}

}  // namespace matmcmc
