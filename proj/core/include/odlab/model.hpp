#ifndef ODLAB_MODEL_HPP
#define ODLAB_MODEL_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "odlab/geometry.hpp"

namespace odlab {

/// Constant symmetric positive definite diffusion matrix with cached powers.
class DiffusionMatrix {
 public:
  explicit DiffusionMatrix(Eigen::MatrixXd sigma);
  static DiffusionMatrix identity(int d);
  static DiffusionMatrix diagonal(const Vec& diag);

  int dim() const { return static_cast<int>(sigma_.rows()); }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& sigma_sq() const { return sigma_sq_; }
  const Eigen::MatrixXd& sigma_inv() const { return sigma_inv_; }
  const Eigen::MatrixXd& sigma_inv_sq() const { return sigma_inv_sq_; }
  double trace_sigma_sq() const { return trace_sigma_sq_; }
  double det_sigma() const { return det_sigma_; }
  bool is_identity() const { return identity_; }

  // Hot-loop applications on raw arrays (out may not alias in).
  void apply_sigma(const double* in, double* out) const;
  void apply_sigma_sq(const double* in, double* out) const;

 private:
  Eigen::MatrixXd sigma_, sigma_sq_, sigma_inv_, sigma_inv_sq_;
  double trace_sigma_sq_ = 0.0;
  double det_sigma_ = 0.0;
  bool identity_ = false;
  std::vector<double> flat_sigma_, flat_sigma_sq_;  // row-major
};

/// One harmonic of a real trigonometric polynomial on T^d:
///   a * cos(2 pi k.x) + b * sin(2 pi k.x), with integer wave vector k.
struct TrigTerm {
  std::vector<int> wave;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

/// Finite trigonometric polynomial on T^d. 1-periodic and C^inf by
/// construction, with exact derivatives and coefficient-based sup bounds.
class TrigPoly {
 public:
  TrigPoly() = default;
  TrigPoly(int d, std::vector<TrigTerm> terms);

  int dim() const { return d_; }
  bool empty() const { return terms_.empty(); }
  const std::vector<TrigTerm>& terms() const { return terms_; }

  double value(const double* x) const;
  void gradient(const double* x, double* g) const;          // g[d]
  void hessian(const double* x, Eigen::MatrixXd& h) const;  // d x d

  /// Exact antiderivative F(x) = int_0^x f, d = 1 only.
  double antiderivative_1d(double x) const;

  /// Coefficient bound on sup |f|.
  double sup_bound() const;
  /// Coefficient bound on sup |grad f| (Euclidean norm of per-component bounds).
  double grad_sup_bound() const;

 private:
  int d_ = 0;
  std::vector<TrigTerm> terms_;
};

enum class ForceKind { GradientTrig, Constant, Mixed };

/// Force field on T^d. Three constructions are supported:
///   gradient_trig: F = -Sigma^2 grad U        (equilibrium form)
///   constant:      F = eta                    (space-homogeneous form)
///   mixed:         F = -Sigma^2 grad U + eta + tau * J grad V
/// where U, V are trig polynomials and J is the antisymmetric rotation
/// generator acting in the first two coordinates (d >= 2). In d = 1 the
/// tau-perturbation degenerates to the constant tau.
class ForceField {
 public:
  static ForceField gradient_trig(TrigPoly u, const DiffusionMatrix& sigma);
  static ForceField constant(Vec eta);
  static ForceField mixed(TrigPoly u, Vec eta, double tau, TrigPoly v,
                          const DiffusionMatrix& sigma);

  ForceKind kind() const { return kind_; }
  int dim() const { return d_; }

  void eval(const double* x, double* f) const;
  Vec eval(const TorusPoint& x) const;

  /// Upper bound on sup_x |F(x)|, from coefficient sums (or user override).
  double sup_norm_bound() const { return sup_norm_; }
  void override_sup_norm_bound(double b);

  /// Jacobian dF_i/dx_j at x.
  void jacobian(const double* x, Eigen::MatrixXd& jac) const;

  /// Exact int_0^x F(u) du for d = 1.
  double antiderivative_1d(double x) const;

  const TrigPoly& potential() const { return potential_; }
  const Vec& eta() const { return eta_; }
  double tau() const { return tau_; }

  /// True when F = -Sigma^2 grad U + eta with grad U . eta identically zero
  /// (checked exactly on the wave vectors), i.e. the stationary law is the
  /// tensor product mu_O x Gaussian for every gamma.
  bool tensorizes() const;

 private:
  struct Harmonic {
    std::vector<int> wave;
    Vec weight;       // direction carrying this harmonic in F
    double cos_coef;  // F += weight * (cos_coef cos th + sin_coef sin th)
    double sin_coef;
  };

  ForceKind kind_ = ForceKind::Constant;
  int d_ = 0;
  TrigPoly potential_;       // U
  TrigPoly curl_potential_;  // V
  Vec eta_;
  double tau_ = 0.0;
  std::vector<Harmonic> harmonics_;
  double sup_norm_ = 0.0;

  void finalize_harmonics();
};

/// Full model: dimension, force field, diffusion matrix, damping.
struct ModelSpec {
  int d;
  ForceField force;
  DiffusionMatrix sigma;
  double gamma;

  ModelSpec(ForceField f, DiffusionMatrix s, double gamma_);
};

/// Smooth test function f(x, y) with the derivative evaluators the generator
/// needs: once in x, twice in y.
struct TestFunction {
  std::function<double(const PhaseState&)> value;
  std::function<Vec(const PhaseState&)> grad_x;
  std::function<Vec(const PhaseState&)> grad_y;
  std::function<Eigen::MatrixXd(const PhaseState&)> hess_y;
};

/// Candidate stationary log-density: the density is e^{-H(x,y)} up to
/// normalization. Carries analytic evaluators plus a finite-difference
/// cross-check of their mutual consistency.
struct DensityCandidate {
  std::function<double(const PhaseState&)> h;
  std::function<Vec(const PhaseState&)> grad_x;
  std::function<Vec(const PhaseState&)> grad_y;
  std::function<Eigen::MatrixXd(const PhaseState&)> hess_y;

  /// Max abs deviation between analytic evaluators and centered finite
  /// differences of h at p.
  double fd_consistency(const PhaseState& p, double step = 1e-5) const;
};

/// Apply the generator
///   L f = y . grad_x f + (F(x) - gamma y) . grad_y f + gamma Sigma^2 : hess_y f
/// at the phase point p.
double apply_generator(const ModelSpec& m, const TestFunction& f,
                       const PhaseState& p);

/// Residual of the stationary Fokker-Planck equation for the candidate
/// density e^{-H}:
///   y . grad_x H + (F - gamma y) . grad_y H + gamma d
///     + gamma |Sigma grad_y H|^2 - gamma Sigma^2 : hess_y H.
/// Identically zero iff e^{-H} (normalized) is the stationary density.
double stationarity_residual(const ModelSpec& m, const DensityCandidate& h,
                             const PhaseState& p);

struct EquilibriumDensity {
  DensityCandidate candidate;
  double normalization;  // Z with density e^{-H}/Z
};

/// Closed-form stationary density for tensorizing forces:
///   H(x,y) = U(x) + |Sigma^{-1}(y - eta/gamma)|^2 / 2,
///   Z = (2 pi)^{d/2} det(Sigma) * int_{T^d} e^{-U}.
/// The position integral uses a tensor-product uniform (trapezoid) rule with
/// `position_nodes` points per axis, which is spectrally accurate for trig U.
/// Throws when the force is not of the applicable form.
EquilibriumDensity equilibrium_density(const ModelSpec& m,
                                       int position_nodes = 4096);

/// Tabulated probability density on T^1 with its CDF.
struct TabulatedDensity1d {
  std::vector<double> grid;  // N+1 nodes, grid[0]=0, grid[N]=1
  std::vector<double> pdf;   // values at nodes, pdf[N]=pdf[0]
  std::vector<double> cdf;   // cdf[0]=0, cdf[N]=1
  double flux_residual = 0.0;

  double value(double x) const;     // periodic linear interpolation
  double quantile(double u) const;  // inverse CDF, u in [0,1]
  /// Deterministic n-point cloud at the (i+1/2)/n quantiles.
  std::vector<double> quantile_cloud(int n) const;
};

/// Stationary density of the overdamped equation dZ = F(Z) ds + sqrt(2) Sigma dB
/// on T^1, built from the constant-probability-flux solution
///   rho(x) ~ e^{psi(x)} [ I1 - (1 - e^{-Phi}) int_0^x e^{-psi} ],
/// psi = int F / sigma^2 (exact for trig F), Phi = psi(1).
/// Throws when d != 1 or when the flux residual exceeds `flux_tolerance`.
TabulatedDensity1d overdamped_density_1d(const ModelSpec& m, int nodes = 2048,
                                         double flux_tolerance = 1e-6);

}  // namespace odlab

#endif
