#include "odlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// ---------------------------------------------------------------------------
// DiffusionMatrix

DiffusionMatrix::DiffusionMatrix(Eigen::MatrixXd sigma) : sigma_(std::move(sigma)) {
  const auto d = sigma_.rows();
  if (d < 1 || sigma_.cols() != d) {
    throw std::invalid_argument("DiffusionMatrix: square matrix required");
  }
  const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 64 * 1e-16 * scale) {
    throw std::invalid_argument("DiffusionMatrix: matrix not symmetric");
  }
  sigma_ = 0.5 * (sigma_ + sigma_.transpose().eval());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("DiffusionMatrix: matrix not positive definite");
  }

  sigma_sq_ = sigma_ * sigma_;
  sigma_inv_ = eig.eigenvectors() *
               eig.eigenvalues().cwiseInverse().asDiagonal() *
               eig.eigenvectors().transpose();
  sigma_inv_sq_ = sigma_inv_ * sigma_inv_;
  trace_sigma_sq_ = sigma_sq_.trace();
  det_sigma_ = eig.eigenvalues().prod();
  identity_ = (sigma_ - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() == 0.0;

  flat_sigma_.assign(sigma_.data(), sigma_.data() + d * d);
  flat_sigma_sq_.assign(sigma_sq_.data(), sigma_sq_.data() + d * d);
  // Eigen stores column-major; symmetric matrices make the layout irrelevant.
}

DiffusionMatrix DiffusionMatrix::identity(int d) {
  return DiffusionMatrix(Eigen::MatrixXd::Identity(d, d));
}

DiffusionMatrix DiffusionMatrix::diagonal(const Vec& diag) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return DiffusionMatrix(std::move(m));
}

void DiffusionMatrix::apply_sigma(const double* in, double* out) const {
  const int d = dim();
  if (identity_) {
    std::copy(in, in + d, out);
    return;
  }
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += flat_sigma_[i * d + j] * in[j];
    out[i] = s;
  }
}

void DiffusionMatrix::apply_sigma_sq(const double* in, double* out) const {
  const int d = dim();
  if (identity_) {
    std::copy(in, in + d, out);
    return;
  }
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += flat_sigma_sq_[i * d + j] * in[j];
    out[i] = s;
  }
}

// ---------------------------------------------------------------------------
// TrigPoly

TrigPoly::TrigPoly(int d, std::vector<TrigTerm> terms)
    : d_(d), terms_(std::move(terms)) {
  if (d < 1) throw std::invalid_argument("TrigPoly: dimension must be >= 1");
  for (const auto& t : terms_) {
    if (static_cast<int>(t.wave.size()) != d) {
      throw std::invalid_argument("TrigPoly: wave vector dimension mismatch");
    }
  }
}

double TrigPoly::value(const double* x) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    double th = 0.0;
    for (int i = 0; i < d_; ++i) th += t.wave[i] * x[i];
    th *= kTwoPi;
    v += t.cos_coef * std::cos(th) + t.sin_coef * std::sin(th);
  }
  return v;
}

void TrigPoly::gradient(const double* x, double* g) const {
  std::fill(g, g + d_, 0.0);
  for (const auto& t : terms_) {
    double th = 0.0;
    for (int i = 0; i < d_; ++i) th += t.wave[i] * x[i];
    th *= kTwoPi;
    const double amp = -t.cos_coef * std::sin(th) + t.sin_coef * std::cos(th);
    for (int i = 0; i < d_; ++i) g[i] += kTwoPi * t.wave[i] * amp;
  }
}

void TrigPoly::hessian(const double* x, Eigen::MatrixXd& h) const {
  h = Eigen::MatrixXd::Zero(d_, d_);
  for (const auto& t : terms_) {
    double th = 0.0;
    for (int i = 0; i < d_; ++i) th += t.wave[i] * x[i];
    th *= kTwoPi;
    const double amp = -t.cos_coef * std::cos(th) - t.sin_coef * std::sin(th);
    for (int i = 0; i < d_; ++i) {
      for (int j = 0; j < d_; ++j) {
        h(i, j) += kTwoPi * kTwoPi * t.wave[i] * t.wave[j] * amp;
      }
    }
  }
}

double TrigPoly::antiderivative_1d(double x) const {
  if (d_ != 1) throw std::logic_error("TrigPoly::antiderivative_1d: d != 1");
  double v = 0.0;
  for (const auto& t : terms_) {
    const int k = t.wave[0];
    if (k == 0) {
      v += t.cos_coef * x;
    } else {
      const double w = kTwoPi * k;
      v += t.cos_coef * std::sin(w * x) / w +
           t.sin_coef * (1.0 - std::cos(w * x)) / w;
    }
  }
  return v;
}

double TrigPoly::sup_bound() const {
  double b = 0.0;
  for (const auto& t : terms_) b += std::hypot(t.cos_coef, t.sin_coef);
  return b;
}

double TrigPoly::grad_sup_bound() const {
  if (terms_.empty()) return 0.0;
  Vec comp(d_, 0.0);
  for (const auto& t : terms_) {
    const double amp = std::hypot(t.cos_coef, t.sin_coef);
    for (int i = 0; i < d_; ++i) comp[i] += kTwoPi * std::abs(t.wave[i]) * amp;
  }
  double s = 0.0;
  for (double c : comp) s += c * c;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// ForceField

ForceField ForceField::gradient_trig(TrigPoly u, const DiffusionMatrix& sigma) {
  ForceField f;
  f.kind_ = ForceKind::GradientTrig;
  f.d_ = sigma.dim();
  if (u.dim() != f.d_) throw std::invalid_argument("ForceField: U dimension mismatch");
  f.potential_ = std::move(u);
  f.eta_.assign(f.d_, 0.0);
  // F = -Sigma^2 grad U
  for (const auto& t : f.potential_.terms()) {
    Harmonic h;
    h.wave = t.wave;
    Eigen::VectorXd k(f.d_);
    for (int i = 0; i < f.d_; ++i) k[i] = t.wave[i];
    Eigen::VectorXd w = -kTwoPi * (sigma.sigma_sq() * k);
    h.weight.assign(w.data(), w.data() + f.d_);
    h.cos_coef = t.sin_coef;
    h.sin_coef = -t.cos_coef;
    f.harmonics_.push_back(std::move(h));
  }
  f.finalize_harmonics();
  return f;
}

ForceField ForceField::constant(Vec eta) {
  ForceField f;
  f.kind_ = ForceKind::Constant;
  f.d_ = static_cast<int>(eta.size());
  if (f.d_ < 1) throw std::invalid_argument("ForceField: empty eta");
  f.eta_ = std::move(eta);
  f.finalize_harmonics();
  return f;
}

ForceField ForceField::mixed(TrigPoly u, Vec eta, double tau, TrigPoly v,
                             const DiffusionMatrix& sigma) {
  ForceField f = gradient_trig(std::move(u), sigma);
  f.kind_ = ForceKind::Mixed;
  if (static_cast<int>(eta.size()) != f.d_) {
    throw std::invalid_argument("ForceField: eta dimension mismatch");
  }
  f.eta_ = std::move(eta);
  f.tau_ = tau;
  if (f.d_ == 1) {
    // no non-trivial rotational field on T^1; the perturbation is a constant
    f.eta_[0] += tau;
  } else if (tau != 0.0) {
    if (v.dim() != f.d_) throw std::invalid_argument("ForceField: V dimension mismatch");
    f.curl_potential_ = std::move(v);
    // F~ = J grad V with J the rotation generator in coordinates (0, 1)
    for (const auto& t : f.curl_potential_.terms()) {
      Harmonic h;
      h.wave = t.wave;
      Vec w(f.d_, 0.0);
      w[0] = -kTwoPi * tau * t.wave[1];
      w[1] = kTwoPi * tau * t.wave[0];
      h.weight = std::move(w);
      h.cos_coef = t.sin_coef;
      h.sin_coef = -t.cos_coef;
      f.harmonics_.push_back(std::move(h));
    }
  }
  f.finalize_harmonics();
  return f;
}

void ForceField::finalize_harmonics() {
  if (eta_.empty()) eta_.assign(d_, 0.0);
  double eta_norm = 0.0;
  for (double e : eta_) eta_norm += e * e;
  double b = std::sqrt(eta_norm);
  for (const auto& h : harmonics_) {
    double wn = 0.0;
    for (double w : h.weight) wn += w * w;
    b += std::sqrt(wn) * std::hypot(h.cos_coef, h.sin_coef);
  }
  sup_norm_ = b;
}

void ForceField::override_sup_norm_bound(double b) {
  if (!(b > 0.0)) throw std::invalid_argument("sup norm bound must be positive");
  sup_norm_ = b;
}

void ForceField::eval(const double* x, double* f) const {
  std::copy(eta_.begin(), eta_.end(), f);
  for (const auto& h : harmonics_) {
    double th = 0.0;
    for (int i = 0; i < d_; ++i) th += h.wave[i] * x[i];
    th *= kTwoPi;
    const double amp = h.cos_coef * std::cos(th) + h.sin_coef * std::sin(th);
    for (int i = 0; i < d_; ++i) f[i] += h.weight[i] * amp;
  }
}

Vec ForceField::eval(const TorusPoint& x) const {
  if (static_cast<int>(x.dim()) != d_) {
    throw std::invalid_argument("ForceField::eval: dimension mismatch");
  }
  Vec f(d_);
  eval(x.coords.data(), f.data());
  return f;
}

void ForceField::jacobian(const double* x, Eigen::MatrixXd& jac) const {
  jac = Eigen::MatrixXd::Zero(d_, d_);
  for (const auto& h : harmonics_) {
    double th = 0.0;
    for (int i = 0; i < d_; ++i) th += h.wave[i] * x[i];
    th *= kTwoPi;
    const double damp = -h.cos_coef * std::sin(th) + h.sin_coef * std::cos(th);
    for (int i = 0; i < d_; ++i) {
      for (int j = 0; j < d_; ++j) {
        jac(i, j) += h.weight[i] * kTwoPi * h.wave[j] * damp;
      }
    }
  }
}

double ForceField::antiderivative_1d(double x) const {
  if (d_ != 1) throw std::logic_error("ForceField::antiderivative_1d: d != 1");
  double v = eta_[0] * x;
  for (const auto& h : harmonics_) {
    const int k = h.wave[0];
    const double w = kTwoPi * k;
    if (k == 0) {
      v += h.weight[0] * h.cos_coef * x;
    } else {
      v += h.weight[0] * (h.cos_coef * std::sin(w * x) / w +
                          h.sin_coef * (1.0 - std::cos(w * x)) / w);
    }
  }
  return v;
}

bool ForceField::tensorizes() const {
  switch (kind_) {
    case ForceKind::Constant:
      return true;
    case ForceKind::GradientTrig:
      return true;
    case ForceKind::Mixed: {
      if (tau_ != 0.0 && d_ > 1) return false;
      if (d_ == 1 && tau_ != 0.0 && !potential_.empty()) {
        // tau folded into eta; fall through to the wave-vector check
      }
      for (const auto& t : potential_.terms()) {
        double ke = 0.0;
        for (int i = 0; i < d_; ++i) ke += t.wave[i] * eta_[i];
        if (std::abs(ke) > 1e-14 * (1.0 + std::abs(ke))) return false;
      }
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// ModelSpec

ModelSpec::ModelSpec(ForceField f, DiffusionMatrix s, double gamma_)
    : d(s.dim()), force(std::move(f)), sigma(std::move(s)), gamma(gamma_) {
  if (force.dim() != d) {
    throw std::invalid_argument("ModelSpec: force/sigma dimension mismatch");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("ModelSpec: gamma must be > 0");
}

// ---------------------------------------------------------------------------
// Generator and stationarity residual

double apply_generator(const ModelSpec& m, const TestFunction& f,
                       const PhaseState& p) {
  if (!f.value || !f.grad_x || !f.grad_y || !f.hess_y) {
    throw std::invalid_argument("apply_generator: missing derivative evaluators");
  }
  const int d = m.d;
  const Vec gx = f.grad_x(p);
  const Vec gy = f.grad_y(p);
  const Eigen::MatrixXd hy = f.hess_y(p);
  Vec force(d);
  m.force.eval(p.position.coords.data(), force.data());

  double v = 0.0;
  for (int i = 0; i < d; ++i) {
    v += p.velocity.coords[i] * gx[i];
    v += (force[i] - m.gamma * p.velocity.coords[i]) * gy[i];
  }
  v += m.gamma * (m.sigma.sigma_sq().array() * hy.array()).sum();
  return v;
}

double stationarity_residual(const ModelSpec& m, const DensityCandidate& h,
                             const PhaseState& p) {
  if (!h.h || !h.grad_x || !h.grad_y || !h.hess_y) {
    throw std::invalid_argument("stationarity_residual: missing evaluators");
  }
  const int d = m.d;
  const Vec gx = h.grad_x(p);
  const Vec gy = h.grad_y(p);
  const Eigen::MatrixXd hy = h.hess_y(p);
  Vec force(d);
  m.force.eval(p.position.coords.data(), force.data());

  double v = m.gamma * d;
  Eigen::VectorXd gye(d);
  for (int i = 0; i < d; ++i) {
    v += p.velocity.coords[i] * gx[i];
    v += (force[i] - m.gamma * p.velocity.coords[i]) * gy[i];
    gye[i] = gy[i];
  }
  v += m.gamma * (m.sigma.sigma() * gye).squaredNorm();
  v -= m.gamma * (m.sigma.sigma_sq().array() * hy.array()).sum();
  return v;
}

double DensityCandidate::fd_consistency(const PhaseState& p, double step) const {
  const int d = static_cast<int>(p.dim());
  double worst = 0.0;

  auto eval_at = [&](const Vec& x, const Vec& y) {
    PhaseState q;
    q.position.coords = x;
    q.velocity.coords = y;
    return h(q);
  };

  const Vec gx = grad_x(p);
  const Vec gy = grad_y(p);
  const Eigen::MatrixXd hy = hess_y(p);

  for (int i = 0; i < d; ++i) {
    Vec xp = p.position.coords, xm = p.position.coords;
    xp[i] += step;
    xm[i] -= step;
    const double fd = (eval_at(xp, p.velocity.coords) -
                       eval_at(xm, p.velocity.coords)) / (2 * step);
    worst = std::max(worst, std::abs(fd - gx[i]));
  }
  for (int i = 0; i < d; ++i) {
    Vec yp = p.velocity.coords, ym = p.velocity.coords;
    yp[i] += step;
    ym[i] -= step;
    const double fd = (eval_at(p.position.coords, yp) -
                       eval_at(p.position.coords, ym)) / (2 * step);
    worst = std::max(worst, std::abs(fd - gy[i]));
  }
  const double h0 = h(p);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      Vec ypp = p.velocity.coords, ypm = p.velocity.coords;
      Vec ymp = p.velocity.coords, ymm = p.velocity.coords;
      ypp[i] += step; ypp[j] += step;
      ypm[i] += step; ypm[j] -= step;
      ymp[i] -= step; ymp[j] += step;
      ymm[i] -= step; ymm[j] -= step;
      double fd;
      if (i == j) {
        Vec yp = p.velocity.coords, ym = p.velocity.coords;
        yp[i] += step; ym[i] -= step;
        fd = (eval_at(p.position.coords, yp) - 2 * h0 +
              eval_at(p.position.coords, ym)) / (step * step);
      } else {
        fd = (eval_at(p.position.coords, ypp) - eval_at(p.position.coords, ypm) -
              eval_at(p.position.coords, ymp) + eval_at(p.position.coords, ymm)) /
             (4 * step * step);
      }
      worst = std::max(worst, std::abs(fd - hy(i, j)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Closed-form equilibrium density

EquilibriumDensity equilibrium_density(const ModelSpec& m, int position_nodes) {
  if (!m.force.tensorizes()) {
    throw std::invalid_argument(
        "equilibrium_density: force is not of the tensorizing form "
        "-Sigma^2 grad U + eta with grad U . eta = 0");
  }
  if (position_nodes < 2) {
    throw std::invalid_argument("equilibrium_density: need >= 2 nodes per axis");
  }
  const int d = m.d;
  const TrigPoly u = m.force.potential();
  const Vec eta = m.force.eta();
  const double gamma = m.gamma;
  const Eigen::MatrixXd sigma_inv_sq = m.sigma.sigma_inv_sq();
  const Eigen::MatrixXd sigma_inv = m.sigma.sigma_inv();

  DensityCandidate cand;
  cand.h = [u, eta, gamma, sigma_inv](const PhaseState& p) {
    const int dd = static_cast<int>(p.dim());
    Eigen::VectorXd w(dd);
    for (int i = 0; i < dd; ++i) w[i] = p.velocity.coords[i] - eta[i] / gamma;
    const double q = (sigma_inv * w).squaredNorm();
    return (u.empty() ? 0.0 : u.value(p.position.coords.data())) + 0.5 * q;
  };
  cand.grad_x = [u](const PhaseState& p) {
    Vec g(p.dim(), 0.0);
    if (!u.empty()) u.gradient(p.position.coords.data(), g.data());
    return g;
  };
  cand.grad_y = [eta, gamma, sigma_inv_sq](const PhaseState& p) {
    const int dd = static_cast<int>(p.dim());
    Eigen::VectorXd w(dd);
    for (int i = 0; i < dd; ++i) w[i] = p.velocity.coords[i] - eta[i] / gamma;
    Eigen::VectorXd g = sigma_inv_sq * w;
    return Vec(g.data(), g.data() + dd);
  };
  cand.hess_y = [sigma_inv_sq](const PhaseState&) { return sigma_inv_sq; };

  // Z = (2 pi)^{d/2} det(Sigma) int_{T^d} e^{-U}, uniform tensor rule. The
  // integrand is a smooth periodic function, so the rule converges spectrally.
  double total_points = std::pow(static_cast<double>(position_nodes), d);
  if (total_points > double(1 << 27)) {
    throw std::invalid_argument("equilibrium_density: quadrature grid too large");
  }
  const long npts = static_cast<long>(total_points);
  double integral = 0.0;
  Vec x(d, 0.0);
  for (long idx = 0; idx < npts; ++idx) {
    long rem = idx;
    for (int i = 0; i < d; ++i) {
      x[i] = static_cast<double>(rem % position_nodes) / position_nodes;
      rem /= position_nodes;
    }
    integral += std::exp(-(u.empty() ? 0.0 : u.value(x.data())));
  }
  integral /= static_cast<double>(npts);

  EquilibriumDensity out;
  out.candidate = std::move(cand);
  out.normalization =
      std::pow(2.0 * std::numbers::pi, 0.5 * d) * m.sigma.det_sigma() * integral;
  return out;
}

// ---------------------------------------------------------------------------
// 1D overdamped stationary density

double TabulatedDensity1d::value(double x) const {
  const std::size_t n = grid.size() - 1;
  const double w = wrap01(x) * static_cast<double>(n);
  std::size_t i = std::min(static_cast<std::size_t>(w), n - 1);
  const double f = w - static_cast<double>(i);
  return pdf[i] * (1.0 - f) + pdf[i + 1] * f;
}

double TabulatedDensity1d::quantile(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return grid.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  std::size_t i = static_cast<std::size_t>(it - cdf.begin());
  if (i == 0) return grid.front();
  const double c0 = cdf[i - 1], c1 = cdf[i];
  const double f = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
  return grid[i - 1] + f * (grid[i] - grid[i - 1]);
}

std::vector<double> TabulatedDensity1d::quantile_cloud(int n) const {
  std::vector<double> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = quantile((i + 0.5) / n);
  return pts;
}

namespace {

// Cumulative integral of exp(-psi) on the uniform grid, 4-point Gauss-Legendre
// per cell with exact psi evaluations.
std::vector<double> cumulative_exp_neg(const std::function<double(double)>& psi,
                                       int nodes) {
  static const double gl_x[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
  static const double gl_w[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};
  std::vector<double> cum(nodes + 1, 0.0);
  const double dx = 1.0 / nodes;
  for (int i = 0; i < nodes; ++i) {
    const double a = i * dx;
    double cell = 0.0;
    for (int q = 0; q < 4; ++q) {
      const double u = a + 0.5 * dx * (1.0 + gl_x[q]);
      cell += gl_w[q] * std::exp(-psi(u));
    }
    cum[i + 1] = cum[i] + 0.5 * dx * cell;
  }
  return cum;
}

std::vector<double> build_unnormalized_density(const ModelSpec& m, int nodes) {
  const double sigma_sq = m.sigma.sigma_sq()(0, 0);
  const double phi = m.force.antiderivative_1d(1.0) / sigma_sq;

  // shift psi so the exponentials stay in range
  std::vector<double> psi(nodes + 1);
  double psi_max = -1e300;
  for (int i = 0; i <= nodes; ++i) {
    psi[i] = m.force.antiderivative_1d(static_cast<double>(i) / nodes) / sigma_sq;
    psi_max = std::max(psi_max, psi[i]);
  }
  auto psi_shifted = [&](double x) {
    return m.force.antiderivative_1d(x) / sigma_sq - psi_max;
  };

  const std::vector<double> cum = cumulative_exp_neg(psi_shifted, nodes);
  const double i1 = cum[nodes];
  const double k = -std::expm1(-phi);  // 1 - e^{-Phi}

  std::vector<double> g(nodes + 1);
  for (int i = 0; i <= nodes; ++i) {
    g[i] = std::exp(psi[i] - psi_max) * (i1 - k * cum[i]);
  }
  return g;
}

}  // namespace

TabulatedDensity1d overdamped_density_1d(const ModelSpec& m, int nodes,
                                         double flux_tolerance) {
  if (m.d != 1) throw std::invalid_argument("overdamped_density_1d: d != 1");
  if (nodes < 16 || nodes % 2 != 0) {
    throw std::invalid_argument("overdamped_density_1d: nodes must be even, >= 16");
  }

  std::vector<double> g = build_unnormalized_density(m, nodes);

  TabulatedDensity1d out;
  out.grid.resize(nodes + 1);
  for (int i = 0; i <= nodes; ++i) out.grid[i] = static_cast<double>(i) / nodes;

  // normalize via the trapezoid mass
  out.cdf.assign(nodes + 1, 0.0);
  const double dx = 1.0 / nodes;
  for (int i = 0; i < nodes; ++i) {
    out.cdf[i + 1] = out.cdf[i] + 0.5 * dx * (g[i] + g[i + 1]);
  }
  const double mass = out.cdf[nodes];
  if (!(mass > 0.0)) throw std::runtime_error("overdamped_density_1d: zero mass");
  out.pdf.resize(nodes + 1);
  for (int i = 0; i <= nodes; ++i) {
    out.pdf[i] = g[i] / mass;
    out.cdf[i] /= mass;
  }
  out.cdf[nodes] = 1.0;

  // Constant-flux check: J = F rho - sigma^2 rho', with rho' from a 5-point
  // periodic stencil. Large variation of J across nodes flags a grid that is
  // too coarse for the force at hand.
  const double sigma_sq = m.sigma.sigma_sq()(0, 0);
  double jmin = 1e300, jmax = -1e300, pmax = 0.0;
  for (int i = 0; i < nodes; ++i) pmax = std::max(pmax, out.pdf[i]);
  auto at = [&](int i) { return out.pdf[((i % nodes) + nodes) % nodes]; };
  Vec fval(1), xval(1);
  for (int i = 0; i < nodes; ++i) {
    const double dp =
        (-at(i + 2) + 8 * at(i + 1) - 8 * at(i - 1) + at(i - 2)) / (12 * dx);
    xval[0] = out.grid[i];
    m.force.eval(xval.data(), fval.data());
    const double j = fval[0] * out.pdf[i] - sigma_sq * dp;
    jmin = std::min(jmin, j);
    jmax = std::max(jmax, j);
  }
  const double scale = sigma_sq * pmax + m.force.sup_norm_bound() * pmax;
  out.flux_residual = (jmax - jmin) / std::max(scale, 1e-300);
  if (out.flux_residual > flux_tolerance) {
    throw std::runtime_error(
        "overdamped_density_1d: flux residual " + std::to_string(out.flux_residual) +
        " above tolerance; grid too coarse");
  }
  return out;
}

}  // namespace odlab
