#include "odlab/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace odlab {

// ---------------------------------------------------------------------------
// EmpiricalMeasure

EmpiricalMeasure::EmpiricalMeasure(SpaceTag tag, int d, int width,
                                   std::vector<double> rows)
    : tag_(tag), d_(d), width_(width), data_(std::move(rows)) {
  if (d < 1) throw std::invalid_argument("EmpiricalMeasure: dimension >= 1");
  if (data_.empty() || data_.size() % width_ != 0) {
    throw std::invalid_argument("EmpiricalMeasure: bad row data");
  }
  n_ = static_cast<int>(data_.size() / width_);
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("EmpiricalMeasure: non-finite entry");
    }
  }
}

EmpiricalMeasure EmpiricalMeasure::phase(const std::vector<PhaseState>& states) {
  if (states.empty()) throw std::invalid_argument("EmpiricalMeasure: empty");
  const int d = static_cast<int>(states.front().dim());
  std::vector<double> rows;
  rows.reserve(states.size() * 2 * d);
  for (const auto& s : states) {
    if (static_cast<int>(s.dim()) != d) {
      throw std::invalid_argument("EmpiricalMeasure: inconsistent dimension");
    }
    rows.insert(rows.end(), s.position.coords.begin(), s.position.coords.end());
    rows.insert(rows.end(), s.velocity.coords.begin(), s.velocity.coords.end());
  }
  return EmpiricalMeasure(SpaceTag::Phase, d, 2 * d, std::move(rows));
}

EmpiricalMeasure EmpiricalMeasure::phase_flat(int d, std::vector<double> rows) {
  return EmpiricalMeasure(SpaceTag::Phase, d, 2 * d, std::move(rows));
}

EmpiricalMeasure EmpiricalMeasure::position(int d, std::vector<double> rows) {
  for (double& v : rows) v = wrap01(v);
  return EmpiricalMeasure(SpaceTag::Position, d, d, std::move(rows));
}

EmpiricalMeasure EmpiricalMeasure::velocity(int d, std::vector<double> rows) {
  return EmpiricalMeasure(SpaceTag::Velocity, d, d, std::move(rows));
}

double EmpiricalMeasure::ground_dist(int i, const EmpiricalMeasure& other,
                                     int j) const {
  const double* a = point(i);
  const double* b = other.point(j);
  switch (tag_) {
    case SpaceTag::Phase:
      return torus_dist(a, b, d_) + euclidean_dist(a + d_, b + d_, d_);
    case SpaceTag::Position:
      return torus_dist(a, b, d_);
    case SpaceTag::Velocity:
      return euclidean_dist(a, b, d_);
  }
  return 0.0;
}

EmpiricalMeasure EmpiricalMeasure::position_marginal() const {
  if (tag_ != SpaceTag::Phase) {
    throw std::logic_error("position_marginal: phase measure required");
  }
  std::vector<double> rows(static_cast<std::size_t>(n_) * d_);
  for (int i = 0; i < n_; ++i) {
    std::copy(point(i), point(i) + d_, rows.begin() + static_cast<std::size_t>(i) * d_);
  }
  return EmpiricalMeasure(SpaceTag::Position, d_, d_, std::move(rows));
}

EmpiricalMeasure EmpiricalMeasure::velocity_marginal() const {
  if (tag_ != SpaceTag::Phase) {
    throw std::logic_error("velocity_marginal: phase measure required");
  }
  std::vector<double> rows(static_cast<std::size_t>(n_) * d_);
  for (int i = 0; i < n_; ++i) {
    std::copy(point(i) + d_, point(i) + 2 * d_,
              rows.begin() + static_cast<std::size_t>(i) * d_);
  }
  return EmpiricalMeasure(SpaceTag::Velocity, d_, d_, std::move(rows));
}

namespace {

void check_pair(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.tag() != nu.tag()) {
    throw std::invalid_argument("w1: mixed space tags");
  }
  if (mu.space_dim() != nu.space_dim()) {
    throw std::invalid_argument("w1: dimension mismatch");
  }
  if (mu.size() != nu.size()) {
    throw std::invalid_argument(
        "w1: unequal sample counts (" + std::to_string(mu.size()) + " vs " +
        std::to_string(nu.size()) + "); subsample before calling");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Dense assignment, Jonker-Volgenant style: column reduction, augmenting row
// reduction, then shortest augmenting paths with implicit Dijkstra.

double solve_assignment_dense(int n, const double* cost, std::vector<int>& rowsol,
                              std::vector<double>* u_out,
                              std::vector<double>* v_out) {
  if (n < 1) throw std::invalid_argument("solve_assignment_dense: empty");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  rowsol.assign(n, -1);
  std::vector<int> colsol(n, -1);
  std::vector<double> v(n, 0.0);

  // column reduction (reverse column order)
  std::vector<int> matches(n, 0);
  for (int j = n - 1; j >= 0; --j) {
    double min_c = cost[static_cast<std::size_t>(0) * n + j];
    int imin = 0;
    for (int i = 1; i < n; ++i) {
      const double c = cost[static_cast<std::size_t>(i) * n + j];
      if (c < min_c) {
        min_c = c;
        imin = i;
      }
    }
    v[j] = min_c;
    if (++matches[imin] == 1) {
      rowsol[imin] = j;
      colsol[j] = imin;
    }
  }

  // free rows and reduction transfer for singly-matched rows
  std::vector<int> free_rows;
  free_rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (matches[i] == 0) {
      free_rows.push_back(i);
    } else if (matches[i] == 1) {
      const int j1 = rowsol[i];
      double min2 = kInf;
      for (int j = 0; j < n; ++j) {
        if (j == j1) continue;
        min2 = std::min(min2, cost[static_cast<std::size_t>(i) * n + j] - v[j]);
      }
      v[j1] -= min2;
    }
  }

  // augmenting row reduction, two sweeps
  for (int sweep = 0; sweep < 2 && !free_rows.empty(); ++sweep) {
    std::vector<int> next_free;
    std::size_t k = 0;
    while (k < free_rows.size()) {
      const int i = free_rows[k++];
      const double* ci = cost + static_cast<std::size_t>(i) * n;
      double u1 = ci[0] - v[0], u2 = kInf;
      int j1 = 0, j2 = -1;
      for (int j = 1; j < n; ++j) {
        const double r = ci[j] - v[j];
        if (r < u2) {
          if (r < u1) {
            u2 = u1;
            j2 = j1;
            u1 = r;
            j1 = j;
          } else {
            u2 = r;
            j2 = j;
          }
        }
      }
      int i0 = colsol[j1];
      if (u1 < u2) {
        v[j1] -= u2 - u1;
      } else if (i0 >= 0 && j2 >= 0) {
        j1 = j2;
        i0 = colsol[j1];
      }
      rowsol[i] = j1;
      colsol[j1] = i;
      if (i0 >= 0) {
        rowsol[i0] = -1;
        if (u1 < u2) {
          free_rows[--k] = i0;  // retry the bumped row immediately
        } else {
          next_free.push_back(i0);
        }
      }
    }
    free_rows = std::move(next_free);
  }

  // shortest augmenting path for each remaining free row
  std::vector<double> dist(n);
  std::vector<int> pred(n), cols(n);
  for (const int f : free_rows) {
    const double* cf = cost + static_cast<std::size_t>(f) * n;
    for (int j = 0; j < n; ++j) {
      dist[j] = cf[j] - v[j];
      pred[j] = f;
      cols[j] = j;
    }
    int low = 0, up = 0;
    int endofpath = -1;
    double min_d = 0.0;
    while (endofpath < 0) {
      if (low == up) {
        // collect the new TODO block: all unexplored columns at minimal dist
        min_d = dist[cols[up]];
        for (int k = up + 1; k < n; ++k) {
          if (dist[cols[k]] < min_d) min_d = dist[cols[k]];
        }
        for (int k = up; k < n; ++k) {
          const int j = cols[k];
          if (dist[j] == min_d) {
            std::swap(cols[k], cols[up]);
            ++up;
          }
        }
        for (int k = low; k < up; ++k) {
          if (colsol[cols[k]] < 0) {
            endofpath = cols[k];
            break;
          }
        }
      }
      if (endofpath >= 0) break;
      // scan one TODO column: relax through the row assigned to it
      const int j1 = cols[low++];
      const int i = colsol[j1];
      const double* ci = cost + static_cast<std::size_t>(i) * n;
      const double off = ci[j1] - v[j1] - min_d;
      for (int k = up; k < n; ++k) {
        const int j = cols[k];
        const double r = ci[j] - v[j] - off;
        if (r < dist[j]) {
          dist[j] = r;
          pred[j] = i;
          if (r == min_d) {
            if (colsol[j] < 0) {
              endofpath = j;
              break;
            }
            std::swap(cols[k], cols[up]);
            ++up;
          }
        }
      }
    }
    for (int k = 0; k < low; ++k) {
      const int j = cols[k];
      v[j] += dist[j] - min_d;
    }
    // walk the alternating path back to f
    int j = endofpath;
    while (true) {
      const int i = pred[j];
      colsol[j] = i;
      std::swap(rowsol[i], j);
      if (i == f) break;
    }
  }

  if (u_out || v_out) {
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) {
      u[i] = cost[static_cast<std::size_t>(i) * n + rowsol[i]] - v[rowsol[i]];
    }
    if (u_out) *u_out = std::move(u);
    if (v_out) *v_out = v;
  }

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += cost[static_cast<std::size_t>(i) * n + rowsol[i]];
  }
  return total;
}

OTResult w1_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  check_pair(mu, nu);
  const int n = mu.size();
  if (n > kMaxExactAssignment) {
    throw std::invalid_argument(
        "w1_exact: n exceeds the exact-solver budget (" +
        std::to_string(kMaxExactAssignment) + "); use w1_sinkhorn or subsample");
  }

  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cost[static_cast<std::size_t>(i) * n + j] = mu.ground_dist(i, nu, j);
    }
  }

  OTResult res;
  res.method = OtMethod::Assignment;
  std::vector<double> u, v;
  solve_assignment_dense(n, cost.data(), res.permutation, &u, &v);

  double primal = 0.0;
  for (int i = 0; i < n; ++i) {
    primal += cost[static_cast<std::size_t>(i) * n + res.permutation[i]];
  }
  double dual = std::accumulate(u.begin(), u.end(), 0.0) +
                std::accumulate(v.begin(), v.end(), 0.0);
  res.value = primal / n;
  res.dual_gap = (primal - dual) / n;
  return res;
}

// ---------------------------------------------------------------------------
// 1D exact solvers

OTResult w1_sorted_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  check_pair(mu, nu);
  if (mu.width() != 1) {
    throw std::invalid_argument("w1_sorted_1d: scalar samples required");
  }
  const int n = mu.size();
  std::vector<int> ax(n), ay(n);
  std::iota(ax.begin(), ax.end(), 0);
  std::iota(ay.begin(), ay.end(), 0);
  std::sort(ax.begin(), ax.end(),
            [&](int a, int b) { return *mu.point(a) < *mu.point(b); });
  std::sort(ay.begin(), ay.end(),
            [&](int a, int b) { return *nu.point(a) < *nu.point(b); });

  OTResult res;
  res.method = OtMethod::Sorted1d;
  res.permutation.assign(n, -1);

  if (mu.tag() == SpaceTag::Velocity) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      total += std::abs(*mu.point(ax[i]) - *nu.point(ay[i]));
      res.permutation[ax[i]] = ay[i];
    }
    res.value = total / n;
    return res;
  }

  // circle: optimal matching is a cyclic shift of the sorted order
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k < n; ++k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      total += std::abs(
          min_image_delta(*mu.point(ax[i]), *nu.point(ay[(i + k) % n])));
      if (total >= best) break;  // partial sums only grow
    }
    if (total < best) {
      best = total;
      best_k = k;
    }
  }
  for (int i = 0; i < n; ++i) {
    res.permutation[ax[i]] = ay[(i + best_k) % n];
  }
  res.value = best / n;
  return res;
}

// ---------------------------------------------------------------------------
// Sinkhorn (log domain, optional epsilon scaling)

namespace {

double logsumexp_row(const double* row, const std::vector<double>& g, int n,
                     double inv_eps) {
  double m = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) m = std::max(m, (g[j] - row[j]) * inv_eps);
  double s = 0.0;
  for (int j = 0; j < n; ++j) s += std::exp((g[j] - row[j]) * inv_eps - m);
  return m + std::log(s);
}

}  // namespace

OTResult w1_sinkhorn(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     double epsilon, const SinkhornOptions& opts) {
  check_pair(mu, nu);
  if (!(epsilon > 0.0)) throw std::invalid_argument("w1_sinkhorn: epsilon > 0");
  const int n = mu.size();

  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  double max_c = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double c = mu.ground_dist(i, nu, j);
      cost[static_cast<std::size_t>(i) * n + j] = c;
      max_c = std::max(max_c, c);
    }
  }

  std::vector<double> f(n, 0.0), g(n, 0.0);
  const double log_n = std::log(static_cast<double>(n));
  int iterations = 0;
  double violation = std::numeric_limits<double>::infinity();

  std::vector<double> eps_stages;  // warm start from a loose regularization
  if (opts.epsilon_scaling && max_c > 0.0) {
    for (double e = 0.5 * max_c; e > epsilon; e *= 0.5) eps_stages.push_back(e);
  }
  eps_stages.push_back(epsilon);

  // columns of the cost matrix, for the g update
  std::vector<double> cost_t(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cost_t[static_cast<std::size_t>(j) * n + i] =
          cost[static_cast<std::size_t>(i) * n + j];
    }
  }

  for (std::size_t stage = 0; stage < eps_stages.size(); ++stage) {
    const double eps = eps_stages[stage];
    const double inv_eps = 1.0 / eps;
    const bool last = (stage + 1 == eps_stages.size());
    const int stage_cap = last ? opts.max_iterations : 50;

    for (int it = 0; it < stage_cap; ++it) {
      ++iterations;
      for (int i = 0; i < n; ++i) {
        f[i] = -eps * (logsumexp_row(cost.data() + static_cast<std::size_t>(i) * n,
                                     g, n, inv_eps) -
                       log_n);
      }
      for (int j = 0; j < n; ++j) {
        g[j] = -eps * (logsumexp_row(cost_t.data() + static_cast<std::size_t>(j) * n,
                                     f, n, inv_eps) -
                       log_n);
      }
      // column marginals are exact after the g update; row violation is the
      // convergence measure. Checking it costs a full n^2 pass, so do it
      // sparsely.
      if (!last || it % 5 == 4 || it == stage_cap - 1) {
        violation = 0.0;
        const double inv_nn = 1.0 / (static_cast<double>(n) * n);
        for (int i = 0; i < n; ++i) {
          double row = 0.0;
          const double* ci = cost.data() + static_cast<std::size_t>(i) * n;
          for (int j = 0; j < n; ++j) {
            row += std::exp((f[i] + g[j] - ci[j]) * inv_eps);
          }
          violation += std::abs(row * inv_nn - 1.0 / n);
        }
        if (violation < opts.tolerance) break;
      }
    }
  }

  if (!(violation < opts.tolerance)) {
    throw std::runtime_error("w1_sinkhorn: no convergence within iteration cap (violation " +
                             std::to_string(violation) + ")");
  }

  const double inv_eps = 1.0 / epsilon;
  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * n + j;
      value += std::exp((f[i] + g[j] - cost[idx]) * inv_eps) * cost[idx];
    }
  }
  value /= static_cast<double>(n) * n;

  OTResult res;
  res.method = OtMethod::Sinkhorn;
  res.value = value;
  res.dual_gap = violation;
  res.iterations = iterations;
  return res;
}

// ---------------------------------------------------------------------------
// Gaussian closed form

namespace {

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) {
    throw std::invalid_argument(std::string(what) + ": eigensolver failed");
  }
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd ev = eig.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-10 * scale) {
      throw std::invalid_argument(std::string(what) + ": matrix not PSD");
    }
    ev[i] = std::sqrt(std::max(0.0, ev[i]));
  }
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

double w_gaussian(const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1,
                  const Eigen::VectorXd& mean2, const Eigen::MatrixXd& cov2) {
  if (mean1.size() != mean2.size() || cov1.rows() != mean1.size() ||
      cov2.rows() != mean2.size() || cov1.rows() != cov1.cols() ||
      cov2.rows() != cov2.cols()) {
    throw std::invalid_argument("w_gaussian: dimension mismatch");
  }
  const double sym_tol = 1e-10;
  if ((cov1 - cov1.transpose()).cwiseAbs().maxCoeff() >
          sym_tol * std::max(1.0, cov1.cwiseAbs().maxCoeff()) ||
      (cov2 - cov2.transpose()).cwiseAbs().maxCoeff() >
          sym_tol * std::max(1.0, cov2.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("w_gaussian: covariance not symmetric");
  }
  const Eigen::MatrixXd b = sqrtm_psd(cov2, "w_gaussian cov2");
  const Eigen::MatrixXd cross = sqrtm_psd(b * cov1 * b, "w_gaussian cross");
  const double tr = cov1.trace() + cov2.trace() - 2.0 * cross.trace();
  const double d2 = (mean1 - mean2).squaredNorm() + std::max(0.0, tr);
  return std::sqrt(d2);
}

std::pair<double, double> marginal_inequality_check(const EmpiricalMeasure& mu,
                                                    const EmpiricalMeasure& nu) {
  if (mu.tag() != SpaceTag::Phase || nu.tag() != SpaceTag::Phase) {
    throw std::invalid_argument("marginal_inequality_check: phase measures required");
  }
  const double w_joint = w1_exact(mu, nu).value;
  const double w_marginal =
      w1_exact(mu.position_marginal(), nu.position_marginal()).value;
  if (w_marginal > w_joint + 1e-9 * (1.0 + w_joint)) {
    throw std::logic_error("marginal_inequality_check: marginal W1 exceeds joint W1");
  }
  return {w_marginal, w_joint};
}

}  // namespace odlab
