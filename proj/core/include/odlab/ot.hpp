#ifndef ODLAB_OT_HPP
#define ODLAB_OT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "odlab/geometry.hpp"

namespace odlab {

enum class SpaceTag { Phase, Position, Velocity };

/// Equal-weight point cloud in phase space (T^d x R^d), position space (T^d)
/// or velocity space (R^d). Points are stored row-major, phase rows holding
/// the position block before the velocity block.
class EmpiricalMeasure {
 public:
  static EmpiricalMeasure phase(const std::vector<PhaseState>& states);
  static EmpiricalMeasure phase_flat(int d, std::vector<double> rows);
  static EmpiricalMeasure position(int d, std::vector<double> rows);
  static EmpiricalMeasure velocity(int d, std::vector<double> rows);

  int size() const { return n_; }
  int space_dim() const { return d_; }
  int width() const { return width_; }
  SpaceTag tag() const { return tag_; }
  const double* point(int i) const { return data_.data() + i * width_; }
  const std::vector<double>& data() const { return data_; }

  /// Ground metric between point i of *this and point j of other:
  /// phase_dist / torus_dist / Euclidean according to the tag.
  double ground_dist(int i, const EmpiricalMeasure& other, int j) const;

  EmpiricalMeasure position_marginal() const;  // phase tag only
  EmpiricalMeasure velocity_marginal() const;  // phase tag only

 private:
  EmpiricalMeasure(SpaceTag tag, int d, int width, std::vector<double> rows);
  SpaceTag tag_;
  int d_, width_, n_;
  std::vector<double> data_;
};

enum class OtMethod { Assignment, Sorted1d, Sinkhorn };

struct OTResult {
  double value = 0.0;
  OtMethod method = OtMethod::Assignment;
  /// Optimal matching: point i of mu is coupled to point permutation[i] of nu
  /// (assignment and sorted-1d methods).
  std::vector<int> permutation;
  /// Assignment: primal - dual objective (certifies optimality up to fp
  /// rounding). Sinkhorn: final L1 marginal violation.
  double dual_gap = 0.0;
  int iterations = 0;
};

/// Largest n the dense O(n^3) assignment solver accepts.
inline constexpr int kMaxExactAssignment = 4096;

/// Exact W1 between equal-size equal-weight clouds, solved as an optimal
/// assignment (Jonker-Volgenant shortest augmenting paths on the dense ground
/// cost matrix). The reported value is the mean ground cost along the
/// returned permutation.
OTResult w1_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Exact W1 for scalar samples: sorted matching on R, minimum over the n
/// cyclic offsets of the sorted matching on T^1.
OTResult w1_sorted_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

struct SinkhornOptions {
  double tolerance = 1e-8;    // L1 marginal violation
  int max_iterations = 50000;
  bool epsilon_scaling = true;
};

/// Entropy-regularized OT value via log-domain alternating scaling. The
/// returned value is the transport cost of the regularized plan, which upper
/// bounds the exact W1 (bias of order epsilon log n). Throws on
/// non-convergence within the iteration cap.
OTResult w1_sinkhorn(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     double epsilon, const SinkhornOptions& opts = {});

/// L2 Gaussian transport distance
///   sqrt(|m1-m2|^2 + Tr(C1 + C2 - 2 (C2^{1/2} C1 C2^{1/2})^{1/2})),
/// an upper bound for W1 between the same Gaussians.
double w_gaussian(const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1,
                  const Eigen::VectorXd& mean2, const Eigen::MatrixXd& cov2);

/// (W1 of position marginals, W1 of the joints); checks the marginal
/// inequality, which both being exact optima must satisfy.
std::pair<double, double> marginal_inequality_check(const EmpiricalMeasure& mu,
                                                    const EmpiricalMeasure& nu);

/// Dense square assignment: minimizes sum_i cost[i * n + rowsol[i]].
/// Returns the optimal total cost recomputed from the permutation; fills
/// optional duals (u, v) satisfying u_i + v_j <= cost_ij with equality on the
/// matching (up to rounding).
double solve_assignment_dense(int n, const double* cost, std::vector<int>& rowsol,
                              std::vector<double>* u_out = nullptr,
                              std::vector<double>* v_out = nullptr);

}  // namespace odlab

#endif
