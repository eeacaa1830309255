#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace flsa {

// Preconditioning of the difference-design regression.
//
// Let X be the centered design (see design_transform) with thin SVD
// X = U D V^T.  The preconditioner F = U D^{-1} U^T turns X into an
// orthonormal-column design Z = F X = U V^T, so the lasso on (Z, F y)
// decouples into componentwise soft thresholding of the scores
// w = Z^T F y.  Because the centered response lies in the column span
// of X, the scores reduce to plain successive differences of y; the
// SVD route is kept as the slow reference implementation.

// Dense centered design, entries 1{i > j} - (n - j)/n.
Eigen::MatrixXd dense_centered_design(std::size_t n);

class PufferDecomposition {
public:
  PufferDecomposition(std::size_t n, Eigen::MatrixXd u, Eigen::VectorXd d,
                      Eigen::MatrixXd v)
      : n_(n), u_(std::move(u)), d_(std::move(d)), v_(std::move(v)) {}

  std::size_t size() const noexcept { return n_; }
  const Eigen::MatrixXd& matrix_u() const noexcept { return u_; }
  const Eigen::VectorXd& singular_values() const noexcept { return d_; }
  const Eigen::MatrixXd& matrix_v() const noexcept { return v_; }

  // F = U D^{-1} U^T, symmetric n x n.
  Eigen::MatrixXd preconditioner() const;

  // Z = F X, computed through the preconditioner (not the analytic
  // shortcut), so tests exercise the actual pipeline.
  Eigen::MatrixXd orthonormal_design() const;

  // Scores w = Z^T F y via the SVD route: V D^{-1} U^T (y - mean).
  std::vector<double> scores(std::span<const double> y) const;

private:
  std::size_t n_;
  Eigen::MatrixXd u_;
  Eigen::VectorXd d_;
  Eigen::MatrixXd v_;
};

// Thin SVD of the centered design with a deterministic sign convention
// (largest-magnitude entry of each right singular vector is positive).
PufferDecomposition svd_centered_design(std::size_t n);

// Decompositions are expensive and reusable; this returns a shared
// per-n instance guarded by a mutex, so replicated experiments at a
// fixed n pay for one SVD.
const PufferDecomposition& cached_decomposition(std::size_t n);

// Scalar soft threshold: shrinks x toward zero by lam, exact zero in
// the dead zone.  lam < 0 throws InvalidParameter.
double soft_threshold(double x, double lam);

// Production-path scores of the preconditioned regression: successive
// differences of y.  Mathematically equal to
// svd_centered_design(n).scores(y).
std::vector<double> precondition_scores(std::span<const double> y);

// Scores plus the solution-path breakpoints |w| sorted descending.
// The active set of the thresholded solution is constant between
// consecutive breakpoints.
struct ThresholdPath {
  std::vector<double> scores;
  std::vector<double> breakpoints;

  // Componentwise soft threshold of the scores at lam.
  std::vector<double> coefficients_at(double lam) const;
};

ThresholdPath threshold_path(std::span<const double> y);

// Full preconditioned fit at one penalty: thresholded coefficients and
// the reconstructed signal estimate.
struct PreconditionedFit {
  double lambda = 0.0;
  ThresholdPath path;
  std::vector<double> coefficients;
  std::vector<double> fitted;
};

PreconditionedFit preconditioned_fit(std::span<const double> y, double lam);

// Analytic lower bound on the probability that the thresholded scores
// reproduce the true jump signs: 1 - 2 n exp(-lam^2 / (8 sigma^2)).
// Valid when every true jump magnitude is at least 2 lam.  Returned
// raw (can be negative).  sigma <= 0 or lam < 0 throws
// InvalidParameter.
double recovery_lower_bound(double lam, double sigma, std::size_t n);

struct RecoveryBound {
  double probability = 0.0;
  double min_jump = 0.0;
  bool jump_condition_met = false;
};

// Same bound evaluated for a concrete signal; also reports whether the
// smallest nonzero jump magnitude clears the 2 lam requirement.
RecoveryBound recovery_lower_bound(double lam, double sigma,
                                   const class StepwiseSignal& signal);

}  // namespace flsa
