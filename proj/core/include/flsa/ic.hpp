#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "flsa/signal_model.hpp"

namespace flsa {

// Irrepresentable-condition diagnostics for the difference design.
//
// For a jump set S = {j_1 < ... < j_s} the relevant regressions of a
// non-jump column on the jump columns have closed forms, because the
// Gram matrix of the jump columns augmented with the intercept is
// (a_{max(k,l)}) with a = (n, n - j_1, ..., n - j_s), whose inverse is
// tridiagonal.  Sign consistency of the lasso requires the signed
// combination b_j . sign(S) to stay below 1 in magnitude for every
// j outside S; whether that happens is decided entirely by the jump
// spacings and directions.

// Jump set of a length-n signal in design-column labels: column j
// encodes the step between positions j and j+1.
struct JumpSet {
  std::vector<std::size_t> columns;  // strictly increasing, in 1..n-1
  std::vector<int> signs;            // +1 / -1 per column
  std::size_t n = 0;                 // signal length
};

// Columns and directions where a stepwise signal actually jumps.
JumpSet support_from_signal(const StepwiseSignal& signal);

// Inverse of the symmetric matrix A_{ij} = a_{max(i,j)}.  Exists and
// is tridiagonal whenever consecutive entries are distinct and the
// last entry is nonzero; those failures throw SingularSystem.
struct TridiagonalInverse {
  std::vector<double> diag;  // k entries
  std::vector<double> off;   // k-1 entries, coupling t and t+1

  Eigen::MatrixXd dense() const;
  // Matrix-vector product in O(k).
  std::vector<double> multiply(std::span<const double> v) const;
};

TridiagonalInverse tridiag_inverse(std::span<const double> a);

// Per-column diagnostics for every column outside the jump set:
// l1_norm is the l1 norm of the regression coefficients of that column
// on the jump columns, signed_value their combination with the jump
// directions.
struct ICMagnitudes {
  std::vector<std::size_t> columns;
  std::vector<double> l1_norm;
  std::vector<double> signed_value;
};

ICMagnitudes ic_magnitudes(const JumpSet& jumps);

// Verdicts read off the jump geometry alone.  The sign-free variant
// holds iff there is a single jump or all jump spacings equal 1; the
// signed variant additionally tolerates wider spacings whose two jumps
// point in opposite directions.
struct StructuralIC {
  bool strong = false;
  bool weak = false;
};

StructuralIC structural_ic(const JumpSet& jumps);

// Combined numeric + structural report.  Numeric verdicts place a
// 1e-9 guard band under the critical value 1, which the reachable
// magnitudes (rationals with denominator <= n) cannot enter.
struct ICReport {
  JumpSet jumps;
  std::vector<std::size_t> columns;
  std::vector<double> l1_norm;
  std::vector<double> signed_value;
  double max_abs_signed = 0.0;
  double max_l1 = 0.0;
  std::size_t argmax_column = 0;  // column with the largest |signed_value|, 0 if none
  bool holds = false;             // numeric: max |signed| < 1
  bool strong_holds = false;      // numeric: max l1 < 1
  bool structural_weak = false;
  bool structural_strong = false;
};

ICReport ic_report(const JumpSet& jumps);

// Whether the lasso on (x, y) at penalty lam admits a solution with
// exactly the signs of beta_star, decided by the stationarity
// conditions on the active block and the dual feasibility of the rest.
// lam must be positive; a singular active Gram matrix throws
// RankDeficient.
bool kkt_sign_recovery(const Eigen::MatrixXd& x, std::span<const double> y,
                       std::span<const double> beta_star, double lam);

// Finite-sample sign-recovery guarantee for a general design.  psi is
// the required signal strength; condition_ok reports whether the
// smallest active |beta| clears it; probability is the guaranteed
// recovery probability (returned raw, may be negative).
// noise_eigenmax is the largest eigenvalue of the noise covariance.
struct LassoBound {
  double psi = 0.0;
  double eta = 0.0;
  double c_min = 0.0;
  bool condition_ok = false;
  double probability = 0.0;
};

LassoBound lasso_recovery_bound(const Eigen::MatrixXd& x,
                                std::span<const double> beta_star, double lam,
                                double noise_eigenmax);

}  // namespace flsa
