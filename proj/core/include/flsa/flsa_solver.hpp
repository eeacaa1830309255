#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace flsa {

// Fused lasso signal approximator.
//
// For the pure fusion penalty the solution path in lambda is piecewise
// affine and groups only ever merge as lambda grows.  Each group's
// value moves as
//     v_k(lambda) = mean_k + lambda * (g_k - g_{k-1}) / size_k
// where g_k is the sign of the gap to the next group (0 at the ends).
// flsa_path tracks the merge events; evaluating the path at any lambda
// and composing with a componentwise soft threshold yields the full
// two-penalty fit.

// A fused grouping: bounds has m+1 offsets (0 = b_0 < ... < b_m = n),
// group k covers positions [b_k, b_{k+1}) with common value values[k].
struct FusedGroups {
  std::vector<std::size_t> bounds;
  std::vector<double> values;

  std::size_t group_count() const noexcept { return values.size(); }
  std::vector<double> expand() const;
};

class FusionPath {
public:
  struct Segment {
    double lam_lo = 0.0;                 // valid for lam in [lam_lo, next)
    std::vector<std::size_t> bounds;     // m+1 group offsets
    std::vector<double> base;            // group means (value at lambda 0)
    std::vector<double> slope;           // value drift per unit lambda
    std::vector<std::int8_t> signs;      // m-1 gap signs on this segment

    std::size_t group_count() const noexcept { return base.size(); }
    // Jump pattern of any fit in this segment: zero inside groups,
    // the gap sign at each internal boundary.
    std::vector<std::int8_t> pattern() const;
  };

  // lam: merge penalty; boundaries: 1-based positions i meaning the
  // boundary between i and i+1 disappeared at lam.  Simultaneous
  // merges share one event.
  struct MergeEvent {
    double lam = 0.0;
    std::vector<std::size_t> boundaries;
  };

  std::size_t size() const noexcept { return n_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  const std::vector<MergeEvent>& events() const noexcept { return events_; }

  const Segment& segment_at(double lam) const;
  FusedGroups groups_at(double lam) const;
  std::vector<double> fit(double lam) const;

private:
  friend FusionPath flsa_path(std::span<const double> y);

  std::size_t n_ = 0;
  std::vector<Segment> segments_;
  std::vector<MergeEvent> events_;
};

// Builds the whole merge path of the fusion-penalized problem.
FusionPath flsa_path(std::span<const double> y);

// Fusion-only fit at one penalty.
std::vector<double> flsa_fit(const FusionPath& path, double lam2);
std::vector<double> flsa_fit(std::span<const double> y, double lam2);

// Componentwise soft threshold; composing it with a fusion fit solves
// the two-penalty problem exactly.
std::vector<double> apply_sparsity_penalty(std::span<const double> values, double lam1);

// Full fit with both penalties.
std::vector<double> fused_fit(std::span<const double> y, double lam1, double lam2);

// 0.5 ||y - mu||^2 + lam1 ||mu||_1 + lam2 * total variation of mu.
double fused_objective(std::span<const double> y, std::span<const double> mu,
                       double lam1, double lam2);

// Optimality certificate: the largest violation over the stationarity
// conditions, found by propagating the feasible interval of the
// boundary dual variables left to right.  Zero iff mu is exactly
// optimal.  Gaps of magnitude <= fuse_tol are treated as fused when
// choosing dual variables (0 demands exact grouping).
double kkt_residual(std::span<const double> y, std::span<const double> mu,
                    double lam1, double lam2, double fuse_tol = 0.0);

struct DescentOptions {
  double tol = 1e-8;
  std::size_t max_sweeps = 1'000'000;
};

// Slow direct minimizer used to validate the path solver: cyclic exact
// coordinate moves, joint moves of equal-value runs, and joint collapse
// or translation of whole windows of runs once the cycle plateaus, all
// certified by kkt_residual before returning.  Throws
// ConvergenceFailure (with the final residual) if the certificate never
// clears tol.
std::vector<double> coordinate_descent_fit(std::span<const double> y, double lam1,
                                           double lam2, const DescentOptions& opts = {});

}  // namespace flsa
