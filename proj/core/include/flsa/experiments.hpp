#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flsa/ic.hpp"
#include "flsa/signal_model.hpp"

namespace flsa {

enum class Method { flsa, preconditioned };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

// One Monte Carlo study: draw noisy copies of a stepwise signal and
// count how often a method's solution path contains a fit whose jump
// pattern matches the truth exactly.
struct ExperimentConfig {
  StepwiseSignal signal;
  std::vector<double> sigmas;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  Method method = Method::preconditioned;
  double sign_tol = 1e-9;  // tolerance for extracting jump signs from fits
  unsigned threads = 0;    // 0 = hardware concurrency
};

struct SigmaRecovery {
  double sigma = 0.0;
  std::size_t successes = 0;
  double probability = 0.0;
  double std_error = 0.0;  // binomial sqrt(p(1-p)/R)
  std::vector<std::uint8_t> flags;  // per-replicate success, index = replicate
};

struct RecoveryResult {
  Method method = Method::preconditioned;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<SigmaRecovery> per_sigma;
  double wall_seconds = 0.0;
};

// Replicate r at sigma index si uses the stream keyed (seed, si, r),
// so results do not depend on the thread count or schedule.
RecoveryResult recovery_probability(const ExperimentConfig& config);

struct SweepPoint {
  double sigma = 0.0;
  double probability = 0.0;
  double std_error = 0.0;
};

// Recovery probability per noise level, one row per sigma.
std::vector<SweepPoint> sigma_sweep(const ExperimentConfig& config);

// Best-case diagnostics of one method on one data vector: the smallest
// pattern loss anywhere on the path, and the fit with the smallest
// squared distance to the truth.
struct MethodReport {
  std::size_t min_loss = 0;
  double lam_min_loss = 0.0;
  std::vector<double> fit_min_loss;
  double lam_best_l2 = 0.0;
  double l2_error = 0.0;
  std::size_t loss_at_best_l2 = 0;
  std::vector<double> fit_best_l2;
};

struct MethodComparison {
  MethodReport flsa_report;
  MethodReport preconditioned_report;
};

MethodComparison compare_methods(std::span<const double> y,
                                 const StepwiseSignal& truth,
                                 double sign_tol = 1e-9);

// How often the lasso on the difference design can recover the signs
// of a coefficient vector whose support violates the irrepresentable
// condition.  The setup must violate it (InvalidSetup otherwise); the
// point of the experiment is that no penalty choice can push the
// frequency past one half.
struct NecessityConfig {
  JumpSet jumps;
  double strength = 1.0;  // |theta| at each jump column
  double sigma = 0.3;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  std::vector<double> lambda_grid;  // empty: 20 points linear in [0.05, 1] x strength
};

struct NecessityResult {
  std::vector<double> lambda_grid;
  std::vector<double> frequency;  // per-lambda sign recovery frequency
  double max_frequency = 0.0;
  double path_frequency = 0.0;  // recovery at any grid lambda
  double std_error = 0.0;       // worst-case binomial SE 0.5/sqrt(R)
  std::size_t replicates = 0;
};

NecessityResult ic_necessity_experiment(const NecessityConfig& config);

}  // namespace flsa
