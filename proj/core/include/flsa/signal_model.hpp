#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flsa/random.hpp"

namespace flsa {

// One constant piece of a stepwise signal, 1-based inclusive bounds.
struct Block {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double level = 0.0;
};

// Piecewise-constant mean signal on positions 1..n.
class StepwiseSignal {
public:
  StepwiseSignal() = default;
  explicit StepwiseSignal(std::vector<Block> blocks, std::size_t n)
      : blocks_(std::move(blocks)), n_(n) {}

  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::size_t size() const noexcept { return n_; }

  // Materializes the mean vector on demand.
  std::vector<double> expected() const;

private:
  std::vector<Block> blocks_;
  std::size_t n_ = 0;
};

// Validates that the blocks tile 1..n contiguously (throws
// InvalidPartition otherwise) and returns the signal.
StepwiseSignal make_stepwise(const std::vector<Block>& blocks);

// The seven-block benchmark signal used throughout the simulation
// studies: length 430, alternating spikes of size 2 and shelves of
// size 0.1 around a zero baseline.
const StepwiseSignal& seven_block_signal();

// A noisy observation of a stepwise signal.
struct NoisySequence {
  std::vector<double> values;
  double sigma = 0.0;
};

// y_i = mu_i + sigma * N(0,1), variates drawn in index order from rng.
// sigma = 0 reproduces the mean exactly.  Negative sigma throws
// InvalidParameter.
NoisySequence sample_noisy(const StepwiseSignal& signal, double sigma, Rng& rng);

// Signs of successive differences; entry i (0-based) describes the step
// from position i+1 to i+2 in 1-based terms.
struct JumpPattern {
  std::vector<std::int8_t> signs;

  std::size_t size() const noexcept { return signs.size(); }
  bool operator==(const JumpPattern&) const = default;
};

// Pattern of a value vector: sign of each successive difference, with
// magnitudes <= tol treated as flat.  tol < 0 throws InvalidParameter;
// fewer than 2 values throws InvalidInput.
JumpPattern jump_pattern(std::span<const double> values, double tol);

// Number of positions where the two patterns disagree.
std::size_t mismatch_count(const JumpPattern& a, const JumpPattern& b);

// Hamming distance between the jump patterns of two equal-length value
// vectors, extracted with the same tolerance.  Symmetric; zero iff the
// patterns coincide.
std::size_t pattern_loss(std::span<const double> estimate,
                         std::span<const double> truth, double tol);

}  // namespace flsa
