#include "flsa/signal_model.hpp"

#include <cmath>
#include <string>

#include "flsa/errors.hpp"

namespace flsa {

std::vector<double> StepwiseSignal::expected() const {
  std::vector<double> mu(n_);
  for (const Block& b : blocks_) {
    for (std::size_t i = b.lo; i <= b.hi; ++i) {
      mu[i - 1] = b.level;
    }
  }
  return mu;
}

StepwiseSignal make_stepwise(const std::vector<Block>& blocks) {
  if (blocks.empty()) {
    throw InvalidPartition("stepwise signal needs at least one block");
  }
  if (blocks.front().lo != 1) {
    throw InvalidPartition("first block must start at position 1");
  }
  std::size_t expect = 1;
  for (const Block& b : blocks) {
    if (b.lo != expect) {
      throw InvalidPartition("blocks must tile positions contiguously; gap or overlap at position " +
                             std::to_string(b.lo));
    }
    if (b.hi < b.lo) {
      throw InvalidPartition("empty block at position " + std::to_string(b.lo));
    }
    if (!std::isfinite(b.level)) {
      throw InvalidPartition("block level must be finite");
    }
    expect = b.hi + 1;
  }
  return StepwiseSignal(blocks, blocks.back().hi);
}

const StepwiseSignal& seven_block_signal() {
  static const StepwiseSignal signal = make_stepwise({
      {1, 100, 0.0},
      {101, 110, -2.0},
      {111, 210, -0.1},
      {211, 220, 2.0},
      {221, 320, 0.1},
      {321, 330, -2.0},
      {331, 430, 0.0},
  });
  return signal;
}

NoisySequence sample_noisy(const StepwiseSignal& signal, double sigma, Rng& rng) {
  if (sigma < 0.0) {
    throw InvalidParameter("noise level must be nonnegative");
  }
  NoisySequence out;
  out.sigma = sigma;
  out.values = signal.expected();
  if (sigma > 0.0) {
    for (double& v : out.values) {
      v += sigma * rng.next_gaussian();
    }
  }
  return out;
}

JumpPattern jump_pattern(std::span<const double> values, double tol) {
  if (tol < 0.0) {
    throw InvalidParameter("pattern tolerance must be nonnegative");
  }
  if (values.size() < 2) {
    throw InvalidInput("pattern needs at least two values");
  }
  JumpPattern pattern;
  pattern.signs.resize(values.size() - 1);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double d = values[i + 1] - values[i];
    pattern.signs[i] = std::abs(d) <= tol ? std::int8_t{0} : (d > 0 ? std::int8_t{1} : std::int8_t{-1});
  }
  return pattern;
}

std::size_t mismatch_count(const JumpPattern& a, const JumpPattern& b) {
  if (a.size() != b.size()) {
    throw InvalidInput("patterns have different lengths");
  }
  std::size_t loss = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    loss += a.signs[i] != b.signs[i];
  }
  return loss;
}

std::size_t pattern_loss(std::span<const double> estimate,
                         std::span<const double> truth, double tol) {
  if (estimate.size() != truth.size()) {
    throw InvalidInput("estimate and truth have different lengths");
  }
  return mismatch_count(jump_pattern(estimate, tol), jump_pattern(truth, tol));
}

}  // namespace flsa
