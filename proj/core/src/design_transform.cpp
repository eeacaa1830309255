#include "flsa/design_transform.hpp"

#include <numeric>

#include "flsa/errors.hpp"

namespace flsa {

std::vector<double> to_differences(std::span<const double> values) {
  if (values.empty()) {
    throw InvalidInput("difference transform needs at least one value");
  }
  std::vector<double> theta(values.size());
  theta[0] = values[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    theta[i] = values[i] - values[i - 1];
  }
  return theta;
}

std::vector<double> from_differences(std::span<const double> increments) {
  if (increments.empty()) {
    throw InvalidInput("cumulative transform needs at least one increment");
  }
  std::vector<double> mu(increments.size());
  double run = 0.0;
  for (std::size_t i = 0; i < increments.size(); ++i) {
    run += increments[i];
    mu[i] = run;
  }
  return mu;
}

std::vector<double> design_column_means(std::size_t n) {
  if (n < 2) {
    throw InvalidInput("design needs n >= 2");
  }
  std::vector<double> means(n - 1);
  for (std::size_t j = 1; j < n; ++j) {
    means[j - 1] = static_cast<double>(n - j) / static_cast<double>(n);
  }
  return means;
}

std::vector<double> centered_design_apply(std::size_t n, std::span<const double> v) {
  if (n < 2) {
    throw InvalidInput("design needs n >= 2");
  }
  if (v.size() != n - 1) {
    throw InvalidInput("centered design expects a vector of length n - 1");
  }
  // (Xv)_i = sum_{j < i} v_j; subtract the common term colmeans . v.
  double mean_dot = 0.0;
  for (std::size_t j = 0; j < n - 1; ++j) {
    mean_dot += v[j] * static_cast<double>(n - 1 - j);
  }
  mean_dot /= static_cast<double>(n);
  std::vector<double> out(n);
  out[0] = -mean_dot;
  double run = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    run += v[i - 1];
    out[i] = run - mean_dot;
  }
  return out;
}

std::vector<double> centered_design_apply_t(std::size_t n, std::span<const double> u) {
  if (n < 2) {
    throw InvalidInput("design needs n >= 2");
  }
  if (u.size() != n) {
    throw InvalidInput("transposed centered design expects a vector of length n");
  }
  const double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(n);
  std::vector<double> out(n - 1);
  double suffix = 0.0;
  for (std::size_t j = n - 1; j >= 1; --j) {
    suffix += u[j] - mean;
    out[j - 1] = suffix;
  }
  return out;
}

std::vector<double> reconstruct_signal(std::span<const double> theta_tail,
                                       std::span<const double> y) {
  const std::size_t n = y.size();
  if (n < 2 || theta_tail.size() != n - 1) {
    throw InvalidInput("reconstruction expects |y| = n >= 2 and n - 1 coefficients");
  }
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double mean_dot = 0.0;
  for (std::size_t j = 0; j < n - 1; ++j) {
    mean_dot += theta_tail[j] * static_cast<double>(n - 1 - j);
  }
  mean_dot /= static_cast<double>(n);
  std::vector<double> mu(n);
  mu[0] = ybar - mean_dot;
  for (std::size_t i = 1; i < n; ++i) {
    mu[i] = mu[i - 1] + theta_tail[i - 1];
  }
  return mu;
}

}  // namespace flsa
