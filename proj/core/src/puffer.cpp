#include "flsa/puffer.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include "flsa/design_transform.hpp"
#include "flsa/errors.hpp"
#include "flsa/signal_model.hpp"

namespace flsa {

Eigen::MatrixXd dense_centered_design(std::size_t n) {
  if (n < 2) {
    throw InvalidInput("design needs n >= 2");
  }
  Eigen::MatrixXd x(n, n - 1);
  for (std::size_t j = 1; j < n; ++j) {
    const double colmean = static_cast<double>(n - j) / static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) {
      x(i - 1, j - 1) = (i > j ? 1.0 : 0.0) - colmean;
    }
  }
  return x;
}

Eigen::MatrixXd PufferDecomposition::preconditioner() const {
  return u_ * d_.cwiseInverse().asDiagonal() * u_.transpose();
}

Eigen::MatrixXd PufferDecomposition::orthonormal_design() const {
  return preconditioner() * dense_centered_design(n_);
}

std::vector<double> PufferDecomposition::scores(std::span<const double> y) const {
  if (y.size() != n_) {
    throw InvalidInput("scores expect a sequence matching the decomposition size");
  }
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n_);
  Eigen::VectorXd centered(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    centered[static_cast<Eigen::Index>(i)] = y[i] - mean;
  }
  // w = V D^{-1} U^T y~  (equals Z^T F y~ after simplification)
  Eigen::VectorXd t = u_.transpose() * centered;
  t.array() /= d_.array();
  Eigen::VectorXd w = v_ * t;
  return {w.data(), w.data() + w.size()};
}

PufferDecomposition svd_centered_design(std::size_t n) {
  Eigen::MatrixXd x = dense_centered_design(n);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd u = svd.matrixU();
  Eigen::MatrixXd v = svd.matrixV();
  Eigen::VectorXd d = svd.singularValues();
  if (d.minCoeff() <= 1e-12) {
    throw SingularSystem("centered design is numerically rank deficient");
  }
  // Fix the sign indeterminacy of each singular pair deterministically.
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    Eigen::Index imax = 0;
    v.col(k).cwiseAbs().maxCoeff(&imax);
    if (v(imax, k) < 0.0) {
      v.col(k) = -v.col(k);
      u.col(k) = -u.col(k);
    }
  }
  return PufferDecomposition(n, std::move(u), std::move(d), std::move(v));
}

const PufferDecomposition& cached_decomposition(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<const PufferDecomposition>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    slot = std::make_unique<const PufferDecomposition>(svd_centered_design(n));
  }
  return *slot;
}

double soft_threshold(double x, double lam) {
  if (lam < 0.0) {
    throw InvalidParameter("threshold must be nonnegative");
  }
  if (x > lam) return x - lam;
  if (x < -lam) return x + lam;
  return 0.0;
}

std::vector<double> precondition_scores(std::span<const double> y) {
  if (y.size() < 2) {
    throw InvalidInput("scores need at least two observations");
  }
  std::vector<double> w(y.size() - 1);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    w[i] = y[i + 1] - y[i];
  }
  return w;
}

std::vector<double> ThresholdPath::coefficients_at(double lam) const {
  std::vector<double> theta(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    theta[i] = soft_threshold(scores[i], lam);
  }
  return theta;
}

ThresholdPath threshold_path(std::span<const double> y) {
  ThresholdPath path;
  path.scores = precondition_scores(y);
  path.breakpoints.resize(path.scores.size());
  for (std::size_t i = 0; i < path.scores.size(); ++i) {
    path.breakpoints[i] = std::abs(path.scores[i]);
  }
  std::sort(path.breakpoints.begin(), path.breakpoints.end(), std::greater<double>());
  return path;
}

PreconditionedFit preconditioned_fit(std::span<const double> y, double lam) {
  if (lam < 0.0) {
    throw InvalidParameter("penalty must be nonnegative");
  }
  PreconditionedFit fit;
  fit.lambda = lam;
  fit.path = threshold_path(y);
  fit.coefficients = fit.path.coefficients_at(lam);
  fit.fitted = reconstruct_signal(fit.coefficients, y);
  return fit;
}

double recovery_lower_bound(double lam, double sigma, std::size_t n) {
  if (sigma <= 0.0) {
    throw InvalidParameter("noise level must be positive");
  }
  if (lam < 0.0) {
    throw InvalidParameter("penalty must be nonnegative");
  }
  if (n < 2) {
    throw InvalidInput("bound needs n >= 2");
  }
  const double expo = -(lam * lam) / (8.0 * sigma * sigma);
  return 1.0 - 2.0 * static_cast<double>(n) * std::exp(expo);
}

RecoveryBound recovery_lower_bound(double lam, double sigma,
                                   const StepwiseSignal& signal) {
  RecoveryBound out;
  out.probability = recovery_lower_bound(lam, sigma, signal.size());
  const std::vector<double> mu = signal.expected();
  double min_jump = 0.0;
  bool seen = false;
  for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
    const double d = std::abs(mu[i + 1] - mu[i]);
    if (d > 0.0 && (!seen || d < min_jump)) {
      min_jump = d;
      seen = true;
    }
  }
  out.min_jump = seen ? min_jump : 0.0;
  // A signal with no jumps satisfies the requirement vacuously.
  out.jump_condition_met = !seen || min_jump >= 2.0 * lam;
  return out;
}

}  // namespace flsa
