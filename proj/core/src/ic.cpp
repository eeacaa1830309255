#include "flsa/ic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flsa/errors.hpp"

namespace flsa {

namespace {

constexpr double kBoundaryTol = 1e-9;

void validate_jumps(const JumpSet& jumps) {
  if (jumps.n < 2) {
    throw InvalidInput("jump set needs a signal length of at least 2");
  }
  if (jumps.columns.size() != jumps.signs.size()) {
    throw InvalidInput("jump columns and signs differ in length");
  }
  std::size_t prev = 0;
  for (std::size_t t = 0; t < jumps.columns.size(); ++t) {
    const std::size_t j = jumps.columns[t];
    if (j < 1 || j > jumps.n - 1) {
      throw InvalidInput("jump column " + std::to_string(j) + " outside 1.." +
                         std::to_string(jumps.n - 1));
    }
    if (j <= prev) {
      throw InvalidInput("jump columns must be strictly increasing");
    }
    if (jumps.signs[t] != 1 && jumps.signs[t] != -1) {
      throw InvalidInput("jump signs must be +1 or -1");
    }
    prev = j;
  }
}

}  // namespace

JumpSet support_from_signal(const StepwiseSignal& signal) {
  if (signal.size() < 2) {
    throw InvalidInput("signal too short to carry jumps");
  }
  JumpSet jumps;
  jumps.n = signal.size();
  const auto& blocks = signal.blocks();
  for (std::size_t t = 1; t < blocks.size(); ++t) {
    const double step = blocks[t].level - blocks[t - 1].level;
    if (step != 0.0) {
      jumps.columns.push_back(blocks[t].lo - 1);
      jumps.signs.push_back(step > 0.0 ? 1 : -1);
    }
  }
  return jumps;
}

Eigen::MatrixXd TridiagonalInverse::dense() const {
  const Eigen::Index k = static_cast<Eigen::Index>(diag.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index t = 0; t < k; ++t) {
    m(t, t) = diag[static_cast<std::size_t>(t)];
    if (t + 1 < k) {
      m(t, t + 1) = off[static_cast<std::size_t>(t)];
      m(t + 1, t) = off[static_cast<std::size_t>(t)];
    }
  }
  return m;
}

std::vector<double> TridiagonalInverse::multiply(std::span<const double> v) const {
  const std::size_t k = diag.size();
  if (v.size() != k) {
    throw InvalidInput("tridiagonal product needs a matching vector");
  }
  std::vector<double> out(k, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    double s = diag[t] * v[t];
    if (t > 0) s += off[t - 1] * v[t - 1];
    if (t + 1 < k) s += off[t] * v[t + 1];
    out[t] = s;
  }
  return out;
}

TridiagonalInverse tridiag_inverse(std::span<const double> a) {
  const std::size_t k = a.size();
  if (k == 0) {
    throw InvalidInput("empty sequence has no inverse");
  }
  if (a[k - 1] == 0.0) {
    throw SingularSystem("last entry is zero, matrix is singular");
  }
  for (std::size_t t = 0; t + 1 < k; ++t) {
    if (a[t] == a[t + 1]) {
      throw SingularSystem("repeated adjacent entries make the matrix singular");
    }
  }
  TridiagonalInverse inv;
  inv.diag.resize(k);
  if (k == 1) {
    inv.diag[0] = 1.0 / a[0];
    return inv;
  }
  inv.off.resize(k - 1);
  inv.diag[0] = 1.0 / (a[0] - a[1]);
  for (std::size_t t = 1; t + 1 < k; ++t) {
    inv.diag[t] = (a[t - 1] - a[t + 1]) / ((a[t - 1] - a[t]) * (a[t] - a[t + 1]));
  }
  inv.diag[k - 1] = a[k - 2] / ((a[k - 2] - a[k - 1]) * a[k - 1]);
  for (std::size_t t = 0; t + 1 < k; ++t) {
    inv.off[t] = -1.0 / (a[t] - a[t + 1]);
  }
  return inv;
}

ICMagnitudes ic_magnitudes(const JumpSet& jumps) {
  validate_jumps(jumps);
  const std::size_t n = jumps.n;
  const std::size_t s = jumps.columns.size();

  ICMagnitudes out;
  out.columns.reserve(n - 1 - s);

  if (s == 0) {
    for (std::size_t j = 1; j < n; ++j) {
      out.columns.push_back(j);
      out.l1_norm.push_back(0.0);
      out.signed_value.push_back(0.0);
    }
    return out;
  }

  // Gram matrix of intercept + jump columns is (a_{max(k,l)}) with
  // a = (n, n - j_1, ..., n - j_s); its inverse is tridiagonal.
  std::vector<double> a(s + 1);
  a[0] = static_cast<double>(n);
  for (std::size_t t = 0; t < s; ++t) {
    a[t + 1] = static_cast<double>(n - jumps.columns[t]);
  }
  const TridiagonalInverse inv = tridiag_inverse(a);

  std::vector<double> u(s + 1);
  std::size_t next = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (next < s && jumps.columns[next] == j) {
      ++next;
      continue;
    }
    u[0] = static_cast<double>(n - j);
    for (std::size_t t = 0; t < s; ++t) {
      u[t + 1] = static_cast<double>(n - std::max(jumps.columns[t], j));
    }
    const std::vector<double> b = inv.multiply(u);
    double l1 = 0.0, sv = 0.0;
    for (std::size_t t = 1; t <= s; ++t) {
      l1 += std::abs(b[t]);
      sv += b[t] * jumps.signs[t - 1];
    }
    out.columns.push_back(j);
    out.l1_norm.push_back(l1);
    out.signed_value.push_back(sv);
  }
  return out;
}

StructuralIC structural_ic(const JumpSet& jumps) {
  validate_jumps(jumps);
  StructuralIC verdict;
  const std::size_t s = jumps.columns.size();
  if (s <= 1) {
    verdict.strong = true;
    verdict.weak = true;
    return verdict;
  }
  std::size_t max_gap = 1;
  bool wide_gaps_opposed = true;
  for (std::size_t t = 0; t + 1 < s; ++t) {
    const std::size_t gap = jumps.columns[t + 1] - jumps.columns[t];
    max_gap = std::max(max_gap, gap);
    if (gap >= 2 && jumps.signs[t + 1] != -jumps.signs[t]) {
      wide_gaps_opposed = false;
    }
  }
  verdict.strong = max_gap == 1;
  verdict.weak = verdict.strong || wide_gaps_opposed;
  return verdict;
}

ICReport ic_report(const JumpSet& jumps) {
  ICReport report;
  report.jumps = jumps;
  ICMagnitudes mags = ic_magnitudes(jumps);
  report.columns = std::move(mags.columns);
  report.l1_norm = std::move(mags.l1_norm);
  report.signed_value = std::move(mags.signed_value);
  for (std::size_t t = 0; t < report.columns.size(); ++t) {
    const double av = std::abs(report.signed_value[t]);
    if (av > report.max_abs_signed) {
      report.max_abs_signed = av;
      report.argmax_column = report.columns[t];
    }
    report.max_l1 = std::max(report.max_l1, report.l1_norm[t]);
  }
  report.holds = report.max_abs_signed < 1.0 - kBoundaryTol;
  report.strong_holds = report.max_l1 < 1.0 - kBoundaryTol;
  const StructuralIC structural = structural_ic(jumps);
  report.structural_weak = structural.weak;
  report.structural_strong = structural.strong;
  return report;
}

bool kkt_sign_recovery(const Eigen::MatrixXd& x, std::span<const double> y,
                       std::span<const double> beta_star, double lam) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (static_cast<Eigen::Index>(y.size()) != n ||
      static_cast<Eigen::Index>(beta_star.size()) != p || n == 0 || p == 0) {
    throw InvalidInput("design, response, and coefficients have inconsistent sizes");
  }
  if (lam <= 0.0) {
    throw InvalidParameter("penalty must be positive");
  }

  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (beta_star[static_cast<std::size_t>(j)] != 0.0) {
      active.push_back(j);
    }
  }
  const Eigen::Index s = static_cast<Eigen::Index>(active.size());

  Eigen::VectorXd eps(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eps[i] = y[static_cast<std::size_t>(i)];
  }

  Eigen::VectorXd q;  // X_S h - eps, the vector the inactive columns see
  Eigen::VectorXd h;
  Eigen::VectorXd sign_s(s);
  Eigen::MatrixXd xs(n, s);
  if (s > 0) {
    for (Eigen::Index t = 0; t < s; ++t) {
      xs.col(t) = x.col(active[static_cast<std::size_t>(t)]);
      const double b = beta_star[static_cast<std::size_t>(active[static_cast<std::size_t>(t)])];
      sign_s[t] = b > 0.0 ? 1.0 : -1.0;
      eps -= b * xs.col(t);
    }
    const Eigen::MatrixXd gram = xs.transpose() * xs;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
      throw RankDeficient("active columns are linearly dependent");
    }
    h = lu.solve(xs.transpose() * eps - lam * sign_s);
    // Active block must keep its signs.
    for (Eigen::Index t = 0; t < s; ++t) {
      const double b = beta_star[static_cast<std::size_t>(active[static_cast<std::size_t>(t)])];
      const double v = b + h[t];
      if (v == 0.0 || (v > 0.0) != (sign_s[t] > 0.0)) {
        return false;
      }
    }
    q = xs * h - eps;
  } else {
    q = -eps;
  }

  // Inactive columns must stay dual feasible.
  std::size_t next = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (next < active.size() && active[next] == j) {
      ++next;
      continue;
    }
    if (std::abs(x.col(j).dot(q)) > lam) {
      return false;
    }
  }
  return true;
}

LassoBound lasso_recovery_bound(const Eigen::MatrixXd& x,
                                std::span<const double> beta_star, double lam,
                                double noise_eigenmax) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (static_cast<Eigen::Index>(beta_star.size()) != p || n == 0 || p == 0) {
    throw InvalidInput("design and coefficients have inconsistent sizes");
  }
  if (lam <= 0.0) {
    throw InvalidParameter("penalty must be positive");
  }
  if (noise_eigenmax <= 0.0) {
    throw InvalidParameter("noise eigenvalue bound must be positive");
  }

  std::vector<Eigen::Index> active;
  double min_active = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double b = beta_star[static_cast<std::size_t>(j)];
    if (b != 0.0) {
      const double ab = std::abs(b);
      if (active.empty() || ab < min_active) {
        min_active = ab;
      }
      active.push_back(j);
    }
  }
  if (active.empty()) {
    throw InvalidInput("bound needs at least one active coefficient");
  }
  const Eigen::Index s = static_cast<Eigen::Index>(active.size());

  Eigen::MatrixXd xs(n, s);
  Eigen::VectorXd sign_s(s);
  for (Eigen::Index t = 0; t < s; ++t) {
    xs.col(t) = x.col(active[static_cast<std::size_t>(t)]);
    sign_s[t] = beta_star[static_cast<std::size_t>(active[static_cast<std::size_t>(t)])] > 0.0 ? 1.0 : -1.0;
  }
  const Eigen::MatrixXd gram = xs.transpose() * xs;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double c_min = eig.eigenvalues().minCoeff();
  if (c_min <= 1e-12) {
    throw RankDeficient("active Gram matrix is rank deficient");
  }
  Eigen::LDLT<Eigen::MatrixXd> chol(gram);
  const Eigen::VectorXd gs = chol.solve(sign_s);

  double eta = 1.0;
  double maxcol = 0.0;
  bool complement = false;
  std::size_t next = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (next < active.size() && active[next] == j) {
      ++next;
      continue;
    }
    complement = true;
    const Eigen::VectorXd corr = chol.solve(xs.transpose() * x.col(j));
    eta = std::min(eta, 1.0 - std::abs(corr.dot(sign_s)));
    maxcol = std::max(maxcol, x.col(j).norm());
  }
  if (complement && eta <= 0.0) {
    throw InvalidSetup("irrepresentable condition fails for this support");
  }

  LassoBound out;
  out.eta = eta;
  out.c_min = c_min;
  out.psi = lam * gs.cwiseAbs().maxCoeff();
  if (complement) {
    out.psi += lam * eta / (std::sqrt(c_min) * maxcol);
  }
  out.condition_ok = min_active > out.psi;
  if (complement) {
    const double expo = -(lam * lam * eta * eta) /
                        (2.0 * noise_eigenmax * maxcol * maxcol);
    out.probability = 1.0 - 2.0 * static_cast<double>(p) * std::exp(expo);
  } else {
    out.probability = 1.0;
  }
  return out;
}

}  // namespace flsa
