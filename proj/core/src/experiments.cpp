#include "flsa/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "flsa/design_transform.hpp"
#include "flsa/errors.hpp"
#include "flsa/flsa_solver.hpp"
#include "flsa/puffer.hpp"
#include "flsa/random.hpp"

namespace flsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct TruthJumps {
  std::vector<std::size_t> positions;  // boundary index in 1..n-1
  std::vector<std::int8_t> signs;
};

TruthJumps truth_jumps(const std::vector<double>& mu) {
  TruthJumps tj;
  for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
    const double d = mu[i + 1] - mu[i];
    if (d != 0.0) {
      tj.positions.push_back(i + 1);
      tj.signs.push_back(d > 0 ? std::int8_t{1} : std::int8_t{-1});
    }
  }
  return tj;
}

// Exact test for "some lambda on the thresholding path reproduces the
// true pattern": the jump scores must carry the right signs and
// strictly dominate every non-jump score, leaving room for a
// threshold between them.
bool preconditioned_success(const std::vector<double>& w, const TruthJumps& tj,
                            double tol) {
  double min_jump = kInf;
  double max_rest = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (next < tj.positions.size() && tj.positions[next] == i + 1) {
      const double v = w[i];
      if (tj.signs[next] == 1 ? v <= 0.0 : v >= 0.0) {
        return false;
      }
      min_jump = std::min(min_jump, std::abs(v));
      ++next;
    } else {
      max_rest = std::max(max_rest, std::abs(w[i]));
    }
  }
  if (tj.positions.empty()) {
    return true;  // large thresholds flatten everything
  }
  return min_jump > tol && max_rest < min_jump;
}

// The fusion path visits finitely many groupings; the pattern is
// constant on each segment, so scanning segments is a complete search
// over lambda.
bool flsa_success(const FusionPath& path, const TruthJumps& tj) {
  for (const auto& seg : path.segments()) {
    if (seg.group_count() != tj.positions.size() + 1) {
      continue;
    }
    bool match = true;
    for (std::size_t k = 0; k + 1 < seg.group_count(); ++k) {
      if (seg.bounds[k + 1] != tj.positions[k] || seg.signs[k] != tj.signs[k]) {
        match = false;
        break;
      }
    }
    if (match) {
      return true;
    }
  }
  return false;
}

void run_replicates(const ExperimentConfig& cfg, std::size_t sigma_index,
                    const std::vector<double>& mu, const TruthJumps& tj,
                    std::vector<std::uint8_t>& flags) {
  const double sigma = cfg.sigmas[sigma_index];
  const std::size_t n = mu.size();
  auto worker = [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(n);
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(cfg.seed, {sigma_index, r});
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = mu[i] + sigma * rng.next_gaussian();
      }
      bool ok = false;
      if (cfg.method == Method::preconditioned) {
        ok = preconditioned_success(precondition_scores(y), tj, cfg.sign_tol);
      } else {
        ok = flsa_success(flsa_path(y), tj);
      }
      flags[r] = ok ? 1 : 0;
    }
  };

  unsigned threads = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfg.replicates)));
  if (threads == 1) {
    worker(0, cfg.replicates);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (cfg.replicates + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min<std::size_t>(t * chunk, cfg.replicates);
    const std::size_t end = std::min<std::size_t>(begin + chunk, cfg.replicates);
    pool.emplace_back([&worker, &errors, t, begin, end] {
      try {
        worker(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  for (const auto& err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }
}

}  // namespace

std::string method_name(Method method) {
  return method == Method::flsa ? "flsa" : "preconditioned";
}

Method method_from_name(const std::string& name) {
  if (name == "flsa") return Method::flsa;
  if (name == "preconditioned") return Method::preconditioned;
  throw InvalidParameter("unknown method '" + name + "'");
}

RecoveryResult recovery_probability(const ExperimentConfig& cfg) {
  if (cfg.signal.size() < 2) {
    throw InvalidInput("experiment needs a signal of length >= 2");
  }
  if (cfg.sigmas.empty()) {
    throw InvalidInput("experiment needs at least one noise level");
  }
  for (double s : cfg.sigmas) {
    if (s < 0.0) {
      throw InvalidParameter("noise levels must be nonnegative");
    }
  }
  if (cfg.replicates == 0) {
    throw InvalidParameter("experiment needs at least one replicate");
  }
  if (cfg.sign_tol < 0.0) {
    throw InvalidParameter("sign tolerance must be nonnegative");
  }

  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> mu = cfg.signal.expected();
  const TruthJumps tj = truth_jumps(mu);

  RecoveryResult result;
  result.method = cfg.method;
  result.replicates = cfg.replicates;
  result.seed = cfg.seed;
  result.per_sigma.resize(cfg.sigmas.size());
  for (std::size_t si = 0; si < cfg.sigmas.size(); ++si) {
    SigmaRecovery& rec = result.per_sigma[si];
    rec.sigma = cfg.sigmas[si];
    rec.flags.assign(cfg.replicates, 0);
    run_replicates(cfg, si, mu, tj, rec.flags);
    rec.successes = 0;
    for (std::uint8_t f : rec.flags) {
      rec.successes += f;
    }
    rec.probability = static_cast<double>(rec.successes) / static_cast<double>(cfg.replicates);
    rec.std_error = std::sqrt(rec.probability * (1.0 - rec.probability) /
                              static_cast<double>(cfg.replicates));
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<SweepPoint> sigma_sweep(const ExperimentConfig& cfg) {
  const RecoveryResult result = recovery_probability(cfg);
  std::vector<SweepPoint> points(result.per_sigma.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].sigma = result.per_sigma[i].sigma;
    points[i].probability = result.per_sigma[i].probability;
    points[i].std_error = result.per_sigma[i].std_error;
  }
  return points;
}

namespace {

// Affine-in-lambda squared distance minimized over [lo, hi], with the
// fit evaluated honestly through eval.
template <typename Eval>
void scan_l2(const Eval& eval, double lo, double hi,
             const std::vector<double>& mu_star, double sign_tol,
             MethodReport& report, bool& have_l2) {
  const double la = lo + 0.25 * (hi - lo);
  const double lb = lo + 0.75 * (hi - lo);
  const std::vector<double> fa = eval(la);
  const std::vector<double> fb = eval(lb);
  double quad_a = 0.0, quad_b = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    const double q = (fb[i] - fa[i]) / (lb - la);
    const double p = fa[i] - la * q;
    quad_a += q * q;
    quad_b += 2.0 * q * (p - mu_star[i]);
  }
  double lam = 0.5 * (lo + hi);
  if (quad_a > 0.0) {
    lam = std::clamp(-quad_b / (2.0 * quad_a), lo, hi);
  }
  const std::vector<double> fit = eval(lam);
  double err = 0.0;
  for (std::size_t i = 0; i < fit.size(); ++i) {
    const double d = fit[i] - mu_star[i];
    err += d * d;
  }
  err = std::sqrt(err);
  if (!have_l2 || err < report.l2_error) {
    have_l2 = true;
    report.l2_error = err;
    report.lam_best_l2 = lam;
    report.fit_best_l2 = fit;
    report.loss_at_best_l2 = pattern_loss(fit, mu_star, sign_tol);
  }
}

void consider_loss(const std::vector<double>& fit, double lam,
                   const std::vector<double>& mu_star, double sign_tol,
                   MethodReport& report, bool& have_loss) {
  const std::size_t loss = pattern_loss(fit, mu_star, sign_tol);
  if (!have_loss || loss < report.min_loss) {
    have_loss = true;
    report.min_loss = loss;
    report.lam_min_loss = lam;
    report.fit_min_loss = fit;
  }
}

}  // namespace

MethodComparison compare_methods(std::span<const double> y,
                                 const StepwiseSignal& truth, double sign_tol) {
  if (y.size() != truth.size() || y.size() < 2) {
    throw InvalidInput("comparison needs matching data and truth of length >= 2");
  }
  const std::vector<double> mu_star = truth.expected();
  MethodComparison cmp;

  {
    const FusionPath path = flsa_path(y);
    MethodReport& rep = cmp.flsa_report;
    bool have_loss = false, have_l2 = false;
    const auto& segs = path.segments();
    auto eval = [&](double lam) { return path.fit(lam); };
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const double lo = segs[k].lam_lo;
      const double hi = k + 1 < segs.size() ? segs[k + 1].lam_lo : lo + 1.0;
      const double mid = 0.5 * (lo + hi);
      consider_loss(path.fit(mid), mid, mu_star, sign_tol, rep, have_loss);
      scan_l2(eval, lo, hi, mu_star, sign_tol, rep, have_l2);
    }
  }

  {
    const ThresholdPath path = threshold_path(y);
    MethodReport& rep = cmp.preconditioned_report;
    bool have_loss = false, have_l2 = false;
    std::vector<double> edges = path.breakpoints;  // descending
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    auto eval = [&](double lam) {
      return reconstruct_signal(path.coefficients_at(lam), y);
    };
    // Intervals of constant active set, widest penalty first.
    std::vector<std::pair<double, double>> intervals;
    const double top = edges.empty() ? 1.0 : edges.front();
    intervals.emplace_back(top, top + 1.0);
    for (std::size_t t = 0; t + 1 < edges.size(); ++t) {
      intervals.emplace_back(edges[t + 1], edges[t]);
    }
    if (!edges.empty() && edges.back() > 0.0) {
      intervals.emplace_back(0.0, edges.back());
    }
    for (const auto& [lo, hi] : intervals) {
      const double mid = 0.5 * (lo + hi);
      consider_loss(eval(mid), mid, mu_star, sign_tol, rep, have_loss);
      scan_l2(eval, lo, hi, mu_star, sign_tol, rep, have_l2);
    }
  }
  return cmp;
}

NecessityResult ic_necessity_experiment(const NecessityConfig& cfg) {
  if (cfg.strength <= 0.0) {
    throw InvalidParameter("jump strength must be positive");
  }
  if (cfg.sigma <= 0.0) {
    throw InvalidParameter("noise level must be positive");
  }
  if (cfg.replicates == 0) {
    throw InvalidParameter("experiment needs at least one replicate");
  }
  const ICReport report = ic_report(cfg.jumps);
  if (report.holds) {
    throw InvalidSetup(
        "jump set satisfies the irrepresentable condition; the ceiling only "
        "applies to supports that violate it");
  }
  if (cfg.jumps.columns.empty()) {
    throw InvalidInput("necessity experiment needs a nonempty jump set");
  }

  const std::size_t n = cfg.jumps.n;
  const Eigen::MatrixXd x = dense_centered_design(n);

  std::vector<double> beta(n - 1, 0.0);
  for (std::size_t t = 0; t < cfg.jumps.columns.size(); ++t) {
    beta[cfg.jumps.columns[t] - 1] = cfg.strength * cfg.jumps.signs[t];
  }
  std::vector<double> theta(n, 0.0);
  std::copy(beta.begin(), beta.end(), theta.begin() + 1);
  const std::vector<double> mu = from_differences(theta);

  std::vector<double> grid = cfg.lambda_grid;
  if (grid.empty()) {
    grid.resize(20);
    for (std::size_t t = 0; t < grid.size(); ++t) {
      grid[t] = cfg.strength *
                (0.05 + 0.95 * static_cast<double>(t) / static_cast<double>(grid.size() - 1));
    }
  }
  for (double lam : grid) {
    if (lam <= 0.0) {
      throw InvalidParameter("penalty grid must be positive");
    }
  }

  NecessityResult out;
  out.lambda_grid = grid;
  out.frequency.assign(grid.size(), 0.0);
  out.replicates = cfg.replicates;

  std::vector<double> ytilde(n);
  std::size_t path_hits = 0;
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    Rng rng(cfg.seed, {r});
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ytilde[i] = mu[i] + cfg.sigma * rng.next_gaussian();
      sum += ytilde[i];
    }
    const double mean = sum / static_cast<double>(n);
    for (double& v : ytilde) {
      v -= mean;
    }
    bool any = false;
    for (std::size_t t = 0; t < grid.size(); ++t) {
      if (kkt_sign_recovery(x, ytilde, beta, grid[t])) {
        out.frequency[t] += 1.0;
        any = true;
      }
    }
    path_hits += any;
  }
  for (double& f : out.frequency) {
    f /= static_cast<double>(cfg.replicates);
    out.max_frequency = std::max(out.max_frequency, f);
  }
  out.path_frequency = static_cast<double>(path_hits) / static_cast<double>(cfg.replicates);
  out.std_error = 0.5 / std::sqrt(static_cast<double>(cfg.replicates));
  return out;
}

}  // namespace flsa
