#include "flsa/flsa_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "flsa/errors.hpp"
#include "flsa/puffer.hpp"

namespace flsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<double> FusedGroups::expand() const {
  std::vector<double> out(bounds.empty() ? 0 : bounds.back());
  for (std::size_t k = 0; k < values.size(); ++k) {
    for (std::size_t i = bounds[k]; i < bounds[k + 1]; ++i) {
      out[i] = values[k];
    }
  }
  return out;
}

std::vector<std::int8_t> FusionPath::Segment::pattern() const {
  const std::size_t n = bounds.back();
  std::vector<std::int8_t> pat(n > 0 ? n - 1 : 0, 0);
  for (std::size_t k = 0; k + 1 < group_count(); ++k) {
    pat[bounds[k + 1] - 1] = signs[k];
  }
  return pat;
}

const FusionPath::Segment& FusionPath::segment_at(double lam) const {
  if (lam < 0.0) {
    throw InvalidParameter("fusion penalty must be nonnegative");
  }
  // Last segment whose lower edge is <= lam.
  std::size_t lo = 0, hi = segments_.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (segments_[mid].lam_lo <= lam) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return segments_[lo];
}

FusedGroups FusionPath::groups_at(double lam) const {
  const Segment& seg = segment_at(lam);
  FusedGroups groups;
  groups.bounds = seg.bounds;
  groups.values.resize(seg.group_count());
  for (std::size_t k = 0; k < seg.group_count(); ++k) {
    groups.values[k] = seg.base[k] + lam * seg.slope[k];
  }
  return groups;
}

std::vector<double> FusionPath::fit(double lam) const {
  return groups_at(lam).expand();
}

FusionPath flsa_path(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n == 0) {
    throw InvalidInput("fusion path needs at least one observation");
  }
  FusionPath path;
  path.n_ = n;

  std::vector<double> prefix(n + 1, 0.0);
  double amax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + y[i];
    amax = std::max(amax, std::abs(y[i]));
  }
  const double val_eps = 1e-12 * (1.0 + amax);
  auto mean_of = [&](std::size_t lo, std::size_t hi) {
    return (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  };

  // Exactly equal neighbours start fused; this is not a merge event.
  std::vector<std::size_t> bounds;
  bounds.push_back(0);
  for (std::size_t i = 1; i < n; ++i) {
    if (y[i] != y[i - 1]) {
      bounds.push_back(i);
    }
  }
  bounds.push_back(n);

  double lam = 0.0;
  std::vector<double> vals(bounds.size() - 1);
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    vals[k] = mean_of(bounds[k], bounds[k + 1]);
  }

  while (true) {
    const std::size_t m = bounds.size() - 1;
    FusionPath::Segment seg;
    seg.lam_lo = lam;
    seg.bounds = bounds;
    seg.base.resize(m);
    seg.slope.assign(m, 0.0);
    seg.signs.assign(m > 0 ? m - 1 : 0, 0);
    for (std::size_t k = 0; k < m; ++k) {
      seg.base[k] = mean_of(bounds[k], bounds[k + 1]);
    }
    if (m > 1) {
      for (std::size_t k = 0; k + 1 < m; ++k) {
        seg.signs[k] = vals[k + 1] > vals[k] ? std::int8_t{1} : std::int8_t{-1};
      }
      for (std::size_t k = 0; k < m; ++k) {
        const int g_left = k > 0 ? seg.signs[k - 1] : 0;
        const int g_right = k + 1 < m ? seg.signs[k] : 0;
        seg.slope[k] = static_cast<double>(g_right - g_left) /
                       static_cast<double>(bounds[k + 1] - bounds[k]);
      }
    }
    // Re-anchor values on the exact affine form to stop drift from
    // accumulating across events (continuity makes this a no-op up to
    // roundoff).
    for (std::size_t k = 0; k < m; ++k) {
      vals[k] = seg.base[k] + lam * seg.slope[k];
    }
    path.segments_.push_back(seg);
    if (m == 1) {
      break;
    }

    // Earliest collision of adjacent group values.
    double lam_event = kInf;
    std::vector<double> cross(m - 1, kInf);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const double gap = vals[k + 1] - vals[k];
      const double rel = seg.slope[k + 1] - seg.slope[k];
      const bool converging = (gap > 0.0 && rel < 0.0) || (gap < 0.0 && rel > 0.0);
      if (!converging) {
        continue;
      }
      cross[k] = lam - gap / rel;
      lam_event = std::min(lam_event, cross[k]);
    }
    if (lam_event == kInf) {
      break;
    }
    const double tie_eps = 1e-12 * (1.0 + lam_event);

    std::vector<char> merge_after(m, 0);  // merge group k with k+1
    for (std::size_t k = 0; k + 1 < m; ++k) {
      if (cross[k] <= lam_event + tie_eps) {
        merge_after[k] = 1;
      }
    }

    FusionPath::MergeEvent event;
    event.lam = lam_event;

    // Advance all values to the event, then coalesce marked chains by
    // size-weighted averaging (value continuity).
    std::vector<double> advanced(m);
    for (std::size_t k = 0; k < m; ++k) {
      advanced[k] = vals[k] + (lam_event - lam) * seg.slope[k];
    }
    std::vector<std::size_t> new_bounds;
    std::vector<double> new_vals;
    std::vector<double> new_weights;
    new_bounds.push_back(0);
    std::size_t k = 0;
    while (k < m) {
      double wsum = static_cast<double>(bounds[k + 1] - bounds[k]);
      double vsum = advanced[k] * wsum;
      std::size_t end = k;
      while (end + 1 < m && merge_after[end]) {
        event.boundaries.push_back(bounds[end + 1]);
        const double w = static_cast<double>(bounds[end + 2] - bounds[end + 1]);
        vsum += advanced[end + 1] * w;
        wsum += w;
        ++end;
      }
      new_bounds.push_back(bounds[end + 1]);
      new_vals.push_back(vsum / wsum);
      new_weights.push_back(wsum);
      k = end + 1;
    }

    // Collisions created exactly at the event (rare ties) join it too.
    bool changed = true;
    while (changed && new_vals.size() > 1) {
      changed = false;
      for (std::size_t q = 0; q + 1 < new_vals.size(); ++q) {
        if (std::abs(new_vals[q + 1] - new_vals[q]) <= val_eps) {
          event.boundaries.push_back(new_bounds[q + 1]);
          const double wsum = new_weights[q] + new_weights[q + 1];
          new_vals[q] = (new_vals[q] * new_weights[q] + new_vals[q + 1] * new_weights[q + 1]) / wsum;
          new_weights[q] = wsum;
          new_vals.erase(new_vals.begin() + q + 1);
          new_weights.erase(new_weights.begin() + q + 1);
          new_bounds.erase(new_bounds.begin() + q + 1);
          changed = true;
          break;
        }
      }
    }

    std::sort(event.boundaries.begin(), event.boundaries.end());
    path.events_.push_back(std::move(event));
    bounds = std::move(new_bounds);
    vals = std::move(new_vals);
    lam = lam_event;
  }
  return path;
}

std::vector<double> flsa_fit(const FusionPath& path, double lam2) {
  return path.fit(lam2);
}

std::vector<double> flsa_fit(std::span<const double> y, double lam2) {
  return flsa_path(y).fit(lam2);
}

std::vector<double> apply_sparsity_penalty(std::span<const double> values, double lam1) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = soft_threshold(values[i], lam1);
  }
  return out;
}

std::vector<double> fused_fit(std::span<const double> y, double lam1, double lam2) {
  return apply_sparsity_penalty(flsa_fit(y, lam2), lam1);
}

double fused_objective(std::span<const double> y, std::span<const double> mu,
                       double lam1, double lam2) {
  if (y.size() != mu.size() || y.empty()) {
    throw InvalidInput("objective needs matching nonempty vectors");
  }
  if (lam1 < 0.0 || lam2 < 0.0) {
    throw InvalidParameter("penalties must be nonnegative");
  }
  double quad = 0.0, l1 = 0.0, tv = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - mu[i];
    quad += r * r;
    l1 += std::abs(mu[i]);
    if (i + 1 < y.size()) {
      tv += std::abs(mu[i + 1] - mu[i]);
    }
  }
  return 0.5 * quad + lam1 * l1 + lam2 * tv;
}

double kkt_residual(std::span<const double> y, std::span<const double> mu,
                    double lam1, double lam2, double fuse_tol) {
  const std::size_t n = y.size();
  if (n == 0 || mu.size() != n) {
    throw InvalidInput("residual needs matching nonempty vectors");
  }
  if (lam1 < 0.0 || lam2 < 0.0 || fuse_tol < 0.0) {
    throw InvalidParameter("penalties and tolerance must be nonnegative");
  }
  // Feasible interval [lo, hi] of the boundary dual after position i;
  // stationarity forces it through the chain, sign constraints pin it
  // at true jumps, |.| <= lam2 caps it on fused stretches, and it must
  // return to zero after the last position.
  double lo = 0.0, hi = 0.0, resid = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = mu[i] - y[i];
    if (lam1 > 0.0 && mu[i] == 0.0) {
      lo += g - lam1;
      hi += g + lam1;
    } else {
      const double fixed = g + (lam1 > 0.0 ? (mu[i] > 0.0 ? lam1 : -lam1) : 0.0);
      lo += fixed;
      hi += fixed;
    }
    if (i + 1 < n) {
      const double d = mu[i + 1] - mu[i];
      if (std::abs(d) > fuse_tol) {
        const double t = d > 0.0 ? lam2 : -lam2;
        resid = std::max({resid, lo - t, t - hi});
        lo = hi = t;
      } else {
        const double nlo = std::max(lo, -lam2);
        const double nhi = std::min(hi, lam2);
        if (nlo > nhi) {
          resid = std::max(resid, nlo - nhi);
          const double pt = lo > lam2 ? lam2 : -lam2;
          lo = hi = pt;
        } else {
          lo = nlo;
          hi = nhi;
        }
      }
    } else {
      resid = std::max({resid, lo, -hi});
    }
  }
  return resid;
}

namespace {

// Exact minimizer of 0.5*w*(x - c)^2 + sum_k q_k |x - r_k|.  Kinks are
// evaluated first so exact fusions win ties.
double solve_kinked(double w, double c, std::vector<std::pair<double, double>> kinks) {
  std::erase_if(kinks, [](const auto& k) { return k.second <= 0.0; });
  std::sort(kinks.begin(), kinks.end());
  std::size_t m = 0;
  for (std::size_t t = 0; t < kinks.size(); ++t) {
    if (m > 0 && kinks[m - 1].first == kinks[t].first) {
      kinks[m - 1].second += kinks[t].second;
    } else {
      kinks[m++] = kinks[t];
    }
  }
  kinks.resize(m);
  if (kinks.empty()) {
    return c;
  }
  auto eval = [&](double x) {
    double v = 0.5 * w * (x - c) * (x - c);
    for (const auto& [r, q] : kinks) v += q * std::abs(x - r);
    return v;
  };
  double best_x = kinks[0].first;
  double best_f = eval(best_x);
  for (std::size_t t = 1; t < kinks.size(); ++t) {
    const double f = eval(kinks[t].first);
    if (f < best_f) {
      best_f = f;
      best_x = kinks[t].first;
    }
  }
  for (std::size_t t = 0; t <= kinks.size(); ++t) {
    const double lo = t == 0 ? -kInf : kinks[t - 1].first;
    const double hi = t == kinks.size() ? kInf : kinks[t].first;
    double drift = 0.0;
    for (std::size_t u = 0; u < kinks.size(); ++u) {
      drift += u < t ? kinks[u].second : -kinks[u].second;
    }
    const double x = c - drift / w;
    if (x > lo && x < hi) {
      const double f = eval(x);
      if (f < best_f) {
        best_f = f;
        best_x = x;
      }
    }
  }
  return best_x;
}

// 0.5*w*(x-c)^2 + p1*|x| + lam2*|x-a| + lam2*|x-b| over x.
struct OneDim {
  double w = 1.0;
  double c = 0.0;
  double p1 = 0.0;
  bool has_left = false;
  double a = 0.0;
  bool has_right = false;
  double b = 0.0;
  double lam2 = 0.0;
};

double solve_one_dim(const OneDim& p) {
  std::vector<std::pair<double, double>> kinks;
  if (p.p1 > 0.0) kinks.emplace_back(0.0, p.p1);
  if (p.has_left) kinks.emplace_back(p.a, p.lam2);
  if (p.has_right) kinks.emplace_back(p.b, p.lam2);
  return solve_kinked(p.w, p.c, std::move(kinks));
}

}  // namespace

std::vector<double> coordinate_descent_fit(std::span<const double> y, double lam1,
                                           double lam2, const DescentOptions& opts) {
  const std::size_t n = y.size();
  if (n == 0) {
    throw InvalidInput("descent needs at least one observation");
  }
  if (lam1 < 0.0 || lam2 < 0.0) {
    throw InvalidParameter("penalties must be nonnegative");
  }
  if (opts.tol <= 0.0) {
    throw InvalidParameter("tolerance must be positive");
  }
  std::vector<double> mu(y.begin(), y.end());
  auto run_mean = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = a; i < b; ++i) s += y[i];
    return s / static_cast<double>(b - a);
  };

  double prev_obj = kInf;
  double res = kInf;
  std::size_t stall = 0;
  for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      OneDim p;
      p.w = 1.0;
      p.c = y[i];
      p.p1 = lam1;
      p.lam2 = lam2;
      if (i > 0) { p.has_left = true; p.a = mu[i - 1]; }
      if (i + 1 < n) { p.has_right = true; p.b = mu[i + 1]; }
      mu[i] = solve_one_dim(p);
    }
    // Joint moves of maximal equal-value runs; exact equality is what
    // the clamped coordinate moves produce.
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i + 1;
      while (j < n && mu[j] == mu[i]) ++j;
      if (j - i >= 2) {
        OneDim p;
        p.w = static_cast<double>(j - i);
        p.c = run_mean(i, j);
        p.p1 = lam1 * static_cast<double>(j - i);
        p.lam2 = lam2;
        if (i > 0) { p.has_left = true; p.a = mu[i - 1]; }
        if (j < n) { p.has_right = true; p.b = mu[j]; }
        const double x = solve_one_dim(p);
        std::fill(mu.begin() + i, mu.begin() + j, x);
      }
      i = j;
    }
    res = kkt_residual(y, mu, lam1, lam2, 0.0);
    if (res <= opts.tol) {
      return mu;
    }
    const double obj = fused_objective(y, mu, lam1, lam2);
    if (obj >= prev_obj - 1e-14 * (1.0 + std::abs(obj))) {
      // Plateau: single and equal-run moves are exhausted.  Cyclic
      // descent cannot cross the nonsmooth ridges that couple several
      // positions (fusing runs, splitting a run, shifting a stretch
      // whose ends are pinned), so scan every contiguous interval and
      // try the two joint moves that do: collapsing it to one common
      // value and translating it rigidly.  Both are exact 1-D problems.
      double best_gain = 1e-15 * (1.0 + std::abs(obj));
      std::vector<double> best;
      for (std::size_t a = 0; a + 2 <= n; ++a) {
        for (std::size_t b = a + 2; b <= n; ++b) {
          const double len = static_cast<double>(b - a);
          OneDim p;
          p.w = len;
          p.c = run_mean(a, b);
          p.p1 = lam1 * len;
          p.lam2 = lam2;
          if (a > 0) { p.has_left = true; p.a = mu[a - 1]; }
          if (b < n) { p.has_right = true; p.b = mu[b]; }
          std::vector<double> trial(mu);
          std::fill(trial.begin() + a, trial.begin() + b, solve_one_dim(p));
          double gain = obj - fused_objective(y, trial, lam1, lam2);
          if (gain > best_gain) {
            best_gain = gain;
            best = std::move(trial);
          }
          // Rigid translation: internal gaps are constant in the shift,
          // so only the interval's own terms and the two boundary gaps
          // contribute kinks.
          double resid_sum = 0.0;
          std::vector<std::pair<double, double>> kinks;
          for (std::size_t i = a; i < b; ++i) {
            resid_sum += mu[i] - y[i];
            if (lam1 > 0.0) kinks.emplace_back(-mu[i], lam1);
          }
          if (a > 0) kinks.emplace_back(mu[a - 1] - mu[a], lam2);
          if (b < n) kinks.emplace_back(mu[b] - mu[b - 1], lam2);
          const double shift = solve_kinked(len, -resid_sum / len, std::move(kinks));
          if (shift != 0.0) {
            std::vector<double> shifted(mu);
            for (std::size_t i = a; i < b; ++i) shifted[i] += shift;
            gain = obj - fused_objective(y, shifted, lam1, lam2);
            if (gain > best_gain) {
              best_gain = gain;
              best = std::move(shifted);
            }
          }
        }
      }
      if (!best.empty()) {
        mu = std::move(best);
        stall = 0;
      } else if (++stall > 64) {
        throw ConvergenceFailure("descent stalled before reaching tolerance", res);
      }
    } else {
      stall = 0;
    }
    prev_obj = obj;
  }
  throw ConvergenceFailure("sweep budget exhausted before reaching tolerance", res);
}

}  // namespace flsa
