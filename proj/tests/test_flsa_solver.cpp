#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "flsa/errors.hpp"
#include "flsa/flsa_solver.hpp"
#include "flsa/random.hpp"

namespace {

std::vector<double> lattice_vector(flsa::Rng& rng, std::size_t n) {
  // Quarter-integer values make exact ties and simultaneous merges likely.
  std::vector<double> v(n);
  for (auto& x : v) {
    x = std::round(4.0 * 2.0 * rng.next_gaussian()) / 4.0;
  }
  return v;
}

std::vector<double> smooth_vector(flsa::Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.next_gaussian();
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Penalty values that probe every segment of the fusion path: zero, the
// events themselves, midpoints between them, and one point past the end.
std::vector<double> probe_lambdas(const flsa::FusionPath& path) {
  std::vector<double> grid{0.0};
  const auto& ev = path.events();
  for (std::size_t e = 0; e < ev.size(); ++e) {
    grid.push_back(ev[e].lam);
    const double next = e + 1 < ev.size() ? ev[e + 1].lam : ev[e].lam + 1.0;
    grid.push_back(0.5 * (ev[e].lam + next));
  }
  if (!ev.empty()) grid.push_back(ev.back().lam + 2.0);
  return grid;
}

}  // namespace

TEST_SUITE("flsa_solver") {

TEST_CASE("two points merge at half their distance") {
  const std::vector<double> y{0.0, 2.0};
  const auto path = flsa::flsa_path(y);
  REQUIRE(path.events().size() == 1);
  CHECK(path.events()[0].lam == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(path.events()[0].boundaries == std::vector<std::size_t>{1});

  const auto half = path.fit(0.5);
  CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half[1] == doctest::Approx(1.5).epsilon(1e-12));
  const auto merged = path.fit(1.0);
  CHECK(merged[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(merged[1] == doctest::Approx(1.0).epsilon(1e-12));
  const auto beyond = path.fit(7.0);
  CHECK(beyond[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("valley merges both boundaries in one event") {
  const std::vector<double> y{1.0, 0.0, 1.0};
  const auto path = flsa::flsa_path(y);
  REQUIRE(path.events().size() == 1);
  CHECK(path.events()[0].lam == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(path.events()[0].boundaries == std::vector<std::size_t>{1, 2});

  const auto before = path.fit(0.2);
  CHECK(before[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(before[1] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(before[2] == doctest::Approx(0.8).epsilon(1e-12));
  const auto after = path.fit(0.5);
  for (double v : after) CHECK(v == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("constant data yields a trivial path") {
  const std::vector<double> y{2.5, 2.5, 2.5, 2.5};
  const auto path = flsa::flsa_path(y);
  CHECK(path.events().empty());
  CHECK(path.segments().size() == 1);
  CHECK(path.segments()[0].group_count() == 1);
  CHECK(path.fit(3.0) == y);
}

TEST_CASE("exactly equal neighbours start fused without an event") {
  const std::vector<double> y{1.0, 1.0, 4.0, 4.0, 4.0};
  const auto path = flsa::flsa_path(y);
  CHECK(path.segments().front().group_count() == 2);
  CHECK(path.segments().front().bounds == std::vector<std::size_t>{0, 2, 5});
  REQUIRE(path.events().size() == 1);
  CHECK(path.events()[0].boundaries == std::vector<std::size_t>{2});
}

TEST_CASE("segment pattern reports the gap signs") {
  const std::vector<double> y{0.0, 2.0, 1.0};
  const auto path = flsa::flsa_path(y);
  const auto& seg = path.segments().front();
  const auto pat = seg.pattern();
  REQUIRE(pat.size() == 2);
  CHECK(pat[0] == 1);
  CHECK(pat[1] == -1);
}

TEST_CASE("fusion preserves the total mass") {
  flsa::Rng rng(61);
  for (int rep = 0; rep < 10; ++rep) {
    const auto y = smooth_vector(rng, 8 + rng.next_u64() % 33, 2.0);
    double ysum = 0.0;
    for (double v : y) ysum += v;
    const auto path = flsa::flsa_path(y);
    for (double lam : probe_lambdas(path)) {
      const auto mu = path.fit(lam);
      double msum = 0.0;
      for (double v : mu) msum += v;
      CHECK(std::abs(msum - ysum) < 1e-9 * (1.0 + std::abs(ysum)));
    }
  }
}

TEST_CASE("groups only merge as the penalty grows") {
  flsa::Rng rng(62);
  for (int rep = 0; rep < 15; ++rep) {
    const auto y = lattice_vector(rng, 5 + rng.next_u64() % 60);
    const auto path = flsa::flsa_path(y);
    double last_lam = 0.0;
    for (const auto& ev : path.events()) {
      CHECK(ev.lam >= last_lam - 1e-12);
      last_lam = ev.lam;
    }
    for (std::size_t s = 1; s < path.segments().size(); ++s) {
      const auto& prev = path.segments()[s - 1].bounds;
      const auto& cur = path.segments()[s].bounds;
      CHECK(cur.size() < prev.size());
      // Nested partitions: every surviving boundary existed before.
      for (std::size_t b : cur) {
        CHECK(std::binary_search(prev.begin(), prev.end(), b));
      }
    }
    // The path ends fully fused.
    CHECK(path.segments().back().group_count() == 1);
  }
}

TEST_CASE("path fits satisfy the stationarity certificate") {
  flsa::Rng rng(63);
  for (int rep = 0; rep < 10; ++rep) {
    const auto y = smooth_vector(rng, 4 + rng.next_u64() % 57, 1.5);
    double scale = 1.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    const auto path = flsa::flsa_path(y);
    for (double lam : probe_lambdas(path)) {
      const auto mu = path.fit(lam);
      CHECK(flsa::kkt_residual(y, mu, 0.0, lam, 1e-9) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("kkt_residual separates optima from non-optima") {
  const std::vector<double> y{0.0, 2.0};
  const std::vector<double> opt{0.5, 1.5};
  CHECK(flsa::kkt_residual(y, opt, 0.0, 0.5) <= 1e-14);
  const std::vector<double> off{0.6, 1.4};
  CHECK(flsa::kkt_residual(y, off, 0.0, 0.5) > 0.05);
  // Penalized-to-zero optimum with both penalties
  const std::vector<double> zero{0.0, 0.0};
  CHECK(flsa::kkt_residual(y, zero, 1.0, 1.0) <= 1e-14);
}

TEST_CASE("sparsity composition on worked examples") {
  const std::vector<double> y{0.0, 2.0};
  const auto a = flsa::fused_fit(y, 0.0, 0.5);
  CHECK(a[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(1.5).epsilon(1e-12));
  const auto b = flsa::fused_fit(y, 1.0, 1.0);
  CHECK(b[0] == 0.0);
  CHECK(b[1] == 0.0);
  const std::vector<double> v{-3.0, 0.5, 2.0};
  const auto t = flsa::apply_sparsity_penalty(v, 1.0);
  CHECK(t == std::vector<double>{-2.0, 0.0, 1.0});
}

TEST_CASE("direct minimizer agrees on fusion-only problems") {
  flsa::Rng rng(64);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 1 + rng.next_u64() % 12;
    const auto y = rep % 2 == 0 ? lattice_vector(rng, n) : smooth_vector(rng, n, 2.0);
    const auto path = flsa::flsa_path(y);
    for (double lam : probe_lambdas(path)) {
      const auto fast = path.fit(lam);
      const auto slow = flsa::coordinate_descent_fit(y, 0.0, lam);
      CHECK(max_abs_diff(fast, slow) < 1e-6);
    }
  }
}

TEST_CASE("thresholded fusion solves the two-penalty problem") {
  flsa::Rng rng(65);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 2 + rng.next_u64() % 14;
    const auto y = rep % 3 == 0 ? lattice_vector(rng, n) : smooth_vector(rng, n, 2.0);
    const double lam1 = rng.next_unit() * 1.5;
    const double lam2 = rng.next_unit() * 1.5;
    const auto fast = flsa::fused_fit(y, lam1, lam2);
    const auto slow = flsa::coordinate_descent_fit(y, lam1, lam2);
    CHECK(max_abs_diff(fast, slow) < 1e-6);
    // Both ends land on (near) optimal objective values.
    const double fo = flsa::fused_objective(y, fast, lam1, lam2);
    const double so = flsa::fused_objective(y, slow, lam1, lam2);
    CHECK(std::abs(fo - so) < 1e-8 * (1.0 + std::abs(so)));
    CHECK(flsa::kkt_residual(y, fast, lam1, lam2, 1e-9) <= 1e-7);
  }
}

TEST_CASE("groups_at evaluates the affine segment") {
  const std::vector<double> y{0.0, 2.0};
  const auto path = flsa::flsa_path(y);
  const auto g = path.groups_at(0.25);
  REQUIRE(g.group_count() == 2);
  CHECK(g.values[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(g.values[1] == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(g.expand() == std::vector<double>{g.values[0], g.values[1]});
}

TEST_CASE("input validation and failure reporting") {
  const std::vector<double> empty;
  CHECK_THROWS_AS((void)flsa::flsa_path(empty), flsa::InvalidInput);
  const std::vector<double> y{1.0, 2.0, 0.0};
  CHECK_THROWS_AS((void)flsa::flsa_path(y).fit(-0.5), flsa::InvalidParameter);
  CHECK_THROWS_AS((void)flsa::fused_objective(y, empty, 1.0, 1.0), flsa::InvalidInput);
  CHECK_THROWS_AS((void)flsa::fused_objective(y, y, -1.0, 0.0), flsa::InvalidParameter);

  flsa::DescentOptions opts;
  opts.max_sweeps = 0;
  try {
    (void)flsa::coordinate_descent_fit(y, 0.1, 0.1, opts);
    FAIL("expected ConvergenceFailure");
  } catch (const flsa::ConvergenceFailure& e) {
    CHECK(e.residual() > 0.0);
  }
}

}  // TEST_SUITE
