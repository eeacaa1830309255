#pragma once

#include <span>
#include <vector>

namespace flsa {

// Change of variables between a signal and its increments.
//
// A length-n signal mu maps to coefficients theta with theta_1 = mu_1
// and theta_i = mu_i - mu_{i-1}.  In matrix form mu = A theta with A
// lower-triangular all-ones, so dropping the intercept column and
// centering yields a lasso design whose column j has entries
// 1{i > j} - (n - j)/n.  Everything here works matrix-free.

// theta from mu: first value kept, then successive differences.
std::vector<double> to_differences(std::span<const double> values);

// mu from theta: cumulative sums.  Inverse of to_differences.
std::vector<double> from_differences(std::span<const double> increments);

// Mean of column j (1-based) of the uncentered design: (n - j)/n.
std::vector<double> design_column_means(std::size_t n);

// Product of the centered design with v (length n-1), result length n.
std::vector<double> centered_design_apply(std::size_t n, std::span<const double> v);

// Product of the transposed centered design with u (length n), result
// length n-1.  Computed as suffix sums of u - mean(u), which makes the
// column-sum-zero identity hold exactly.
std::vector<double> centered_design_apply_t(std::size_t n, std::span<const double> u);

// Rebuilds the fitted signal from transformed-regression coefficients.
// The intercept is recovered from the data mean: theta_1 = mean(y) -
// colmeans . theta_tail, then the fit is the cumulative sum.
std::vector<double> reconstruct_signal(std::span<const double> theta_tail,
                                       std::span<const double> y);

}  // namespace flsa
