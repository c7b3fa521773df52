#pragma once

// Ground-truth metrics and the correlation / regression machinery used to
// judge how well a measure ranks a pool.

#include <cstddef>
#include <span>
#include <vector>

#include "rankshift/core_types.hpp"

namespace rankshift {

// Fraction of rows whose argmax equals the label.
double accuracy(const PredictionMatrix& predictions, const LabelVector& labels);

// Unweighted mean of per-class F1 over all K classes. A class with no true
// and no predicted samples contributes 0.
double macro_f1(const PredictionMatrix& predictions, const LabelVector& labels);

// Probabilities are clamped into [kProbitClamp, 1 - kProbitClamp] before probit.
inline constexpr double kProbitClamp = 1e-6;

// Standard normal CDF.
double normal_cdf(double z);

// Inverse standard normal CDF of p clamped into [1e-6, 1 - 1e-6]. Throws
// NonFinite for NaN or infinite input.
double probit(double p);

// Scores S_m paired with generalization G_m over a pool.
class PairedSeries {
public:
    // Throws DimensionMismatch (unequal lengths), DegenerateShape (n < 2) or
    // NonFinite.
    PairedSeries(std::vector<double> x, std::vector<double> y);

    std::span<const double> x() const noexcept { return x_; }
    std::span<const double> y() const noexcept { return y_; }
    std::size_t size() const noexcept { return x_.size(); }

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

// 1-based ranks with ties replaced by their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks. ConstantSeries if either side is constant.
double spearman(const PairedSeries& series);

// Weighted Kendall tau with additive hyperbolic weights: a pair (i, j)
// weighs 1/(1+r_i) + 1/(1+r_j), r being the 0-based position in decreasing
// lexicographic order. The statistic is averaged over the rankings induced by
// (x, y) and by (y, x). Tied pairs are excluded from the normalization the
// same way as in tau-b. ConstantSeries if either side is constant.
double weighted_kendall(const PairedSeries& series);

// Product-moment correlation. ConstantSeries if either side is constant.
double pearson(const PairedSeries& series);

struct RobustFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

inline constexpr double kHuberTuning = 1.345;
inline constexpr double kMadToSigma = 1.4826;

// Huber M-estimate of y = intercept + slope * x by iteratively reweighted
// least squares, starting from OLS. The residual scale is 1.4826 * MAD,
// re-estimated every iteration. Stops when both parameters move by less than
// 1e-10 or after 100 iterations. DegenerateX if all x are equal.
RobustFit huber_fit(const PairedSeries& series);

}  // namespace rankshift
