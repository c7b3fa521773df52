#include "rankshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rankshift {
namespace {

bool is_constant(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

void require_non_constant(const PairedSeries& s, const char* what) {
    if (is_constant(s.x()) || is_constant(s.y())) {
        throw Error(ErrorCode::ConstantSeries, std::string(what) + " is undefined for a constant series");
    }
}

double pearson_unchecked(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Fenwick tree over 0-based positions counting inserted elements.
class CountTree {
public:
    explicit CountTree(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t pos) {
        for (++pos; pos < tree_.size(); pos += pos & (~pos + 1)) ++tree_[pos];
    }
    // Number of inserted elements at positions < pos.
    std::size_t prefix(std::size_t pos) const {
        std::size_t total = 0;
        for (; pos > 0; pos -= pos & (~pos + 1)) total += tree_[pos];
        return total;
    }

private:
    std::vector<std::size_t> tree_;
};

// Dense 0-based ranks of `values` (equal values share a rank).
std::vector<std::size_t> dense_ranks(std::span<const double> values, std::size_t& distinct) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    distinct = sorted.size();
    std::vector<std::size_t> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin());
    }
    return out;
}

// Per element i: concordant minus discordant partners, and the number of
// partners not tied with i in x (resp. y). O(n log n) via a Fenwick sweep.
struct ConcordanceCounts {
    std::vector<double> net;
    std::vector<double> untied_x;
    std::vector<double> untied_y;
};

ConcordanceCounts concordance_counts(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::size_t nx = 0, ny = 0;
    const auto rx = dense_ranks(x, nx);
    const auto ry = dense_ranks(y, ny);

    std::vector<std::size_t> count_x(nx, 0), count_y(ny, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++count_x[rx[i]];
        ++count_y[ry[i]];
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rx[a] < rx[b]; });

    ConcordanceCounts out{std::vector<double>(n, 0.0), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        out.untied_x[i] = static_cast<double>(n - count_x[rx[i]]);
        out.untied_y[i] = static_cast<double>(n - count_y[ry[i]]);
    }

    // Forward sweep: partners with strictly smaller x. Backward: strictly larger x.
    auto sweep = [&](auto begin, auto end, double sign) {
        CountTree tree(ny);
        std::size_t inserted = 0;
        for (auto group = begin; group != end;) {
            auto group_end = group;
            while (group_end != end && rx[*group_end] == rx[*group]) ++group_end;
            for (auto it = group; it != group_end; ++it) {
                const std::size_t i = *it;
                const double below = static_cast<double>(tree.prefix(ry[i]));
                const double above = static_cast<double>(inserted - tree.prefix(ry[i] + 1));
                // Smaller x: y below is concordant. Larger x: y above is concordant.
                out.net[i] += sign * (below - above);
            }
            for (auto it = group; it != group_end; ++it) {
                tree.add(ry[*it]);
                ++inserted;
            }
            group = group_end;
        }
    };
    sweep(order.begin(), order.end(), 1.0);
    sweep(order.rbegin(), order.rend(), -1.0);
    return out;
}

// Weighted tau with weights from the decreasing lexicographic rank of
// (primary, secondary). Uses sum_{i<j} (w_i + w_j) s_ij = sum_i w_i * net_i.
double weighted_tau_one_way(std::span<const double> primary, std::span<const double> secondary,
                            const ConcordanceCounts& counts) {
    const std::size_t n = primary.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (primary[a] != primary[b]) return primary[a] > primary[b];
        return secondary[a] > secondary[b];
    });
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t rank = 0; rank < n; ++rank) {
        const std::size_t i = order[rank];
        const double w = 1.0 / (1.0 + static_cast<double>(rank));
        num += w * counts.net[i];
        dx += w * counts.untied_x[i];
        dy += w * counts.untied_y[i];
    }
    return num / std::sqrt(dx * dy);
}

double median_in_place(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

// Weighted least squares for y = a + b x. Returns false when the weighted x
// spread vanishes.
bool weighted_line(std::span<const double> x, std::span<const double> y, std::span<const double> w, double& a,
                   double& b) {
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    if (sw <= 0.0) return false;
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) return false;
    b = sxy / sxx;
    a = my - b * mx;
    return true;
}

}  // namespace

double accuracy(const PredictionMatrix& predictions, const LabelVector& labels) {
    check_labels(labels, predictions);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (predicted_class(predictions, i) == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double macro_f1(const PredictionMatrix& predictions, const LabelVector& labels) {
    check_labels(labels, predictions);
    const std::size_t k = predictions.cols();
    std::vector<std::size_t> tp(k, 0), fp(k, 0), fn(k, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::size_t pred = predicted_class(predictions, i);
        if (pred == labels[i]) {
            ++tp[pred];
        } else {
            ++fp[pred];
            ++fn[labels[i]];
        }
    }
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
        if (denom > 0) total += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
    }
    return total / static_cast<double>(k);
}

PairedSeries::PairedSeries(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) {
        throw Error(ErrorCode::DimensionMismatch, "paired series lengths " + std::to_string(x_.size()) + " and " +
                                                      std::to_string(y_.size()) + " differ");
    }
    if (x_.size() < 2) throw Error(ErrorCode::DegenerateShape, "paired series needs at least 2 points");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(x_.begin(), x_.end(), finite) || !std::all_of(y_.begin(), y_.end(), finite)) {
        throw Error(ErrorCode::NonFinite, "paired series contains a non-finite value");
    }
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start + 1;
        while (end < n && values[order[end]] == values[order[start]]) ++end;
        // Positions start..end-1 hold 1-based ranks start+1..end.
        const double mean_rank = 0.5 * static_cast<double>(start + 1 + end);
        for (std::size_t i = start; i < end; ++i) ranks[order[i]] = mean_rank;
        start = end;
    }
    return ranks;
}

double spearman(const PairedSeries& series) {
    require_non_constant(series, "Spearman correlation");
    const auto rx = average_ranks(series.x());
    const auto ry = average_ranks(series.y());
    // Doubled, centered ranks are integers, so the sums below are exact.
    const double center = static_cast<double>(series.size()) + 1.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double dx = 2.0 * rx[i] - center;
        const double dy = 2.0 * ry[i] - center;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
        d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    }
    // Without ties both sums of squares equal n(n^2-1)/3 and the classic
    // rank-difference formula applies; evaluate it literally.
    const double n = static_cast<double>(series.size());
    const double n3 = n * (n * n - 1.0);
    if (sxx == syy && 3.0 * sxx == n3) return std::clamp(1.0 - 6.0 * d2 / n3, -1.0, 1.0);
    const double denom = sxx == syy ? sxx : std::sqrt(sxx * syy);
    return std::clamp(sxy / denom, -1.0, 1.0);
}

double weighted_kendall(const PairedSeries& series) {
    require_non_constant(series, "weighted Kendall tau");
    const auto counts = concordance_counts(series.x(), series.y());
    const double by_x = weighted_tau_one_way(series.x(), series.y(), counts);
    const double by_y = weighted_tau_one_way(series.y(), series.x(), counts);
    return std::clamp(0.5 * (by_x + by_y), -1.0, 1.0);
}

double pearson(const PairedSeries& series) {
    require_non_constant(series, "Pearson correlation");
    return pearson_unchecked(series.x(), series.y());
}

RobustFit huber_fit(const PairedSeries& series) {
    const auto x = series.x();
    const auto y = series.y();
    const std::size_t n = series.size();
    if (is_constant(x)) throw Error(ErrorCode::DegenerateX, "robust fit needs at least two distinct x values");

    std::vector<double> weights(n, 1.0);
    RobustFit fit;
    weighted_line(x, y, weights, fit.intercept, fit.slope);

    // Floor for the residual scale so that exact fits do not divide by zero.
    double y_scale = 0.0;
    for (double v : y) y_scale = std::max(y_scale, std::abs(v));
    const double scale_floor = 1e-12 * std::max(1.0, y_scale);

    std::vector<double> residuals(n), deviations(n);
    constexpr std::size_t kMaxIterations = 100;
    while (fit.iterations < kMaxIterations) {
        ++fit.iterations;
        for (std::size_t i = 0; i < n; ++i) residuals[i] = y[i] - (fit.intercept + fit.slope * x[i]);
        std::vector<double> scratch = residuals;
        const double center = median_in_place(scratch);
        for (std::size_t i = 0; i < n; ++i) deviations[i] = std::abs(residuals[i] - center);
        const double scale = std::max(kMadToSigma * median_in_place(deviations), scale_floor);
        const double cutoff = kHuberTuning * scale;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = std::abs(residuals[i]);
            weights[i] = r <= cutoff ? 1.0 : cutoff / r;
        }
        double intercept = fit.intercept, slope = fit.slope;
        if (!weighted_line(x, y, weights, intercept, slope)) break;
        const double step = std::max(std::abs(intercept - fit.intercept), std::abs(slope - fit.slope));
        fit.intercept = intercept;
        fit.slope = slope;
        if (step < 1e-10) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

}  // namespace rankshift
