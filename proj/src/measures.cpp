#include "rankshift/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rankshift/stats.hpp"

namespace rankshift {
namespace {

double max_probability(std::span<const double> row) { return *std::max_element(row.begin(), row.end()); }

void require_same_shape(const PredictionMatrix& a, const PredictionMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
}

}  // namespace

ClassCorrelationMatrix class_correlation(const PredictionMatrix& predictions) {
    const std::size_t k = predictions.cols();
    std::vector<double> c(k * k, 0.0);
    for (std::size_t i = 0; i < predictions.rows(); ++i) {
        const auto row = predictions.row(i);
        for (std::size_t a = 0; a < k; ++a) {
            const double pa = row[a];
            if (pa == 0.0) continue;
            for (std::size_t b = a; b < k; ++b) c[a * k + b] += pa * row[b];
        }
    }
    const double n = static_cast<double>(predictions.rows());
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            c[a * k + b] /= n;
            c[b * k + a] = c[a * k + b];
        }
    }
    return ClassCorrelationMatrix::from_entries(k, std::move(c));
}

ReferenceMatrix reference_matrix(const PredictionMatrix& reference_predictions) {
    const std::size_t k = reference_predictions.cols();
    std::vector<double> mean(k, 0.0);
    for (std::size_t i = 0; i < reference_predictions.rows(); ++i) {
        const auto row = reference_predictions.row(i);
        for (std::size_t j = 0; j < k; ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(reference_predictions.rows());
    return ReferenceMatrix::from_distribution(std::move(mean));
}

ReferenceMatrix reference_matrix(const PredictionMatrix& reference_predictions, std::size_t num_classes) {
    if (reference_predictions.cols() != num_classes) {
        throw Error(ErrorCode::DimensionMismatch, "reference predictions have K=" +
                                                      std::to_string(reference_predictions.cols()) +
                                                      ", expected " + std::to_string(num_classes));
    }
    return reference_matrix(reference_predictions);
}

double softmax_corr(const ClassCorrelationMatrix& correlation, const ReferenceMatrix& reference) {
    if (correlation.dim() != reference.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "class correlation K=" + std::to_string(correlation.dim()) +
                                                      ", reference K=" + std::to_string(reference.dim()));
    }
    const double reference_norm = reference.norm();
    if (!(reference_norm > 0.0)) throw Error(ErrorCode::ZeroReferenceNorm, "reference matrix has zero norm");
    // R is diagonal, so the element-wise product only touches the diagonal of C.
    double inner = 0.0;
    const auto diag = reference.diag();
    for (std::size_t k = 0; k < diag.size(); ++k) inner += correlation(k, k) * diag[k];
    const double value = inner / (correlation.frobenius_norm() * reference_norm);
    return std::clamp(value, 0.0, 1.0);
}

double max_pred(const PredictionMatrix& predictions) {
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.rows(); ++i) total += max_probability(predictions.row(i));
    return total / static_cast<double>(predictions.rows());
}

double soft_gap(const PredictionMatrix& predictions) {
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.rows(); ++i) {
        double first = -1.0, second = -1.0;
        for (double v : predictions.row(i)) {
            if (v > first) {
                second = first;
                first = v;
            } else if (v > second) {
                second = v;
            }
        }
        total += first - second;
    }
    return total / static_cast<double>(predictions.rows());
}

AtcThreshold atc_calibrate(const PredictionMatrix& id_predictions, const LabelVector& id_labels) {
    check_labels(id_labels, id_predictions);
    const std::size_t n = id_predictions.rows();
    std::vector<double> confidences(n);
    std::size_t errors = 0;
    for (std::size_t i = 0; i < n; ++i) {
        confidences[i] = max_probability(id_predictions.row(i));
        if (predicted_class(id_predictions, i) != id_labels[i]) ++errors;
    }
    std::sort(confidences.begin(), confidences.end());

    AtcThreshold out;
    out.source_n = n;
    out.id_error = static_cast<double>(errors) / static_cast<double>(n);
    if (errors == 0) {
        out.t = 0.0;
    } else if (errors == n) {
        out.t = std::nextafter(confidences.back(), std::numeric_limits<double>::infinity());
    } else {
        out.t = confidences[errors];
    }
    return out;
}

double atc_score(const PredictionMatrix& predictions, const AtcThreshold& threshold) {
    std::size_t below = 0;
    for (std::size_t i = 0; i < predictions.rows(); ++i) {
        if (max_probability(predictions.row(i)) < threshold.t) ++below;
    }
    return 1.0 - static_cast<double>(below) / static_cast<double>(predictions.rows());
}

double aol_score(const PredictionMatrix& id_predictions, const LabelVector& id_labels) {
    return probit(accuracy(id_predictions, id_labels));
}

double disagreement(const PredictionMatrix& predictions, const PredictionMatrix& reference_predictions) {
    require_same_shape(predictions, reference_predictions, "disagreement");
    std::size_t differ = 0;
    for (std::size_t i = 0; i < predictions.rows(); ++i) {
        if (predicted_class(predictions, i) != predicted_class(reference_predictions, i)) ++differ;
    }
    return 1.0 - static_cast<double>(differ) / static_cast<double>(predictions.rows());
}

double certainty(const ClassCorrelationMatrix& correlation) { return correlation.intra(); }

double diversity(const ClassCorrelationMatrix& correlation, const ReferenceMatrix& reference) {
    if (correlation.dim() != reference.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "class correlation K=" + std::to_string(correlation.dim()) +
                                                      ", reference K=" + std::to_string(reference.dim()));
    }
    double sq = 0.0;
    for (std::size_t k = 0; k < reference.dim(); ++k) {
        const double d = correlation(k, k) - reference.diag()[k];
        sq += d * d;
    }
    return -std::sqrt(sq);
}

double prediction_entropy(const PredictionMatrix& predictions) {
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.rows(); ++i) {
        for (double p : predictions.row(i)) {
            if (p > 0.0) total -= p * std::log(p);
        }
    }
    return total / static_cast<double>(predictions.rows());
}

}  // namespace rankshift
