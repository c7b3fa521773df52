#pragma once

// Label-free generalization measures. Every measure maps a model's
// prediction matrix (plus optional side inputs) to a scalar where a higher
// value predicts better generalization.

#include <cstddef>

#include "rankshift/core_types.hpp"

namespace rankshift {

// C = P^T P / N. The trace of C (intra-class correlation) equals ||P||_F^2 / N.
ClassCorrelationMatrix class_correlation(const PredictionMatrix& predictions);

// Class distribution estimated as the column means of a reference model's
// predictions.
ReferenceMatrix reference_matrix(const PredictionMatrix& reference_predictions);
// Same, additionally requiring K == num_classes (DimensionMismatch otherwise).
ReferenceMatrix reference_matrix(const PredictionMatrix& reference_predictions, std::size_t num_classes);

// Cosine similarity between C and the diagonal reference matrix R, in [0, 1].
// Equals 1 for confident one-hot predictions whose class frequencies match R,
// and 0 when all mass sits on classes R gives zero weight.
double softmax_corr(const ClassCorrelationMatrix& correlation, const ReferenceMatrix& reference);

// Mean over samples of the largest Softmax probability.
double max_pred(const PredictionMatrix& predictions);

// Mean over samples of (largest - second largest) probability.
double soft_gap(const PredictionMatrix& predictions);

// Confidence threshold calibrated on a labeled in-distribution set.
struct AtcThreshold {
    double t = 0.0;
    double id_error = 0.0;
    std::size_t source_n = 0;
};

// Picks t so that the fraction of ID samples whose max probability is
// strictly below t equals the ID error rate: t is the (errors+1)-th smallest
// confidence. A perfect model gets t = 0 (nothing can fall below it); a model
// that is always wrong gets t just above its largest confidence.
AtcThreshold atc_calibrate(const PredictionMatrix& id_predictions, const LabelVector& id_labels);

// 1 - fraction of samples whose max probability is strictly below t.
double atc_score(const PredictionMatrix& predictions, const AtcThreshold& threshold);

// probit of the top-1 accuracy on the labeled ID set.
double aol_score(const PredictionMatrix& id_predictions, const LabelVector& id_labels);

// 1 - fraction of samples whose argmax differs from the reference model's.
double disagreement(const PredictionMatrix& predictions, const PredictionMatrix& reference_predictions);

// Trace of C.
double certainty(const ClassCorrelationMatrix& correlation);

// -|| diag(C) - diag(R) ||_2.
double diversity(const ClassCorrelationMatrix& correlation, const ReferenceMatrix& reference);

// Mean Shannon entropy (nats) of the rows, with 0 log 0 = 0. Diagnostic only.
double prediction_entropy(const PredictionMatrix& predictions);

}  // namespace rankshift
