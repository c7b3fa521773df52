#pragma once

// Synthetic classifier pools with controllable accuracy, confidence and class
// bias, for end-to-end correlation studies with known ground truth.
//
// Model m draws a target accuracy a_m and a temperature T_m. For every test
// sample it places the largest logit on the true class with probability a_m,
// otherwise on a wrong class drawn from the model's class preference. All
// other logits are standard Gumbel noise; the chosen logit exceeds the
// largest of them by a random margin, larger on average for correct
// predictions, so confidence and correctness are coupled as in real
// classifiers. Probabilities are softmax(logits / T_m).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "rankshift/core_types.hpp"

namespace rankshift {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct SynthConfig {
    std::size_t n_models = 30;
    std::size_t n_samples = 5000;
    std::size_t n_classes = 10;
    // Must lie inside (1/K, 1).
    Range accuracy_range{0.2, 0.9};
    Range temperature_range{0.9, 1.1};
    // 0 spreads wrong predictions uniformly over wrong classes. Larger values
    // draw each model's class preference from Dirichlet(1 / bias_strength),
    // concentrating its mistakes on a few classes.
    double bias_strength = 0.0;
    // True class marginal; empty means uniform.
    std::vector<double> class_distribution;
    std::uint64_t seed = 0;
    // Size of a labeled in-distribution set per model (0 = none). ID accuracy
    // is Phi(probit(a_m) + kIdProbitShift).
    std::size_t id_samples = 0;
    // Emit the most accurate model as the reference model instead of the
    // true class distribution.
    bool reference_best = false;
};

inline constexpr double kCorrectMarginMean = 2.0;
inline constexpr double kWrongMarginMean = 0.5;
inline constexpr double kMinMargin = 0.05;
inline constexpr double kIdProbitShift = 0.5;

struct SynthPool {
    LabelVector labels;
    std::vector<PredictionMatrix> matrices;  // model ids model_00, model_01, ...
    std::vector<double> target_accuracies;
    std::vector<double> true_accuracies;  // realized top-1 accuracy on `labels`
    std::vector<double> temperatures;
    std::vector<double> class_distribution;
    std::optional<LabelVector> id_labels;
    std::vector<PredictionMatrix> id_matrices;
    bool reference_best = false;
};

// Throws InfeasibleConfig for K < 2, an accuracy range outside (1/K, 1), a
// non-positive or inverted temperature range, negative bias, zero models or
// samples, or a class distribution of the wrong size or not summing to 1.
void validate_synth_config(const SynthConfig& cfg);

// Deterministic in cfg (including seed).
SynthPool generate_pool(const SynthConfig& cfg);

// Writes <id>.npy per model, labels.txt, truth.csv (model_id,accuracy),
// optional id_<id>.npy + id_labels.txt, and manifest.json; returns the
// manifest as written. The directory is created if needed.
PoolManifest write_pool(const SynthPool& pool, const std::filesystem::path& dir);

}  // namespace rankshift
