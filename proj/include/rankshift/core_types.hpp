#pragma once

// Validated numeric domain objects shared by every other module.
//
// All types here are immutable once constructed. Construction goes through
// validating factories so that a PredictionMatrix, ClassCorrelationMatrix or
// ReferenceMatrix in hand always satisfies its invariants.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rankshift/error.hpp"

namespace rankshift {

// Maximum |row sum - 1| accepted (and renormalized away) on ingestion.
inline constexpr double kRowSumTolerance = 1e-4;

class PredictionMatrix;

// Checks a raw row-major matrix and returns it as a PredictionMatrix.
//
// Rows whose sum drifts from 1 by at most kRowSumTolerance are renormalized;
// rows already within 1e-12 of 1 are left untouched, which makes validation
// idempotent. Throws NonFinite, NegativeEntry, RowSumOutOfTolerance,
// DegenerateShape (N == 0 or K < 2) or ShapeError (data size != N*K).
PredictionMatrix validate_prediction_matrix(std::vector<double> data, std::size_t rows, std::size_t cols,
                                            std::string model_id = {});

// Same, from nested rows. Ragged input is a ShapeError.
PredictionMatrix validate_prediction_matrix(const std::vector<std::vector<double>>& rows,
                                            std::string model_id = {});

// N x K row-stochastic matrix of Softmax outputs for one model on one test set.
class PredictionMatrix {
public:
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    // Row-major, rows() * cols() entries.
    std::span<const double> data() const noexcept { return data_; }

    const std::string& model_id() const noexcept { return model_id_; }
    PredictionMatrix with_model_id(std::string model_id) const;

    friend bool operator==(const PredictionMatrix&, const PredictionMatrix&) = default;

private:
    friend PredictionMatrix validate_prediction_matrix(std::vector<double>, std::size_t, std::size_t,
                                                       std::string);
    PredictionMatrix(std::vector<double> data, std::size_t rows, std::size_t cols, std::string model_id)
        : data_(std::move(data)), rows_(rows), cols_(cols), model_id_(std::move(model_id)) {}

    std::vector<double> data_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::string model_id_;
};

// Index of the largest entry of row i; ties go to the lowest class index.
std::size_t predicted_class(const PredictionMatrix& predictions, std::size_t i);

// K x K class-class correlation matrix C = P^T P / N with its trace split.
class ClassCorrelationMatrix {
public:
    // Validates symmetry (1e-9), non-negativity and unit total mass (1e-6).
    static ClassCorrelationMatrix from_entries(std::size_t dim, std::vector<double> data);

    std::size_t dim() const noexcept { return dim_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * dim_ + j]; }
    std::span<const double> data() const noexcept { return data_; }

    // Intra-class correlation: trace of C.
    double intra() const noexcept { return intra_; }
    // Inter-class correlation: off-diagonal mass, 1 - intra.
    double inter() const noexcept { return inter_; }

    std::vector<double> diagonal() const;
    double frobenius_norm() const;

private:
    ClassCorrelationMatrix(std::size_t dim, std::vector<double> data);

    std::size_t dim_ = 0;
    std::vector<double> data_;
    double intra_ = 0.0;
    double inter_ = 0.0;
};

// Diagonal K x K matrix holding an estimated class marginal distribution.
class ReferenceMatrix {
public:
    // Throws ZeroReferenceNorm for an all-zero vector, NegativeEntry,
    // NonFinite, DegenerateShape (K < 2) or InvariantViolation when the
    // entries do not sum to 1 within 1e-6.
    static ReferenceMatrix from_distribution(std::vector<double> diag);

    std::size_t dim() const noexcept { return diag_.size(); }
    std::span<const double> diag() const noexcept { return diag_; }
    double norm() const;

private:
    explicit ReferenceMatrix(std::vector<double> diag) : diag_(std::move(diag)) {}
    std::vector<double> diag_;
};

// 0-based class labels for the rows of a test set.
struct LabelVector {
    std::vector<std::size_t> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t operator[](std::size_t i) const noexcept { return labels[i]; }
};

// Throws DimensionMismatch when lengths differ, LabelOutOfRange when a label
// is not a column of `predictions`.
void check_labels(const LabelVector& labels, const PredictionMatrix& predictions);

enum class FileFormat { binary_array_v1, delimited_text };

std::string_view file_format_name(FileFormat format);  // "npy" | "csv"
FileFormat parse_file_format(std::string_view name);   // SchemaError on unknown

struct PredictionSource {
    std::filesystem::path path;
    FileFormat format = FileFormat::binary_array_v1;
};

struct ModelEntry {
    std::string id;
    PredictionSource source;
};

struct IdSetEntry {
    std::string id;
    PredictionSource source;
    std::filesystem::path labels_path;
};

// Either a reference model whose mean prediction estimates the class
// distribution, or the distribution itself.
using ReferenceSpec = std::variant<PredictionSource, std::vector<double>>;

// Description of a pool of models scored on one unlabeled test set.
// Paths are absolute (resolved against the manifest's directory on load).
struct PoolManifest {
    std::vector<ModelEntry> models;
    std::optional<ReferenceSpec> reference;
    std::optional<std::filesystem::path> labels_path;
    std::vector<IdSetEntry> id_set;
    std::optional<std::vector<std::size_t>> class_subset;
};

enum class Measure { softmaxcorr, maxpred, softgap, atc_mc, aol, disagreement, certainty, diversity };

inline constexpr Measure kAllMeasures[] = {Measure::softmaxcorr, Measure::maxpred,      Measure::softgap,
                                           Measure::atc_mc,      Measure::aol,          Measure::disagreement,
                                           Measure::certainty,   Measure::diversity};

std::string_view measure_name(Measure measure);
std::optional<Measure> parse_measure(std::string_view name);

struct MeasureScore {
    std::string model_id;
    Measure measure = Measure::softmaxcorr;
    double value = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Scores of one measure over a pool, their ranking, and (for correlation
// studies) agreement with ground-truth generalization.
struct CorrelationReport {
    Measure measure = Measure::softmaxcorr;
    std::map<std::string, double> scores;
    std::vector<std::string> ranking;
    std::optional<std::map<std::string, double>> generalization;
    std::optional<double> spearman;
    std::optional<double> weighted_kendall;
    std::optional<double> pearson;
    std::optional<LinearFit> fit;
    // Set when this measure could not be evaluated (e.g. ConstantSeries).
    std::optional<std::string> error;
};

// Model ids sorted by descending score; ties broken by ascending model id.
std::vector<std::string> rank_by_score(const std::map<std::string, double>& scores);

}  // namespace rankshift
