#include "rankshift/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rankshift {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NegativeEntry: return "NegativeEntry";
        case ErrorCode::RowSumOutOfTolerance: return "RowSumOutOfTolerance";
        case ErrorCode::DegenerateShape: return "DegenerateShape";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::NegativeLabel: return "NegativeLabel";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ShapeError: return "ShapeError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::DuplicateModelId: return "DuplicateModelId";
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::EmptySubset: return "EmptySubset";
        case ErrorCode::MissingSideInput: return "MissingSideInput";
        case ErrorCode::InfeasibleConfig: return "InfeasibleConfig";
        case ErrorCode::SubsampleTooSmall: return "SubsampleTooSmall";
        case ErrorCode::ZeroRowMass: return "ZeroRowMass";
        case ErrorCode::ZeroReferenceNorm: return "ZeroReferenceNorm";
        case ErrorCode::ConstantSeries: return "ConstantSeries";
        case ErrorCode::DegenerateX: return "DegenerateX";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

int exit_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroRowMass:
        case ErrorCode::ZeroReferenceNorm:
        case ErrorCode::ConstantSeries:
        case ErrorCode::DegenerateX:
        case ErrorCode::NonFinite:
            return 3;
        case ErrorCode::IoError:
            return 1;
        default:
            return 2;
    }
}

PredictionMatrix validate_prediction_matrix(std::vector<double> data, std::size_t rows, std::size_t cols,
                                            std::string model_id) {
    if (rows == 0 || cols < 2) {
        throw Error(ErrorCode::DegenerateShape,
                    "prediction matrix must have N >= 1 and K >= 2, got " + std::to_string(rows) + "x" +
                        std::to_string(cols));
    }
    if (data.size() != rows * cols) {
        throw Error(ErrorCode::ShapeError, "expected " + std::to_string(rows * cols) + " entries, got " +
                                               std::to_string(data.size()));
    }
    for (std::size_t i = 0; i < rows; ++i) {
        std::span<double> row(data.data() + i * cols, cols);
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = row[j];
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFinite,
                            "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite");
            }
            if (v < 0.0) {
                throw Error(ErrorCode::NegativeEntry,
                            "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is negative");
            }
            sum += v;
        }
        const double drift = std::abs(sum - 1.0);
        if (drift > kRowSumTolerance) {
            throw Error(ErrorCode::RowSumOutOfTolerance,
                        "row " + std::to_string(i) + " sums to " + std::to_string(sum));
        }
        if (drift > 1e-12) {
            for (double& v : row) v /= sum;
        }
        for (double v : row) {
            if (v > 1.0) {
                throw Error(ErrorCode::InvariantViolation,
                            "row " + std::to_string(i) + " has an entry above 1");
            }
        }
    }
    return PredictionMatrix(std::move(data), rows, cols, std::move(model_id));
}

PredictionMatrix validate_prediction_matrix(const std::vector<std::vector<double>>& rows, std::string model_id) {
    if (rows.empty()) throw Error(ErrorCode::DegenerateShape, "prediction matrix has no rows");
    const std::size_t cols = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) {
            throw Error(ErrorCode::ShapeError, "row " + std::to_string(i) + " has " +
                                                   std::to_string(rows[i].size()) + " entries, expected " +
                                                   std::to_string(cols));
        }
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return validate_prediction_matrix(std::move(flat), rows.size(), cols, std::move(model_id));
}

PredictionMatrix PredictionMatrix::with_model_id(std::string model_id) const {
    PredictionMatrix copy = *this;
    copy.model_id_ = std::move(model_id);
    return copy;
}

std::size_t predicted_class(const PredictionMatrix& predictions, std::size_t i) {
    const auto row = predictions.row(i);
    // max_element returns the first of equal maxima.
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

ClassCorrelationMatrix::ClassCorrelationMatrix(std::size_t dim, std::vector<double> data)
    : dim_(dim), data_(std::move(data)) {
    for (std::size_t k = 0; k < dim_; ++k) intra_ += (*this)(k, k);
    inter_ = 1.0 - intra_;
}

ClassCorrelationMatrix ClassCorrelationMatrix::from_entries(std::size_t dim, std::vector<double> data) {
    if (dim < 2) throw Error(ErrorCode::DegenerateShape, "class correlation matrix needs K >= 2");
    if (data.size() != dim * dim) {
        throw Error(ErrorCode::DimensionMismatch, "class correlation matrix needs K*K entries");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double v = data[i * dim + j];
            if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "class correlation entry is not finite");
            if (v < 0.0) throw Error(ErrorCode::NegativeEntry, "class correlation entry is negative");
            if (std::abs(v - data[j * dim + i]) > 1e-9) {
                throw Error(ErrorCode::InvariantViolation, "class correlation matrix is not symmetric");
            }
            total += v;
        }
    }
    if (std::abs(total - 1.0) > 1e-6) {
        throw Error(ErrorCode::InvariantViolation,
                    "class correlation entries sum to " + std::to_string(total) + ", expected 1");
    }
    return ClassCorrelationMatrix(dim, std::move(data));
}

std::vector<double> ClassCorrelationMatrix::diagonal() const {
    std::vector<double> out(dim_);
    for (std::size_t k = 0; k < dim_; ++k) out[k] = (*this)(k, k);
    return out;
}

double ClassCorrelationMatrix::frobenius_norm() const {
    return std::sqrt(std::inner_product(data_.begin(), data_.end(), data_.begin(), 0.0));
}

ReferenceMatrix ReferenceMatrix::from_distribution(std::vector<double> diag) {
    if (diag.size() < 2) throw Error(ErrorCode::DegenerateShape, "class distribution needs K >= 2");
    double sum = 0.0;
    for (double v : diag) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "class distribution entry is not finite");
        if (v < 0.0) throw Error(ErrorCode::NegativeEntry, "class distribution entry is negative");
        sum += v;
    }
    if (std::all_of(diag.begin(), diag.end(), [](double v) { return v == 0.0; })) {
        throw Error(ErrorCode::ZeroReferenceNorm, "class distribution is all zero");
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw Error(ErrorCode::InvariantViolation,
                    "class distribution sums to " + std::to_string(sum) + ", expected 1");
    }
    return ReferenceMatrix(std::move(diag));
}

double ReferenceMatrix::norm() const {
    return std::sqrt(std::inner_product(diag_.begin(), diag_.end(), diag_.begin(), 0.0));
}

void check_labels(const LabelVector& labels, const PredictionMatrix& predictions) {
    if (labels.size() != predictions.rows()) {
        throw Error(ErrorCode::DimensionMismatch, std::to_string(labels.size()) + " labels for " +
                                                      std::to_string(predictions.rows()) + " prediction rows");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= predictions.cols()) {
            throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(labels[i]) + " at row " +
                                                        std::to_string(i) + " is not below K=" +
                                                        std::to_string(predictions.cols()));
        }
    }
}

std::string_view file_format_name(FileFormat format) {
    return format == FileFormat::binary_array_v1 ? "npy" : "csv";
}

FileFormat parse_file_format(std::string_view name) {
    if (name == "npy") return FileFormat::binary_array_v1;
    if (name == "csv") return FileFormat::delimited_text;
    throw Error(ErrorCode::SchemaError, "unknown format \"" + std::string(name) + "\" (expected npy or csv)");
}

std::string_view measure_name(Measure measure) {
    switch (measure) {
        case Measure::softmaxcorr: return "softmaxcorr";
        case Measure::maxpred: return "maxpred";
        case Measure::softgap: return "softgap";
        case Measure::atc_mc: return "atc_mc";
        case Measure::aol: return "aol";
        case Measure::disagreement: return "disagreement";
        case Measure::certainty: return "certainty";
        case Measure::diversity: return "diversity";
    }
    return "unknown";
}

std::optional<Measure> parse_measure(std::string_view name) {
    for (Measure m : kAllMeasures) {
        if (measure_name(m) == name) return m;
    }
    return std::nullopt;
}

std::vector<std::string> rank_by_score(const std::map<std::string, double>& scores) {
    std::vector<std::string> ids;
    ids.reserve(scores.size());
    for (const auto& [id, _] : scores) ids.push_back(id);
    // std::map iterates in ascending id order, so a stable sort keeps id order on ties.
    std::stable_sort(ids.begin(), ids.end(),
                     [&](const std::string& a, const std::string& b) { return scores.at(a) > scores.at(b); });
    return ids;
}

}  // namespace rankshift
