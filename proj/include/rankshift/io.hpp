#pragma once

// Loading prediction matrices, labels and pool manifests from disk.
//
// Two matrix formats are supported and the caller always declares which one
// a file uses:
//   npy - NPY v1.0, little-endian float32/float64, C order, shape (N, K)
//   csv - one sample per line, K comma-separated decimals, LF endings, no header
// Labels are one decimal integer per line.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankshift/core_types.hpp"

namespace rankshift {

PredictionMatrix load_prediction_matrix(const std::filesystem::path& path, FileFormat format,
                                        std::string model_id = {});

// Parsers over in-memory file contents; load_prediction_matrix reads the file
// and dispatches to one of these.
PredictionMatrix parse_npy_matrix(std::span<const char> bytes, std::string model_id = {});
PredictionMatrix parse_text_matrix(std::string_view text, std::string model_id = {});

// npy output is always float64. Text output uses 17 significant digits.
void write_prediction_matrix(const PredictionMatrix& predictions, const std::filesystem::path& path,
                             FileFormat format);
std::string format_text_matrix(const PredictionMatrix& predictions);

LabelVector load_labels(const std::filesystem::path& path);
LabelVector parse_labels(std::string_view text);
void write_labels(const LabelVector& labels, const std::filesystem::path& path);

// Reads and validates a manifest. Relative paths inside it are resolved
// against the manifest's own directory; every referenced file must exist.
PoolManifest load_manifest(const std::filesystem::path& path);
PoolManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);

// Writes a manifest, storing paths relative to the manifest's directory when
// they live under it.
void write_manifest(const PoolManifest& manifest, const std::filesystem::path& path);

// Keeps the `subset` columns of P and renormalizes every row to sum to 1.
// Throws EmptySubset, DimensionMismatch (index >= K), InvariantViolation
// (duplicate index) or ZeroRowMass.
PredictionMatrix restrict_to_subset(const PredictionMatrix& predictions, std::span<const std::size_t> subset);

struct IdSetData {
    PredictionMatrix predictions;
    LabelVector labels;
};

// Every matrix of a manifest loaded, subset-restricted and cross-checked.
struct LoadedPool {
    std::vector<PredictionMatrix> models;  // manifest order
    std::optional<PredictionMatrix> reference_predictions;
    std::optional<std::vector<double>> class_distribution;
    std::optional<LabelVector> labels;
    std::map<std::string, IdSetData> id_set;

    std::size_t num_samples() const { return models.front().rows(); }
    std::size_t num_classes() const { return models.front().cols(); }
};

// With a class subset, labels in the manifest are original class indices and
// are remapped to subset positions; test-set labels outside the subset are a
// LabelOutOfRange error, while ID-set rows whose label falls outside the
// subset are dropped.
LoadedPool load_pool(const PoolManifest& manifest);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const char> bytes);

}  // namespace rankshift
