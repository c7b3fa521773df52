#pragma once

// Pool-level workflows behind the command-line tool: score and rank a pool,
// correlate scores with ground truth, run the subsampling sensitivity study,
// and generate synthetic pools.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rankshift/core_types.hpp"
#include "rankshift/io.hpp"
#include "rankshift/synth.hpp"

namespace rankshift {

enum class OutputFormat { json, csv };
enum class GroundTruth { accuracy, macro_f1 };

std::optional<GroundTruth> parse_ground_truth(std::string_view name);
std::string_view ground_truth_name(GroundTruth metric);

struct RankRequest {
    std::filesystem::path manifest_path;
    // Empty selects every measure whose side inputs the manifest provides.
    std::vector<Measure> measures;
    bool probit_scores = false;
    std::filesystem::path output_path;
    OutputFormat output_format = OutputFormat::json;
    GroundTruth metric = GroundTruth::accuracy;
};

struct SensitivityRequest {
    std::filesystem::path manifest_path;
    Measure measure = Measure::softmaxcorr;
    std::vector<double> fractions{0.01, 0.05, 0.1, 0.3, 1.0};
    std::size_t runs = 3;
    std::uint64_t seed = 0;
    std::filesystem::path output_path;
    OutputFormat output_format = OutputFormat::json;
    GroundTruth metric = GroundTruth::accuracy;
};

struct SensitivityRow {
    double fraction = 1.0;
    std::size_t samples = 0;
    std::vector<double> spearman_runs;
    double mean_spearman = 0.0;
};

struct SensitivityTable {
    Measure measure = Measure::softmaxcorr;
    GroundTruth metric = GroundTruth::accuracy;
    std::uint64_t seed = 0;
    std::size_t runs = 0;
    std::vector<SensitivityRow> rows;
};

// Measures ATC and AoL read per-model ID data; SoftmaxCorr and Diversity
// need a reference model or explicit class distribution; Disagreement needs
// reference model predictions. Throws MissingSideInput naming what is absent.
void require_side_inputs(const LoadedPool& pool, Measure measure);
bool has_side_inputs(const LoadedPool& pool, Measure measure);

// Score of every model under one measure, keyed by model id.
std::map<std::string, double> score_pool(const LoadedPool& pool, Measure measure);

// Ground-truth generalization of every model. Requires labels.
std::map<std::string, double> generalization(const LoadedPool& pool, GroundTruth metric);

// Measures that probit-scaling may be applied to (values in [0, 1]).
bool is_probability_measure(Measure measure);

// Resolves an empty measure list to every applicable measure and checks side
// inputs of explicitly requested ones.
std::vector<Measure> select_measures(const LoadedPool& pool, const std::vector<Measure>& requested);

std::vector<CorrelationReport> rank_pool(const LoadedPool& pool, const std::vector<Measure>& measures,
                                         bool probit_scores);

// Adds generalization, Spearman, weighted Kendall, Pearson and a Huber fit to
// each measure's report. A numeric failure of one measure is recorded in its
// report's `error` field and does not affect the others.
std::vector<CorrelationReport> correlate_pool(const LoadedPool& pool, const std::vector<Measure>& measures,
                                              GroundTruth metric, bool probit_scores);

// Keeps the given rows (sample indices) of every test-set matrix and the
// labels; ID data is left as is.
LoadedPool subsample_pool(const LoadedPool& pool, std::span<const std::size_t> rows);

SensitivityTable sensitivity_study(const LoadedPool& pool, const SensitivityRequest& request);

// File-to-file entry points used by the CLI.
std::vector<CorrelationReport> cmd_rank(const RankRequest& request);
std::vector<CorrelationReport> cmd_correlate(const RankRequest& request);
SensitivityTable cmd_sensitivity(const SensitivityRequest& request);
std::filesystem::path cmd_synth(const SynthConfig& config, const std::filesystem::path& out_dir);

// Serialization of reports. JSON is an array with one object per measure.
std::string reports_to_json(const std::vector<CorrelationReport>& reports);
std::string reports_to_csv(const std::vector<CorrelationReport>& reports);
std::vector<CorrelationReport> reports_from_json(std::string_view text);
std::string sensitivity_to_json(const SensitivityTable& table);
std::string sensitivity_to_csv(const SensitivityTable& table);

}  // namespace rankshift
