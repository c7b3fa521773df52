#include "rankshift/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "rankshift/measures.hpp"
#include "rankshift/random.hpp"
#include "rankshift/stats.hpp"

namespace rankshift {
namespace fs = std::filesystem;

namespace {

[[noreturn]] void missing(Measure measure, const std::string& what) {
    throw Error(ErrorCode::MissingSideInput, std::string(measure_name(measure)) + " needs " + what);
}

ReferenceMatrix pool_reference(const LoadedPool& pool) {
    if (pool.class_distribution) return ReferenceMatrix::from_distribution(*pool.class_distribution);
    return reference_matrix(*pool.reference_predictions, pool.num_classes());
}

double score_model(const LoadedPool& pool, Measure measure, const PredictionMatrix& predictions,
                   const std::optional<ReferenceMatrix>& reference) {
    switch (measure) {
        case Measure::softmaxcorr: return softmax_corr(class_correlation(predictions), *reference);
        case Measure::maxpred: return max_pred(predictions);
        case Measure::softgap: return soft_gap(predictions);
        case Measure::atc_mc: {
            const auto& id = pool.id_set.at(predictions.model_id());
            return atc_score(predictions, atc_calibrate(id.predictions, id.labels));
        }
        case Measure::aol: {
            const auto& id = pool.id_set.at(predictions.model_id());
            return aol_score(id.predictions, id.labels);
        }
        case Measure::disagreement: return disagreement(predictions, *pool.reference_predictions);
        case Measure::certainty: return certainty(class_correlation(predictions));
        case Measure::diversity: return diversity(class_correlation(predictions), *reference);
    }
    return 0.0;
}

std::map<std::string, double> transformed(const std::map<std::string, double>& values, bool apply_probit) {
    if (!apply_probit) return values;
    std::map<std::string, double> out;
    for (const auto& [id, v] : values) out.emplace(id, probit(v));
    return out;
}

std::vector<double> values_of(const std::map<std::string, double>& m) {
    std::vector<double> out;
    out.reserve(m.size());
    for (const auto& [_, v] : m) out.push_back(v);
    return out;
}

PredictionMatrix select_rows(const PredictionMatrix& p, std::span<const std::size_t> rows) {
    std::vector<double> values;
    values.reserve(rows.size() * p.cols());
    for (std::size_t r : rows) {
        const auto row = p.row(r);
        values.insert(values.end(), row.begin(), row.end());
    }
    return validate_prediction_matrix(std::move(values), rows.size(), p.cols(), p.model_id());
}

void require_labels(const LoadedPool& pool, const char* what) {
    if (!pool.labels) throw Error(ErrorCode::MissingSideInput, std::string(what) + " needs labels in the manifest");
}

void require_models(const LoadedPool& pool, const char* what) {
    if (pool.models.size() < 2) {
        throw Error(ErrorCode::DegenerateShape, std::string(what) + " needs at least 2 models");
    }
}

double spearman_of(const LoadedPool& pool, Measure measure, GroundTruth metric) {
    return spearman(PairedSeries(values_of(score_pool(pool, measure)), values_of(generalization(pool, metric))));
}

void write_output(const fs::path& path, const std::string& text) {
    if (!path.empty()) write_file(path, text);
}

}  // namespace

std::optional<GroundTruth> parse_ground_truth(std::string_view name) {
    if (name == "accuracy") return GroundTruth::accuracy;
    if (name == "macro_f1") return GroundTruth::macro_f1;
    return std::nullopt;
}

std::string_view ground_truth_name(GroundTruth metric) {
    return metric == GroundTruth::accuracy ? "accuracy" : "macro_f1";
}

bool has_side_inputs(const LoadedPool& pool, Measure measure) {
    try {
        require_side_inputs(pool, measure);
        return true;
    } catch (const Error&) {
        return false;
    }
}

void require_side_inputs(const LoadedPool& pool, Measure measure) {
    switch (measure) {
        case Measure::atc_mc:
        case Measure::aol:
            for (const auto& model : pool.models) {
                if (!pool.id_set.contains(model.model_id())) {
                    missing(measure, "an id_set entry for model \"" + model.model_id() + "\"");
                }
            }
            break;
        case Measure::softmaxcorr:
        case Measure::diversity:
            if (!pool.class_distribution && !pool.reference_predictions) {
                missing(measure, "reference (path or class_distribution)");
            }
            break;
        case Measure::disagreement:
            if (!pool.reference_predictions) missing(measure, "reference.path (reference model predictions)");
            if (pool.reference_predictions->rows() != pool.num_samples()) {
                throw Error(ErrorCode::DimensionMismatch, "disagreement needs reference predictions on the same " +
                                                              std::to_string(pool.num_samples()) + " samples");
            }
            break;
        default:
            break;
    }
}

bool is_probability_measure(Measure measure) { return measure != Measure::aol && measure != Measure::diversity; }

std::map<std::string, double> score_pool(const LoadedPool& pool, Measure measure) {
    require_side_inputs(pool, measure);
    std::optional<ReferenceMatrix> reference;
    if (measure == Measure::softmaxcorr || measure == Measure::diversity) reference = pool_reference(pool);
    std::map<std::string, double> scores;
    for (const auto& predictions : pool.models) {
        scores.emplace(predictions.model_id(), score_model(pool, measure, predictions, reference));
    }
    return scores;
}

std::map<std::string, double> generalization(const LoadedPool& pool, GroundTruth metric) {
    require_labels(pool, "ground-truth generalization");
    std::map<std::string, double> out;
    for (const auto& predictions : pool.models) {
        out.emplace(predictions.model_id(), metric == GroundTruth::accuracy ? accuracy(predictions, *pool.labels)
                                                                            : macro_f1(predictions, *pool.labels));
    }
    return out;
}

std::vector<Measure> select_measures(const LoadedPool& pool, const std::vector<Measure>& requested) {
    if (requested.empty()) {
        std::vector<Measure> out;
        for (Measure m : kAllMeasures) {
            if (has_side_inputs(pool, m)) out.push_back(m);
        }
        return out;
    }
    for (Measure m : requested) require_side_inputs(pool, m);
    return requested;
}

std::vector<CorrelationReport> rank_pool(const LoadedPool& pool, const std::vector<Measure>& measures,
                                         bool probit_scores) {
    std::vector<CorrelationReport> reports;
    for (Measure m : measures) {
        CorrelationReport report;
        report.measure = m;
        report.scores = transformed(score_pool(pool, m), probit_scores && is_probability_measure(m));
        report.ranking = rank_by_score(report.scores);
        reports.push_back(std::move(report));
    }
    return reports;
}

std::vector<CorrelationReport> correlate_pool(const LoadedPool& pool, const std::vector<Measure>& measures,
                                              GroundTruth metric, bool probit_scores) {
    require_labels(pool, "correlate");
    require_models(pool, "correlate");
    for (Measure m : measures) require_side_inputs(pool, m);
    const auto truth = transformed(generalization(pool, metric), probit_scores);

    std::vector<CorrelationReport> reports;
    for (Measure m : measures) {
        CorrelationReport report;
        report.measure = m;
        report.generalization = truth;
        try {
            report.scores = transformed(score_pool(pool, m), probit_scores && is_probability_measure(m));
            report.ranking = rank_by_score(report.scores);
            const PairedSeries series(values_of(report.scores), values_of(truth));
            report.spearman = spearman(series);
            report.weighted_kendall = weighted_kendall(series);
            report.pearson = pearson(series);
            const RobustFit fit = huber_fit(series);
            report.fit = LinearFit{fit.slope, fit.intercept};
        } catch (const Error& e) {
            report.spearman.reset();
            report.weighted_kendall.reset();
            report.pearson.reset();
            report.fit.reset();
            report.error = e.what();
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

LoadedPool subsample_pool(const LoadedPool& pool, std::span<const std::size_t> rows) {
    LoadedPool out;
    for (const auto& p : pool.models) out.models.push_back(select_rows(p, rows));
    if (pool.reference_predictions) {
        out.reference_predictions = pool.reference_predictions->rows() == pool.num_samples()
                                        ? select_rows(*pool.reference_predictions, rows)
                                        : *pool.reference_predictions;
    }
    out.class_distribution = pool.class_distribution;
    if (pool.labels) {
        LabelVector labels;
        labels.labels.reserve(rows.size());
        for (std::size_t r : rows) labels.labels.push_back((*pool.labels)[r]);
        out.labels = std::move(labels);
    }
    out.id_set = pool.id_set;
    return out;
}

SensitivityTable sensitivity_study(const LoadedPool& pool, const SensitivityRequest& request) {
    require_labels(pool, "sensitivity");
    require_models(pool, "sensitivity");
    require_side_inputs(pool, request.measure);
    if (request.fractions.empty()) throw Error(ErrorCode::SchemaError, "sensitivity needs at least one fraction");
    if (request.runs < 1) throw Error(ErrorCode::SchemaError, "sensitivity needs runs >= 1");
    const std::size_t n = pool.num_samples();
    for (std::size_t i = 0; i < request.fractions.size(); ++i) {
        const double f = request.fractions[i];
        if (!(f > 0.0 && f <= 1.0)) {
            throw Error(ErrorCode::SchemaError, "fraction " + std::to_string(f) + " is outside (0, 1]");
        }
        if (i > 0 && !(f > request.fractions[i - 1])) {
            throw Error(ErrorCode::SchemaError, "fractions must be strictly ascending");
        }
        if (std::llround(f * static_cast<double>(n)) < 2) {
            throw Error(ErrorCode::SubsampleTooSmall,
                        "fraction " + std::to_string(f) + " of " + std::to_string(n) + " samples leaves fewer than 2");
        }
    }

    SensitivityTable table;
    table.measure = request.measure;
    table.metric = request.metric;
    table.seed = request.seed;
    table.runs = request.runs;
    std::vector<std::size_t> indices(n);
    for (double f : request.fractions) {
        SensitivityRow row;
        row.fraction = f;
        row.samples = static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
        if (row.samples == n) {
            // The full test set: every run is the unsampled study.
            row.spearman_runs.assign(request.runs, spearman_of(pool, request.measure, request.metric));
        } else {
            for (std::size_t run = 0; run < request.runs; ++run) {
                Rng rng(mix_seed(mix_seed(request.seed) ^ mix_seed(std::bit_cast<std::uint64_t>(f)) ^ run));
                std::iota(indices.begin(), indices.end(), 0);
                // Partial Fisher-Yates: the first `samples` slots become a uniform draw without replacement.
                for (std::size_t i = 0; i < row.samples; ++i) {
                    std::swap(indices[i], indices[i + rng.index(n - i)]);
                }
                std::vector<std::size_t> rows(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(row.samples));
                std::sort(rows.begin(), rows.end());
                row.spearman_runs.push_back(spearman_of(subsample_pool(pool, rows), request.measure, request.metric));
            }
        }
        row.mean_spearman = std::accumulate(row.spearman_runs.begin(), row.spearman_runs.end(), 0.0) /
                            static_cast<double>(row.spearman_runs.size());
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::vector<CorrelationReport> cmd_rank(const RankRequest& request) {
    const LoadedPool pool = load_pool(load_manifest(request.manifest_path));
    const auto reports = rank_pool(pool, select_measures(pool, request.measures), request.probit_scores);
    write_output(request.output_path, request.output_format == OutputFormat::json ? reports_to_json(reports)
                                                                                  : reports_to_csv(reports));
    return reports;
}

std::vector<CorrelationReport> cmd_correlate(const RankRequest& request) {
    const LoadedPool pool = load_pool(load_manifest(request.manifest_path));
    const auto reports =
        correlate_pool(pool, select_measures(pool, request.measures), request.metric, request.probit_scores);
    write_output(request.output_path, request.output_format == OutputFormat::json ? reports_to_json(reports)
                                                                                  : reports_to_csv(reports));
    return reports;
}

SensitivityTable cmd_sensitivity(const SensitivityRequest& request) {
    const LoadedPool pool = load_pool(load_manifest(request.manifest_path));
    const SensitivityTable table = sensitivity_study(pool, request);
    write_output(request.output_path, request.output_format == OutputFormat::json ? sensitivity_to_json(table)
                                                                                  : sensitivity_to_csv(table));
    return table;
}

fs::path cmd_synth(const SynthConfig& config, const fs::path& out_dir) {
    write_pool(generate_pool(config), out_dir);
    return fs::absolute(out_dir) / "manifest.json";
}

}  // namespace rankshift
