// rankshift: rank classifiers by label-free generalization measures.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rankshift/pipeline.hpp"

using namespace rankshift;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        out.push_back(text.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_real(const std::string& s, const std::string& flag) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw Error(ErrorCode::SchemaError, flag + ": \"" + s + "\" is not a number");
    }
    return v;
}

std::vector<double> parse_reals(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_real(item, flag));
    return out;
}

Range parse_range(const std::string& text, const std::string& flag) {
    const auto v = parse_reals(text, flag);
    if (v.size() != 2) throw Error(ErrorCode::SchemaError, flag + " expects lo,hi");
    return {v[0], v[1]};
}

Measure parse_one_measure(const std::string& name) {
    const auto m = parse_measure(name);
    if (!m) throw Error(ErrorCode::SchemaError, "unknown measure \"" + name + "\"");
    return *m;
}

std::vector<Measure> parse_measures(const std::string& text) {
    if (text == "all") return {};
    std::vector<Measure> out;
    for (const auto& name : split_list(text)) {
        const Measure m = parse_one_measure(name);
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    return out;
}

OutputFormat parse_format(const std::string& text) {
    return text == "csv" ? OutputFormat::csv : OutputFormat::json;
}

void add_report_options(CLI::App* cmd, std::string& manifest, std::string& measures, bool& probit, std::string& out,
                        std::string& format) {
    cmd->add_option("--manifest", manifest, "Pool manifest (JSON)")->required();
    cmd->add_option("--measures", measures, "all or a comma-separated list of measures")->default_val("all");
    cmd->add_flag("--probit", probit, "Probit-scale bounded scores (and ground truth in correlate)");
    cmd->add_option("--out", out, "Report path (stdout when omitted)");
    cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}))->default_val("json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rank classifiers by out-of-distribution generalization from Softmax predictions"};
    app.require_subcommand(1);

    std::string manifest, measures = "all", out, format = "json", metric = "accuracy";
    bool probit_flag = false;

    auto* rank = app.add_subcommand("rank", "Score and rank every model of a pool");
    add_report_options(rank, manifest, measures, probit_flag, out, format);

    auto* correlate = app.add_subcommand("correlate", "Correlate measure scores with labeled generalization");
    add_report_options(correlate, manifest, measures, probit_flag, out, format);
    correlate->add_option("--metric", metric, "Ground truth")
        ->check(CLI::IsMember({"accuracy", "macro_f1"}))
        ->default_val("accuracy");

    std::string measure = "softmaxcorr", fractions = "0.01,0.05,0.1,0.3,1.0";
    std::size_t runs = 3;
    std::uint64_t seed = 0;
    auto* sensitivity = app.add_subcommand("sensitivity", "Spearman correlation on random test-set subsamples");
    sensitivity->add_option("--manifest", manifest, "Pool manifest (JSON)")->required();
    sensitivity->add_option("--measure", measure, "Measure")->default_val("softmaxcorr");
    sensitivity->add_option("--fractions", fractions, "Ascending comma-separated fractions in (0, 1]")
        ->default_val("0.01,0.05,0.1,0.3,1.0");
    sensitivity->add_option("--runs", runs, "Random runs per fraction")->default_val(3);
    sensitivity->add_option("--seed", seed, "Subsampling seed")->default_val(0);
    sensitivity->add_option("--metric", metric, "Ground truth")
        ->check(CLI::IsMember({"accuracy", "macro_f1"}))
        ->default_val("accuracy");
    sensitivity->add_option("--out", out, "Table path (stdout when omitted)");
    sensitivity->add_option("--format", format, "Table format")->check(CLI::IsMember({"json", "csv"}))->default_val("json");

    SynthConfig cfg;
    std::string acc_range, temp_range, class_distribution, out_dir;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic pool with known accuracies");
    synth->add_option("--models", cfg.n_models, "Number of models")->default_val(cfg.n_models);
    synth->add_option("--classes", cfg.n_classes, "Number of classes")->default_val(cfg.n_classes);
    synth->add_option("--samples", cfg.n_samples, "Test samples")->default_val(cfg.n_samples);
    synth->add_option("--seed", cfg.seed, "Generator seed")->default_val(cfg.seed);
    synth->add_option("--out-dir", out_dir, "Output directory")->required();
    synth->add_option("--acc-range", acc_range, "Target accuracy range lo,hi");
    synth->add_option("--temp-range", temp_range, "Softmax temperature range lo,hi");
    synth->add_option("--bias", cfg.bias_strength, "Class-bias strength (0 = unbiased)")->default_val(cfg.bias_strength);
    synth->add_option("--class-distribution", class_distribution, "Comma-separated true class marginal");
    synth->add_option("--id-samples", cfg.id_samples, "Labeled ID samples per model (0 = none)")
        ->default_val(cfg.id_samples);
    synth->add_flag("--reference-best", cfg.reference_best, "Use the most accurate model as reference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (rank->parsed() || correlate->parsed()) {
            RankRequest req;
            req.manifest_path = manifest;
            req.measures = parse_measures(measures);
            req.probit_scores = probit_flag;
            req.output_path = out;
            req.output_format = parse_format(format);
            req.metric = *parse_ground_truth(metric);
            const auto reports = rank->parsed() ? cmd_rank(req) : cmd_correlate(req);
            if (out.empty()) {
                std::cout << (req.output_format == OutputFormat::json ? reports_to_json(reports)
                                                                      : reports_to_csv(reports));
            }
        } else if (sensitivity->parsed()) {
            SensitivityRequest req;
            req.manifest_path = manifest;
            req.measure = parse_one_measure(measure);
            req.fractions = parse_reals(fractions, "--fractions");
            req.runs = runs;
            req.seed = seed;
            req.output_path = out;
            req.output_format = parse_format(format);
            req.metric = *parse_ground_truth(metric);
            const auto table = cmd_sensitivity(req);
            if (out.empty()) {
                std::cout << (req.output_format == OutputFormat::json ? sensitivity_to_json(table)
                                                                      : sensitivity_to_csv(table));
            }
        } else if (synth->parsed()) {
            if (!acc_range.empty()) cfg.accuracy_range = parse_range(acc_range, "--acc-range");
            if (!temp_range.empty()) cfg.temperature_range = parse_range(temp_range, "--temp-range");
            if (!class_distribution.empty()) cfg.class_distribution = parse_reals(class_distribution, "--class-distribution");
            std::cout << cmd_synth(cfg, out_dir).string() << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "rankshift: " << e.what() << "\n";
        return exit_status(e.code());
    } catch (const std::exception& e) {
        std::cerr << "rankshift: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
