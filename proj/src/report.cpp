#include <charconv>

#include "json.hpp"

#include "rankshift/pipeline.hpp"

namespace rankshift {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string num(double v) {
    char buf[32];
    auto [ptr, _] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

ordered_json score_map(const std::map<std::string, double>& m) {
    ordered_json out = ordered_json::object();
    for (const auto& [id, v] : m) out[id] = v;
    return out;
}

std::map<std::string, double> score_map_from(const nlohmann::json& j) {
    std::map<std::string, double> out;
    for (const auto& [id, v] : j.items()) out.emplace(id, v.get<double>());
    return out;
}

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

}  // namespace

std::string reports_to_json(const std::vector<CorrelationReport>& reports) {
    ordered_json out = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json j;
        j["measure"] = measure_name(r.measure);
        j["scores"] = score_map(r.scores);
        j["ranking"] = r.ranking;
        if (r.generalization) {
            j["generalization"] = score_map(*r.generalization);
            j["spearman"] = r.spearman ? ordered_json(*r.spearman) : ordered_json();
            j["weighted_kendall"] = r.weighted_kendall ? ordered_json(*r.weighted_kendall) : ordered_json();
            j["pearson"] = r.pearson ? ordered_json(*r.pearson) : ordered_json();
            j["fit"] = r.fit ? ordered_json{{"slope", r.fit->slope}, {"intercept", r.fit->intercept}} : ordered_json();
        }
        if (r.error) j["error"] = *r.error;
        out.push_back(std::move(j));
    }
    return out.dump(2) + "\n";
}

std::vector<CorrelationReport> reports_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
    }
    if (!doc.is_array()) throw Error(ErrorCode::SchemaError, "report must be a JSON array");
    std::vector<CorrelationReport> out;
    try {
        for (const auto& j : doc) {
            CorrelationReport r;
            const auto name = j.at("measure").get<std::string>();
            const auto measure = parse_measure(name);
            if (!measure) throw Error(ErrorCode::SchemaError, "report: unknown measure \"" + name + "\"");
            r.measure = *measure;
            r.scores = score_map_from(j.at("scores"));
            r.ranking = j.at("ranking").get<std::vector<std::string>>();
            if (j.contains("generalization")) r.generalization = score_map_from(j["generalization"]);
            r.spearman = opt_from(j, "spearman");
            r.weighted_kendall = opt_from(j, "weighted_kendall");
            r.pearson = opt_from(j, "pearson");
            if (j.contains("fit") && !j["fit"].is_null()) {
                r.fit = LinearFit{j["fit"].at("slope").get<double>(), j["fit"].at("intercept").get<double>()};
            }
            if (j.contains("error")) r.error = j["error"].get<std::string>();
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("report: ") + e.what());
    }
    return out;
}

std::string reports_to_csv(const std::vector<CorrelationReport>& reports) {
    std::string out = "measure,model_id,rank,score,generalization,spearman,weighted_kendall,pearson,slope,intercept,error\n";
    for (const auto& r : reports) {
        const std::string stats = opt_num(r.spearman) + "," + opt_num(r.weighted_kendall) + "," + opt_num(r.pearson) +
                                  "," + (r.fit ? num(r.fit->slope) + "," + num(r.fit->intercept) : std::string(",")) +
                                  "," + csv_quote(r.error.value_or(""));
        if (r.ranking.empty()) {
            out += std::string(measure_name(r.measure)) + ",,,,," + stats + "\n";
            continue;
        }
        for (std::size_t i = 0; i < r.ranking.size(); ++i) {
            const std::string& id = r.ranking[i];
            out += std::string(measure_name(r.measure)) + "," + csv_quote(id) + "," + std::to_string(i + 1) + "," +
                   num(r.scores.at(id)) + "," + (r.generalization ? num(r.generalization->at(id)) : std::string()) +
                   "," + stats + "\n";
        }
    }
    return out;
}

std::string sensitivity_to_json(const SensitivityTable& table) {
    ordered_json j;
    j["measure"] = measure_name(table.measure);
    j["metric"] = ground_truth_name(table.metric);
    j["seed"] = table.seed;
    j["runs"] = table.runs;
    ordered_json rows = ordered_json::array();
    for (const auto& row : table.rows) {
        rows.push_back({{"fraction", row.fraction},
                        {"samples", row.samples},
                        {"spearman_runs", row.spearman_runs},
                        {"mean_spearman", row.mean_spearman}});
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::string sensitivity_to_csv(const SensitivityTable& table) {
    std::string out = "measure,fraction,samples,run,spearman\n";
    for (const auto& row : table.rows) {
        for (std::size_t run = 0; run < row.spearman_runs.size(); ++run) {
            out += std::string(measure_name(table.measure)) + "," + num(row.fraction) + "," +
                   std::to_string(row.samples) + "," + std::to_string(run) + "," + num(row.spearman_runs[run]) + "\n";
        }
        out += std::string(measure_name(table.measure)) + "," + num(row.fraction) + "," + std::to_string(row.samples) +
               ",mean," + num(row.mean_spearman) + "\n";
    }
    return out;
}

}  // namespace rankshift
