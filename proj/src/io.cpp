#include "rankshift/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rankshift/npy.hpp"

namespace rankshift {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Splits LF-terminated text into lines. A single trailing newline is
// optional; CR anywhere is rejected.
std::vector<std::string_view> split_lines(std::string_view text, const char* what) {
    if (text.find('\r') != std::string_view::npos) {
        throw Error(ErrorCode::ParseError, std::string(what) + ": CR line endings are not accepted");
    }
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        lines.push_back(text.substr(0, nl));
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return lines;
}

double parse_double(std::string_view field, std::size_t line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line + 1) + ": cannot parse \"" + std::string(field) + "\" as a number");
    }
    return value;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base_dir / path).lexically_normal();
}

void require_file(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, path.string());
}

[[noreturn]] void schema_error(const std::string& msg) { throw Error(ErrorCode::SchemaError, "manifest: " + msg); }

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) schema_error(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            schema_error("unknown key \"" + key + "\" in " + where);
        }
    }
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj.at(key).is_string()) schema_error(where + " needs string \"" + key + "\"");
    return obj.at(key).get<std::string>();
}

PredictionSource get_source(const json& obj, const fs::path& base_dir, const std::string& where) {
    PredictionSource src;
    src.path = resolve(base_dir, get_string(obj, "path", where));
    src.format = obj.contains("format") ? parse_file_format(get_string(obj, "format", where))
                                        : FileFormat::binary_array_v1;
    require_file(src.path);
    return src;
}

std::vector<double> get_distribution(const json& value) {
    if (!value.is_array()) schema_error("class_distribution must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : value) {
        if (!v.is_number()) schema_error("class_distribution must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::string relative_to(const fs::path& path, const fs::path& dir) {
    const fs::path rel = path.lexically_relative(dir);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return path.generic_string();
}

}  // namespace

std::string read_file(const fs::path& path) {
    require_file(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file(const fs::path& path, std::span<const char> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

PredictionMatrix parse_npy_matrix(std::span<const char> bytes, std::string model_id) {
    npy::Array2D array = npy::decode(bytes);
    return validate_prediction_matrix(std::move(array.values), array.rows, array.cols, std::move(model_id));
}

PredictionMatrix parse_text_matrix(std::string_view text, std::string model_id) {
    auto lines = split_lines(text, "text matrix");
    std::vector<double> values;
    std::size_t cols = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        if (line.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(i + 1) + " is empty");
        std::size_t fields = 0;
        while (true) {
            const auto comma = line.find(',');
            values.push_back(parse_double(line.substr(0, comma), i));
            ++fields;
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (i == 0) {
            cols = fields;
        } else if (fields != cols) {
            throw Error(ErrorCode::ShapeError, "line " + std::to_string(i + 1) + " has " + std::to_string(fields) +
                                                   " fields, expected " + std::to_string(cols));
        }
    }
    return validate_prediction_matrix(std::move(values), lines.size(), cols, std::move(model_id));
}

PredictionMatrix load_prediction_matrix(const fs::path& path, FileFormat format, std::string model_id) {
    const std::string bytes = read_file(path);
    try {
        return format == FileFormat::binary_array_v1 ? parse_npy_matrix(bytes, std::move(model_id))
                                                     : parse_text_matrix(bytes, std::move(model_id));
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::string format_text_matrix(const PredictionMatrix& predictions) {
    std::string out;
    for (std::size_t i = 0; i < predictions.rows(); ++i) {
        const auto row = predictions.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += format_double(row[j]);
        }
        out += '\n';
    }
    return out;
}

void write_prediction_matrix(const PredictionMatrix& predictions, const fs::path& path, FileFormat format) {
    if (format == FileFormat::binary_array_v1) {
        write_file(path, npy::encode(predictions.rows(), predictions.cols(), predictions.data()));
    } else {
        write_file(path, format_text_matrix(predictions));
    }
}

LabelVector parse_labels(std::string_view text) {
    auto lines = split_lines(text, "labels");
    if (lines.empty()) throw Error(ErrorCode::DegenerateShape, "label file is empty");
    LabelVector out;
    out.labels.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = lines[i];
        long long value = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
        if (line.empty() || ec != std::errc() || ptr != line.data() + line.size()) {
            throw Error(ErrorCode::ParseError,
                        "labels line " + std::to_string(i + 1) + ": \"" + std::string(line) + "\" is not an integer");
        }
        if (value < 0) {
            throw Error(ErrorCode::NegativeLabel, "labels line " + std::to_string(i + 1) + " is negative");
        }
        out.labels.push_back(static_cast<std::size_t>(value));
    }
    return out;
}

LabelVector load_labels(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return parse_labels(text);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_labels(const LabelVector& labels, const fs::path& path) {
    std::string out;
    for (std::size_t label : labels.labels) {
        out += std::to_string(label);
        out += '\n';
    }
    write_file(path, out);
}

PoolManifest parse_manifest(std::string_view json_text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("manifest is not valid JSON: ") + e.what());
    }
    check_keys(doc, {"models", "reference", "labels", "id_set", "class_subset", "class_distribution"}, "manifest");

    PoolManifest manifest;
    if (!doc.contains("models") || !doc["models"].is_array() || doc["models"].empty()) {
        schema_error("\"models\" must be a non-empty array");
    }
    std::set<std::string> ids;
    for (const auto& entry : doc["models"]) {
        check_keys(entry, {"id", "path", "format"}, "models entry");
        ModelEntry model;
        model.id = get_string(entry, "id", "models entry");
        if (!ids.insert(model.id).second) throw Error(ErrorCode::DuplicateModelId, model.id);
        model.source = get_source(entry, base_dir, "models entry \"" + model.id + "\"");
        manifest.models.push_back(std::move(model));
    }

    if (doc.contains("reference")) {
        const json& ref = doc["reference"];
        check_keys(ref, {"path", "format", "class_distribution"}, "reference");
        const bool has_path = ref.contains("path");
        const bool has_dist = ref.contains("class_distribution") || doc.contains("class_distribution");
        if (has_path == has_dist) {
            schema_error("reference needs exactly one of \"path\" and \"class_distribution\"");
        }
        if (has_path) {
            manifest.reference = get_source(ref, base_dir, "reference");
        } else {
            if (ref.contains("class_distribution") && doc.contains("class_distribution")) {
                schema_error("class_distribution given twice");
            }
            manifest.reference = get_distribution(ref.contains("class_distribution") ? ref["class_distribution"]
                                                                                     : doc["class_distribution"]);
        }
    } else if (doc.contains("class_distribution")) {
        manifest.reference = get_distribution(doc["class_distribution"]);
    }

    if (doc.contains("labels")) {
        if (!doc["labels"].is_string()) schema_error("\"labels\" must be a path string");
        manifest.labels_path = resolve(base_dir, doc["labels"].get<std::string>());
        require_file(*manifest.labels_path);
    }

    if (doc.contains("id_set")) {
        if (!doc["id_set"].is_array()) schema_error("\"id_set\" must be an array");
        std::set<std::string> id_ids;
        for (const auto& entry : doc["id_set"]) {
            check_keys(entry, {"id", "path", "format", "labels"}, "id_set entry");
            IdSetEntry item;
            item.id = get_string(entry, "id", "id_set entry");
            if (!ids.contains(item.id)) schema_error("id_set entry \"" + item.id + "\" names no model");
            if (!id_ids.insert(item.id).second) throw Error(ErrorCode::DuplicateModelId, "id_set: " + item.id);
            item.source = get_source(entry, base_dir, "id_set entry \"" + item.id + "\"");
            item.labels_path = resolve(base_dir, get_string(entry, "labels", "id_set entry \"" + item.id + "\""));
            require_file(item.labels_path);
            manifest.id_set.push_back(std::move(item));
        }
    }

    if (doc.contains("class_subset")) {
        const json& subset = doc["class_subset"];
        if (!subset.is_array()) schema_error("\"class_subset\" must be an array of non-negative integers");
        std::vector<std::size_t> indices;
        for (const auto& v : subset) {
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                schema_error("\"class_subset\" must be an array of non-negative integers");
            }
            indices.push_back(v.get<std::size_t>());
        }
        if (indices.empty()) throw Error(ErrorCode::EmptySubset, "manifest class_subset is empty");
        manifest.class_subset = std::move(indices);
    }
    return manifest;
}

PoolManifest load_manifest(const fs::path& path) {
    const std::string text = read_file(path);
    return parse_manifest(text, fs::absolute(path).parent_path());
}

void write_manifest(const PoolManifest& manifest, const fs::path& path) {
    const fs::path dir = fs::absolute(path).parent_path();
    json doc;
    doc["models"] = json::array();
    for (const auto& model : manifest.models) {
        doc["models"].push_back({{"id", model.id},
                                 {"path", relative_to(model.source.path, dir)},
                                 {"format", file_format_name(model.source.format)}});
    }
    if (manifest.reference) {
        if (const auto* src = std::get_if<PredictionSource>(&*manifest.reference)) {
            doc["reference"] = {{"path", relative_to(src->path, dir)}, {"format", file_format_name(src->format)}};
        } else {
            doc["reference"] = {{"class_distribution", std::get<std::vector<double>>(*manifest.reference)}};
        }
    }
    if (manifest.labels_path) doc["labels"] = relative_to(*manifest.labels_path, dir);
    if (!manifest.id_set.empty()) {
        doc["id_set"] = json::array();
        for (const auto& item : manifest.id_set) {
            doc["id_set"].push_back({{"id", item.id},
                                     {"path", relative_to(item.source.path, dir)},
                                     {"format", file_format_name(item.source.format)},
                                     {"labels", relative_to(item.labels_path, dir)}});
        }
    }
    if (manifest.class_subset) doc["class_subset"] = *manifest.class_subset;
    write_file(path, doc.dump(2) + "\n");
}

PredictionMatrix restrict_to_subset(const PredictionMatrix& predictions, std::span<const std::size_t> subset) {
    if (subset.empty()) throw Error(ErrorCode::EmptySubset, "class subset is empty");
    std::set<std::size_t> seen;
    for (std::size_t c : subset) {
        if (c >= predictions.cols()) {
            throw Error(ErrorCode::DimensionMismatch,
                        "subset index " + std::to_string(c) + " is not below K=" + std::to_string(predictions.cols()));
        }
        if (!seen.insert(c).second) {
            throw Error(ErrorCode::InvariantViolation, "subset index " + std::to_string(c) + " repeated");
        }
    }
    std::vector<double> values;
    values.reserve(predictions.rows() * subset.size());
    for (std::size_t i = 0; i < predictions.rows(); ++i) {
        const auto row = predictions.row(i);
        double mass = 0.0;
        for (std::size_t c : subset) mass += row[c];
        if (mass <= 0.0) {
            throw Error(ErrorCode::ZeroRowMass, "row " + std::to_string(i) + " has no probability on the subset");
        }
        for (std::size_t c : subset) values.push_back(row[c] / mass);
    }
    return validate_prediction_matrix(std::move(values), predictions.rows(), subset.size(), predictions.model_id());
}

LoadedPool load_pool(const PoolManifest& manifest) {
    if (manifest.models.empty()) throw Error(ErrorCode::SchemaError, "manifest lists no models");
    const auto* subset = manifest.class_subset ? &*manifest.class_subset : nullptr;
    auto restrict = [&](PredictionMatrix p) { return subset ? restrict_to_subset(p, *subset) : p; };

    std::map<std::size_t, std::size_t> remap;  // original class -> subset position
    if (subset) {
        for (std::size_t pos = 0; pos < subset->size(); ++pos) remap[(*subset)[pos]] = pos;
    }

    LoadedPool pool;
    for (const auto& model : manifest.models) {
        pool.models.push_back(
            restrict(load_prediction_matrix(model.source.path, model.source.format, model.id)));
        const auto& first = pool.models.front();
        const auto& last = pool.models.back();
        if (last.rows() != first.rows() || last.cols() != first.cols()) {
            throw Error(ErrorCode::DimensionMismatch,
                        "model " + model.id + " is " + std::to_string(last.rows()) + "x" +
                            std::to_string(last.cols()) + " but " + first.model_id() + " is " +
                            std::to_string(first.rows()) + "x" + std::to_string(first.cols()));
        }
    }
    const std::size_t k = pool.num_classes();

    if (manifest.reference) {
        if (const auto* src = std::get_if<PredictionSource>(&*manifest.reference)) {
            pool.reference_predictions = restrict(load_prediction_matrix(src->path, src->format, "reference"));
            if (pool.reference_predictions->cols() != k) {
                throw Error(ErrorCode::DimensionMismatch, "reference model has K=" +
                                                              std::to_string(pool.reference_predictions->cols()) +
                                                              ", pool has K=" + std::to_string(k));
            }
        } else {
            pool.class_distribution = std::get<std::vector<double>>(*manifest.reference);
            if (pool.class_distribution->size() != k) {
                throw Error(ErrorCode::DimensionMismatch, "class_distribution has " +
                                                              std::to_string(pool.class_distribution->size()) +
                                                              " entries, pool has K=" + std::to_string(k));
            }
        }
    }

    if (manifest.labels_path) {
        LabelVector labels = load_labels(*manifest.labels_path);
        if (subset) {
            for (auto& label : labels.labels) {
                auto it = remap.find(label);
                if (it == remap.end()) {
                    throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(label) + " is not in class_subset");
                }
                label = it->second;
            }
        }
        check_labels(labels, pool.models.front());
        pool.labels = std::move(labels);
    }

    for (const auto& item : manifest.id_set) {
        PredictionMatrix predictions = load_prediction_matrix(item.source.path, item.source.format, item.id);
        LabelVector labels = load_labels(item.labels_path);
        if (subset) {
            check_labels(labels, predictions);
            std::vector<double> kept;
            LabelVector kept_labels;
            for (std::size_t i = 0; i < predictions.rows(); ++i) {
                auto it = remap.find(labels[i]);
                if (it == remap.end()) continue;
                const auto row = predictions.row(i);
                kept.insert(kept.end(), row.begin(), row.end());
                kept_labels.labels.push_back(it->second);
            }
            if (kept_labels.size() == 0) {
                throw Error(ErrorCode::DegenerateShape, "id_set " + item.id + " has no samples in class_subset");
            }
            predictions = restrict_to_subset(
                validate_prediction_matrix(std::move(kept), kept_labels.size(), predictions.cols(), item.id), *subset);
            labels = std::move(kept_labels);
        }
        if (predictions.cols() != k) {
            throw Error(ErrorCode::DimensionMismatch, "id_set " + item.id + " has K=" +
                                                          std::to_string(predictions.cols()) + ", pool has K=" +
                                                          std::to_string(k));
        }
        check_labels(labels, predictions);
        pool.id_set.emplace(item.id, IdSetData{std::move(predictions), std::move(labels)});
    }
    return pool;
}

}  // namespace rankshift
