#include "rankshift/npy.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <string_view>

#include "rankshift/error.hpp"

namespace rankshift::npy {
namespace {

constexpr char kMagic[] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPreambleSize = 10;  // magic(6) + version(2) + header_len(2)
constexpr std::size_t kAlignment = 64;

[[noreturn]] void parse_error(const std::string& msg) { throw Error(ErrorCode::ParseError, "npy: " + msg); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// Returns the raw text of the value stored under `key` in the header dict.
// Values are a quoted string, a bare word, or a parenthesized tuple.
std::string_view dict_value(std::string_view dict, std::string_view key) {
    std::string quoted = "'" + std::string(key) + "'";
    auto pos = dict.find(quoted);
    if (pos == std::string_view::npos) parse_error("header lacks key " + quoted);
    pos = dict.find(':', pos + quoted.size());
    if (pos == std::string_view::npos) parse_error("header key " + quoted + " has no value");
    std::string_view rest = trim(dict.substr(pos + 1));
    if (rest.empty()) parse_error("header key " + quoted + " has no value");
    std::size_t end = 0;
    if (rest.front() == '\'') {
        end = rest.find('\'', 1);
        if (end == std::string_view::npos) parse_error("unterminated string in header");
        return rest.substr(1, end - 1);
    }
    if (rest.front() == '(') {
        end = rest.find(')');
        if (end == std::string_view::npos) parse_error("unterminated tuple in header");
        return rest.substr(0, end + 1);
    }
    end = rest.find_first_of(",}");
    if (end == std::string_view::npos) parse_error("malformed header dict");
    return trim(rest.substr(0, end));
}

std::vector<std::size_t> parse_shape(std::string_view tuple) {
    std::vector<std::size_t> dims;
    std::string_view body = tuple.substr(1, tuple.size() - 2);
    while (!body.empty()) {
        auto comma = body.find(',');
        std::string_view item = trim(body.substr(0, comma));
        if (!item.empty()) {
            std::size_t dim = 0;
            auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), dim);
            if (ec != std::errc() || ptr != item.data() + item.size()) parse_error("bad shape entry");
            dims.push_back(dim);
        }
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
    }
    return dims;
}

template <typename T>
T load_le(const char* src) {
    T value;
    std::memcpy(&value, src, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        auto* bytes = reinterpret_cast<unsigned char*>(&value);
        std::reverse(bytes, bytes + sizeof(T));
    }
    return value;
}

template <typename T>
void store_le(T value, char* dst) {
    if constexpr (std::endian::native == std::endian::big) {
        auto* bytes = reinterpret_cast<unsigned char*>(&value);
        std::reverse(bytes, bytes + sizeof(T));
    }
    std::memcpy(dst, &value, sizeof(T));
}

}  // namespace

Array2D decode(std::span<const char> bytes) {
    if (bytes.size() < kPreambleSize || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
        parse_error("missing magic string");
    }
    if (bytes[6] != 1 || bytes[7] != 0) {
        parse_error("unsupported version " + std::to_string(int(bytes[6])) + "." + std::to_string(int(bytes[7])));
    }
    const std::size_t header_len = load_le<std::uint16_t>(bytes.data() + 8);
    if (bytes.size() < kPreambleSize + header_len) parse_error("truncated header");
    std::string_view header(bytes.data() + kPreambleSize, header_len);
    if (header.empty() || header.back() != '\n') parse_error("header not newline-terminated");
    header = trim(header.substr(0, header.size() - 1));
    if (header.size() < 2 || header.front() != '{' || header.back() != '}') parse_error("header is not a dict");

    Array2D out;
    const std::string_view descr = dict_value(header, "descr");
    std::size_t item_size = 0;
    if (descr == "<f8") {
        out.dtype = DType::f64;
        item_size = 8;
    } else if (descr == "<f4") {
        out.dtype = DType::f32;
        item_size = 4;
    } else {
        parse_error("unsupported dtype '" + std::string(descr) + "' (expected <f4 or <f8)");
    }

    const std::string_view fortran = dict_value(header, "fortran_order");
    if (fortran == "True") throw Error(ErrorCode::ShapeError, "npy: Fortran-ordered arrays are not supported");
    if (fortran != "False") parse_error("bad fortran_order value");

    const std::string_view shape_text = dict_value(header, "shape");
    if (shape_text.front() != '(') parse_error("shape is not a tuple");
    const auto dims = parse_shape(shape_text);
    if (dims.size() != 2) {
        throw Error(ErrorCode::ShapeError, "npy: expected a 2-D array, got " + std::to_string(dims.size()) + "-D");
    }
    out.rows = dims[0];
    out.cols = dims[1];

    const std::size_t count = out.rows * out.cols;
    const std::size_t payload = bytes.size() - kPreambleSize - header_len;
    if (payload != count * item_size) {
        parse_error("payload holds " + std::to_string(payload) + " bytes, expected " +
                    std::to_string(count * item_size));
    }
    const char* src = bytes.data() + kPreambleSize + header_len;
    out.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.values[i] = out.dtype == DType::f64 ? load_le<double>(src + i * 8)
                                                : static_cast<double>(load_le<float>(src + i * 4));
    }
    return out;
}

std::string header_text(std::size_t rows, std::size_t cols, DType dtype, bool fortran_order) {
    std::string dict = "{'descr': '";
    dict += dtype == DType::f64 ? "<f8" : "<f4";
    dict += "', 'fortran_order': ";
    dict += fortran_order ? "True" : "False";
    dict += ", 'shape': (" + std::to_string(rows) + ", " + std::to_string(cols) + "), }";
    const std::size_t unpadded = kPreambleSize + dict.size() + 1;
    const std::size_t padding = (kAlignment - unpadded % kAlignment) % kAlignment;
    dict.append(padding, ' ');
    dict += '\n';
    return dict;
}

std::vector<char> encode(std::size_t rows, std::size_t cols, std::span<const double> values, DType dtype) {
    const std::string header = header_text(rows, cols, dtype);
    const std::size_t item_size = dtype == DType::f64 ? 8 : 4;
    std::vector<char> out(kPreambleSize + header.size() + values.size() * item_size);
    std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
    out[6] = 1;
    out[7] = 0;
    store_le(static_cast<std::uint16_t>(header.size()), out.data() + 8);
    std::copy(header.begin(), header.end(), out.begin() + kPreambleSize);
    char* dst = out.data() + kPreambleSize + header.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (dtype == DType::f64) {
            store_le(values[i], dst + i * 8);
        } else {
            store_le(static_cast<float>(values[i]), dst + i * 4);
        }
    }
    return out;
}

}  // namespace rankshift::npy
