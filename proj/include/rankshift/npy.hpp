#pragma once

// Minimal NPY v1.0 codec for dense 2-D little-endian float arrays.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rankshift::npy {

enum class DType { f32, f64 };

struct Array2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    DType dtype = DType::f64;
    std::vector<double> values;  // row-major, widened to double
};

// Parses a complete .npy file image. Accepts version 1.0 only, descr '<f4'
// or '<f8', fortran_order False. Throws ParseError on malformed bytes and
// ShapeError when the array is not 2-D or is Fortran-ordered.
Array2D decode(std::span<const char> bytes);

// Serializes a row-major matrix as NPY v1.0 with the header padded so the
// payload starts on a 64-byte boundary.
std::vector<char> encode(std::size_t rows, std::size_t cols, std::span<const double> values,
                         DType dtype = DType::f64);

// Header text (dict literal, padding and trailing newline included) that
// encode() writes. Exposed for tests that build malformed files.
std::string header_text(std::size_t rows, std::size_t cols, DType dtype, bool fortran_order = false);

}  // namespace rankshift::npy
