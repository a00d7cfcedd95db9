#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lrpca/matrix.hpp"

namespace lrpca {

enum class MatrixFormat {
  // "LRPM", little-endian u64 rows, u64 cols, then rows*cols little-endian
  // f64 values in row-major order.
  kBinary,
  // Decimal values, comma separated, one matrix row per line.
  kCsv,
};

MatrixFormat ParseMatrixFormat(std::string_view name);

// Binary: throws kFormatError on a bad magic or truncated payload.
// CSV: throws kParseError on a non-numeric field or ragged rows.
DenseMatrix ReadMatrix(const std::filesystem::path& path, MatrixFormat format);
void WriteMatrix(const DenseMatrix& m, const std::filesystem::path& path,
                 MatrixFormat format);

std::string EncodeMatrixBinary(const DenseMatrix& m);
DenseMatrix DecodeMatrixBinary(std::string_view bytes);
std::string EncodeMatrixCsv(const DenseMatrix& m);
DenseMatrix DecodeMatrixCsv(std::string_view text);

std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace lrpca
