#include "lrpca/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lrpca/error.hpp"
#include "lrpca/text.hpp"

namespace lrpca {
namespace {

constexpr std::string_view kMagic = "LRPM";
constexpr std::size_t kHeaderBytes = 4 + 8 + 8;

std::uint64_t ToLittle(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffU) << (56 - 8 * i);
    return out;
  }
}

void PutU64(std::string& out, std::uint64_t v) {
  const std::uint64_t le = ToLittle(v);
  char buf[8];
  std::memcpy(buf, &le, 8);
  out.append(buf, 8);
}

std::uint64_t GetU64(const char* p) {
  std::uint64_t v = 0;
  std::memcpy(&v, p, 8);
  return ToLittle(v);
}

}  // namespace

MatrixFormat ParseMatrixFormat(std::string_view name) {
  if (name == "binary" || name == "bin") return MatrixFormat::kBinary;
  if (name == "csv") return MatrixFormat::kCsv;
  throw Error(ErrorCode::kInvalidInput,
              "unknown matrix format '" + std::string(name) + "'");
}

std::string EncodeMatrixBinary(const DenseMatrix& m) {
  std::string out;
  out.reserve(kHeaderBytes + 8 * static_cast<std::size_t>(m.size()));
  out.append(kMagic);
  PutU64(out, static_cast<std::uint64_t>(m.rows()));
  PutU64(out, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.size(); ++i) {
    PutU64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
  }
  return out;
}

DenseMatrix DecodeMatrixBinary(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes || bytes.substr(0, 4) != kMagic) {
    throw Error(ErrorCode::kFormatError, "missing LRPM header");
  }
  const std::uint64_t rows = GetU64(bytes.data() + 4);
  const std::uint64_t cols = GetU64(bytes.data() + 12);
  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  if (rows == 0 || cols == 0 || cols > payload / 8 ||
      rows > payload / 8 / cols || rows * cols * 8 != payload) {
    throw Error(ErrorCode::kFormatError,
                "payload size does not match the declared shape");
  }
  DenseMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  const char* p = bytes.data() + kHeaderBytes;
  for (Index i = 0; i < m.size(); ++i, p += 8) {
    m.data()[i] = std::bit_cast<double>(GetU64(p));
  }
  return m;
}

std::string EncodeMatrixCsv(const DenseMatrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out.push_back(',');
      out += FormatDouble(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

DenseMatrix DecodeMatrixCsv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  for (std::string_view line : SplitLines(text)) {
    if (Trim(line).empty()) continue;
    std::vector<double> row;
    for (std::string_view field : SplitFields(line, ',')) {
      row.push_back(ParseDouble(field));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::kParseError, "CSV rows have different lengths");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::kParseError, "empty CSV matrix");
  DenseMatrix m(static_cast<Index>(rows.size()),
                static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

DenseMatrix ReadMatrix(const std::filesystem::path& path, MatrixFormat format) {
  const std::string bytes = ReadFileBytes(path);
  return format == MatrixFormat::kBinary ? DecodeMatrixBinary(bytes)
                                         : DecodeMatrixCsv(bytes);
}

void WriteMatrix(const DenseMatrix& m, const std::filesystem::path& path,
                 MatrixFormat format) {
  WriteFileBytes(path, format == MatrixFormat::kBinary ? EncodeMatrixBinary(m)
                                                       : EncodeMatrixCsv(m));
}

}  // namespace lrpca
