#include "lrpca/frames.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "lrpca/error.hpp"
#include "lrpca/matrix_io.hpp"

namespace lrpca {
namespace {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::string_view bytes) : bytes_(bytes) {}

  long Number() {
    SkipBlanksAndComments();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() &&
           std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000) Fail("header value too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) Fail("malformed header");
    return value;
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t RasterOffset() {
    if (pos_ >= bytes_.size() ||
        !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      Fail("missing separator before raster");
    }
    return pos_ + 1;
  }

  [[noreturn]] static void Fail(const std::string& what) {
    throw Error(ErrorCode::kFormatError, "PGM: " + what);
  }

 private:
  void SkipBlanksAndComments() {
    while (pos_ < bytes_.size()) {
      const unsigned char c = static_cast<unsigned char>(bytes_[pos_]);
      if (std::isspace(c)) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

void FrameSequence::Validate() const {
  if (frames.empty()) {
    throw Error(ErrorCode::kInvalidInput, "frame sequence is empty");
  }
  for (const auto& f : frames) {
    if (f.rows() != height || f.cols() != width) {
      throw Error(ErrorCode::kInvalidInput,
                  "frames must share the sequence dimensions");
    }
  }
}

DenseMatrix FramesToMatrix(const FrameSequence& seq) {
  seq.Validate();
  const Index pixels = seq.width * seq.height;
  DenseMatrix m(pixels, static_cast<Index>(seq.frames.size()));
  for (std::size_t j = 0; j < seq.frames.size(); ++j) {
    m.col(static_cast<Index>(j)) =
        Eigen::Map<const Vector>(seq.frames[j].data(), pixels);
  }
  return m;
}

FrameSequence MatrixToFrames(const DenseMatrix& m, Index width, Index height) {
  if (width < 1 || height < 1 || m.rows() != width * height || m.cols() < 1) {
    throw Error(ErrorCode::kInvalidInput,
                "matrix rows must equal width * height");
  }
  FrameSequence seq;
  seq.width = width;
  seq.height = height;
  for (Index j = 0; j < m.cols(); ++j) {
    DenseMatrix frame(height, width);
    Eigen::Map<Vector>(frame.data(), width * height) = m.col(j);
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

DenseMatrix DecodePgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5") {
    PgmHeaderReader::Fail("only binary P5 files are supported");
  }
  PgmHeaderReader reader(bytes);
  const long width = reader.Number();
  const long height = reader.Number();
  const long maxval = reader.Number();
  if (width < 1 || height < 1) PgmHeaderReader::Fail("empty image");
  if (maxval < 1 || maxval > 255) {
    PgmHeaderReader::Fail("maxval " + std::to_string(maxval) +
                          " outside [1, 255]");
  }
  const std::size_t offset = reader.RasterOffset();
  const auto count = static_cast<std::size_t>(width) * height;
  if (bytes.size() - offset < count) PgmHeaderReader::Fail("truncated raster");

  DenseMatrix frame(height, width);
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = static_cast<unsigned char>(bytes[offset + i]);
    frame.data()[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return frame;
}

DenseMatrix ReadPgm(const std::filesystem::path& path) {
  return DecodePgm(ReadFileBytes(path));
}

std::string EncodePgm(const DenseMatrix& frame) {
  std::string out = "P5\n" + std::to_string(frame.cols()) + " " +
                    std::to_string(frame.rows()) + "\n255\n";
  for (Index i = 0; i < frame.size(); ++i) {
    const double v = std::clamp(frame.data()[i], 0.0, 1.0);
    out.push_back(static_cast<char>(
        static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  return out;
}

void WritePgm(const DenseMatrix& frame, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodePgm(frame));
}

FrameSequence ReadPgmSequence(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kInvalidInput,
                "not a directory: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });
  return ReadPgmSequence(files);
}

FrameSequence ReadPgmSequence(const std::vector<std::filesystem::path>& files) {
  if (files.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no PGM frames found");
  }
  FrameSequence seq;
  for (const auto& f : files) seq.frames.push_back(ReadPgm(f));
  seq.height = seq.frames.front().rows();
  seq.width = seq.frames.front().cols();
  seq.Validate();
  return seq;
}

}  // namespace lrpca
