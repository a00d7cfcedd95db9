#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lrpca/matrix.hpp"

namespace lrpca {

// Grayscale frames with intensities normalized to [0, 1]; each frame is a
// height x width matrix.
struct FrameSequence {
  Index width = 0;
  Index height = 0;
  std::vector<DenseMatrix> frames;

  // Throws kInvalidInput for an empty sequence or mismatched frame sizes.
  void Validate() const;
};

// Pixels x frames matrix; column j is frame j flattened row by row.
DenseMatrix FramesToMatrix(const FrameSequence& seq);
FrameSequence MatrixToFrames(const DenseMatrix& m, Index width, Index height);

// Binary PGM ("P5") with maxval <= 255; values are divided by maxval.
// Throws kFormatError for other magics, maxval outside [1, 255] or a
// truncated payload.
DenseMatrix DecodePgm(std::string_view bytes);
DenseMatrix ReadPgm(const std::filesystem::path& path);

// Clamps to [0, 1] and quantizes to 0..255.
std::string EncodePgm(const DenseMatrix& frame);
void WritePgm(const DenseMatrix& frame, const std::filesystem::path& path);

// All *.pgm files of a directory in lexicographic filename order, or the
// given files in the given order. Throws kInvalidInput when nothing is found
// or frame sizes disagree.
FrameSequence ReadPgmSequence(const std::filesystem::path& dir);
FrameSequence ReadPgmSequence(const std::vector<std::filesystem::path>& files);

}  // namespace lrpca
