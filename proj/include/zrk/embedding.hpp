#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zrk/common.hpp"

namespace zrk {

/// Frame-level embeddings of one utterance, stored row-major (frames x dim).
///
/// Construction validates the shape and rejects non-finite entries, so any
/// EmbeddingMatrix in hand satisfies frames >= 1, dim >= 1 and
/// data.size() == frames * dim.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::string utt_id, std::size_t frames, std::size_t dim,
                  std::vector<float> data);

  const std::string& utt_id() const { return utt_id_; }
  std::size_t frames() const { return frames_; }
  std::size_t dim() const { return dim_; }
  const std::vector<float>& data() const { return data_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  /// Rows [begin, end) as a new matrix carrying the same utterance id.
  EmbeddingMatrix slice(std::size_t begin, std::size_t end) const;

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::string utt_id_;
  std::size_t frames_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

/// Stacks all frames of several utterances into one matrix.
EmbeddingMatrix stack_frames(std::span<const EmbeddingMatrix> mats,
                             std::string utt_id = "stacked");

// ZRK1: "ZRK1", u32 LE rows, u32 LE cols, rows*cols f32 LE, row-major.
// The utterance id of a loaded matrix is the file stem.
EmbeddingMatrix read_zrk1(const std::filesystem::path& path);
void write_zrk1(const std::filesystem::path& path, const EmbeddingMatrix& m);

std::vector<char> encode_zrk1(const EmbeddingMatrix& m);
EmbeddingMatrix decode_zrk1(std::span<const char> bytes, std::string utt_id);

/// Loads every `*.zrk` file in a directory, sorted by utterance id.
std::vector<EmbeddingMatrix> read_zrk1_dir(const std::filesystem::path& dir);
void write_zrk1_dir(const std::filesystem::path& dir,
                    std::span<const EmbeddingMatrix> mats);

}  // namespace zrk
