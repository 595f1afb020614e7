#include "zrk/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "zrk/common.hpp"

namespace zrk {

namespace fs = std::filesystem;

EmbeddingMatrix::EmbeddingMatrix(std::string utt_id, std::size_t frames,
                                 std::size_t dim, std::vector<float> data)
    : utt_id_(std::move(utt_id)), frames_(frames), dim_(dim), data_(std::move(data)) {
  if (frames_ == 0 || dim_ == 0)
    throw Error("embedding '" + utt_id_ + "': frames and dim must be >= 1");
  if (data_.size() != frames_ * dim_)
    throw Error("embedding '" + utt_id_ + "': data length " + std::to_string(data_.size()) +
                " != " + std::to_string(frames_) + "x" + std::to_string(dim_));
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i]))
      throw Error("embedding '" + utt_id_ + "': non-finite value at frame " +
                  std::to_string(i / dim_));
  }
}

EmbeddingMatrix EmbeddingMatrix::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > frames_)
    throw Error("embedding '" + utt_id_ + "': invalid slice [" + std::to_string(begin) + ", " +
                std::to_string(end) + ") of " + std::to_string(frames_) + " frames");
  std::vector<float> d(data_.begin() + begin * dim_, data_.begin() + end * dim_);
  return EmbeddingMatrix(utt_id_, end - begin, dim_, std::move(d));
}

EmbeddingMatrix stack_frames(std::span<const EmbeddingMatrix> mats, std::string utt_id) {
  if (mats.empty()) throw Error("stack_frames: no matrices");
  const std::size_t dim = mats.front().dim();
  std::size_t rows = 0;
  for (const auto& m : mats) {
    if (m.dim() != dim)
      throw Error("dimension mismatch: '" + m.utt_id() + "' has dim " + std::to_string(m.dim()) +
                  ", expected " + std::to_string(dim));
    rows += m.frames();
  }
  std::vector<float> data;
  data.reserve(rows * dim);
  for (const auto& m : mats) data.insert(data.end(), m.data().begin(), m.data().end());
  return EmbeddingMatrix(std::move(utt_id), rows, dim, std::move(data));
}

namespace {

void put_u32(char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

}  // namespace

std::vector<char> encode_zrk1(const EmbeddingMatrix& m) {
  std::vector<char> out(12 + 4 * m.data().size());
  std::copy_n("ZRK1", 4, out.data());
  put_u32(out.data() + 4, static_cast<std::uint32_t>(m.frames()));
  put_u32(out.data() + 8, static_cast<std::uint32_t>(m.dim()));
  char* p = out.data() + 12;
  for (float f : m.data()) {
    put_u32(p, std::bit_cast<std::uint32_t>(f));
    p += 4;
  }
  return out;
}

EmbeddingMatrix decode_zrk1(std::span<const char> bytes, std::string utt_id) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "ZRK1", 4) != 0)
    throw Error("'" + utt_id + "': not a ZRK1 matrix");
  const std::uint32_t rows = get_u32(bytes.data() + 4);
  const std::uint32_t cols = get_u32(bytes.data() + 8);
  const std::size_t n = std::size_t(rows) * cols;
  if (bytes.size() != 12 + 4 * n)
    throw Error("'" + utt_id + "': ZRK1 payload is " + std::to_string(bytes.size() - 12) +
                " bytes, header promises " + std::to_string(4 * n));
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i)
    data[i] = std::bit_cast<float>(get_u32(bytes.data() + 12 + 4 * i));
  return EmbeddingMatrix(std::move(utt_id), rows, cols, std::move(data));
}

EmbeddingMatrix read_zrk1(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_zrk1(bytes, path.stem().string());
}

void write_zrk1(const fs::path& path, const EmbeddingMatrix& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const auto bytes = encode_zrk1(m);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<EmbeddingMatrix> read_zrk1_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".zrk") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.stem() < b.stem(); });
  std::vector<EmbeddingMatrix> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(read_zrk1(f));
  if (out.empty()) throw Error("no .zrk files in " + dir.string());
  return out;
}

void write_zrk1_dir(const fs::path& dir, std::span<const EmbeddingMatrix> mats) {
  fs::create_directories(dir);
  for (const auto& m : mats) write_zrk1(dir / (m.utt_id() + ".zrk"), m);
}

}  // namespace zrk
