#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zrk/abx.hpp"
#include "zrk/lexical.hpp"
#include "zrk/quantize.hpp"
#include "zrk/repr.hpp"
#include "zrk/segment.hpp"

namespace zrk {

// Text formats shared by the command-line tools. Readers report the file and
// line number of malformed input.

/// `utt_id<TAB>frame<TAB>label` with that header line.
std::vector<FrameLabel> read_alignment(const std::filesystem::path& path);
void write_alignment(const std::filesystem::path& path, std::span<const FrameLabel> rows);

/// `#file onset offset #phone prev-phone next-phone speaker` header, then one
/// whitespace-separated item per line, onset/offset in frames.
std::vector<AbxItem> read_abx_items(const std::filesystem::path& path);
void write_abx_items(const std::filesystem::path& path, std::span<const AbxItem> items);

/// One utterance per line: `utt_id<SPACE>sym,sym,sym,...`.
std::vector<SymbolSequence> read_quantized(const std::filesystem::path& path);
void write_quantized(const std::filesystem::path& path, std::span<const SymbolSequence> corpus);
std::map<std::string, SymbolString> quantized_map(std::span<const SymbolSequence> corpus);

/// `utt_id<SPACE>piece|piece|...` with pieces as comma-joined symbols.
struct SegmentedUtterance {
  std::string utt_id;
  std::vector<Piece> pieces;
};
std::vector<SegmentedUtterance> read_segmented(const std::filesystem::path& path);
void write_segmented(const std::filesystem::path& path, std::span<const SegmentedUtterance> corpus);

/// `pair_id<TAB>utt_a<TAB>utt_b<TAB>gold` with gold one of a, b, ?.
struct PairRecord {
  std::string pair_id;
  std::string utt_a;
  std::string utt_b;
  std::optional<PairChoice> gold;
};
std::vector<PairRecord> read_pairs(const std::filesystem::path& path);
void write_pairs(const std::filesystem::path& path, std::span<const PairRecord> pairs);

std::string choice_name(PairChoice c);

}  // namespace zrk
