#include "zrk/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace zrk {

namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

[[noreturn]] void bad_line(const fs::path& path, std::size_t lineno, const std::string& what) {
  throw Error(path.string() + ":" + std::to_string(lineno) + ": " + what);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream s(line);
  while (std::getline(s, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::size_t parse_count(const std::string& s, const fs::path& path, std::size_t lineno) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || s[0] == '-') bad_line(path, lineno, "bad integer '" + s + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<FrameLabel> read_alignment(const fs::path& path) {
  auto in = open_in(path);
  std::vector<FrameLabel> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("utt_id\t", 0) == 0) continue;
    const auto f = split(line, '\t');
    if (f.size() != 3) bad_line(path, lineno, "expected utt_id<TAB>frame<TAB>label");
    rows.push_back({f[0], parse_count(f[1], path, lineno), f[2]});
  }
  return rows;
}

void write_alignment(const fs::path& path, std::span<const FrameLabel> rows) {
  auto out = open_out(path);
  out << "utt_id\tframe\tlabel\n";
  for (const auto& r : rows) out << r.utt_id << '\t' << r.frame << '\t' << r.label << '\n';
}

std::vector<AbxItem> read_abx_items(const fs::path& path) {
  auto in = open_in(path);
  std::vector<AbxItem> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream f(line);
    AbxItem it;
    std::string onset, offset;
    if (!(f >> it.utt_id >> onset >> offset >> it.phone >> it.prev >> it.next >> it.speaker))
      bad_line(path, lineno, "expected 7 fields: file onset offset phone prev next speaker");
    it.onset = parse_count(onset, path, lineno);
    it.offset = parse_count(offset, path, lineno);
    if (it.onset >= it.offset) bad_line(path, lineno, "onset must be < offset");
    items.push_back(std::move(it));
  }
  return items;
}

void write_abx_items(const fs::path& path, std::span<const AbxItem> items) {
  auto out = open_out(path);
  out << "#file\tonset\toffset\t#phone\tprev-phone\tnext-phone\tspeaker\n";
  for (const auto& it : items)
    out << it.utt_id << '\t' << it.onset << '\t' << it.offset << '\t' << it.phone << '\t'
        << it.prev << '\t' << it.next << '\t' << it.speaker << '\n';
}

std::vector<SymbolSequence> read_quantized(const fs::path& path) {
  auto in = open_in(path);
  std::vector<SymbolSequence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) bad_line(path, lineno, "expected utt_id<SPACE>symbols");
    SymbolSequence seq{line.substr(0, sp), {}};
    try {
      seq.symbols = parse_piece(line.substr(sp + 1));
    } catch (const Error& e) {
      bad_line(path, lineno, e.what());
    }
    out.push_back(std::move(seq));
  }
  return out;
}

void write_quantized(const fs::path& path, std::span<const SymbolSequence> corpus) {
  auto out = open_out(path);
  for (const auto& s : corpus) out << s.utt_id << ' ' << format_piece(s.symbols) << '\n';
}

std::map<std::string, SymbolString> quantized_map(std::span<const SymbolSequence> corpus) {
  std::map<std::string, SymbolString> m;
  for (const auto& s : corpus)
    if (!m.emplace(s.utt_id, s.symbols).second)
      throw Error("duplicate utterance id '" + s.utt_id + "'");
  return m;
}

std::vector<SegmentedUtterance> read_segmented(const fs::path& path) {
  auto in = open_in(path);
  std::vector<SegmentedUtterance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) bad_line(path, lineno, "expected utt_id<SPACE>pieces");
    SegmentedUtterance u{line.substr(0, sp), {}};
    try {
      for (const auto& p : split(line.substr(sp + 1), '|')) u.pieces.push_back(parse_piece(p));
    } catch (const Error& e) {
      bad_line(path, lineno, e.what());
    }
    out.push_back(std::move(u));
  }
  return out;
}

void write_segmented(const fs::path& path, std::span<const SegmentedUtterance> corpus) {
  auto out = open_out(path);
  for (const auto& u : corpus) {
    out << u.utt_id << ' ';
    for (std::size_t i = 0; i < u.pieces.size(); ++i) out << (i ? "|" : "") << format_piece(u.pieces[i]);
    out << '\n';
  }
}

std::vector<PairRecord> read_pairs(const fs::path& path) {
  auto in = open_in(path);
  std::vector<PairRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.rfind("pair_id\t", 0) == 0) continue;
    const auto f = split(line, '\t');
    if (f.size() != 4) bad_line(path, lineno, "expected pair_id<TAB>utt_a<TAB>utt_b<TAB>gold");
    PairRecord r{f[0], f[1], f[2], std::nullopt};
    if (f[3] == "a")
      r.gold = PairChoice::kA;
    else if (f[3] == "b")
      r.gold = PairChoice::kB;
    else if (f[3] != "?")
      bad_line(path, lineno, "gold must be a, b or ?");
    out.push_back(std::move(r));
  }
  return out;
}

void write_pairs(const fs::path& path, std::span<const PairRecord> pairs) {
  auto out = open_out(path);
  for (const auto& p : pairs)
    out << p.pair_id << '\t' << p.utt_a << '\t' << p.utt_b << '\t'
        << (p.gold ? choice_name(*p.gold) : "?") << '\n';
}

std::string choice_name(PairChoice c) { return c == PairChoice::kA ? "a" : "b"; }

}  // namespace zrk
