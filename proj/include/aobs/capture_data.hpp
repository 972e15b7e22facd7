#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace aobs {

// One observed capture history over T lists, list t stored in bit t.
// Observed means not all-zero; the all-zero cell is unobservable by design.
struct CaptureHistory {
  std::uint32_t bits = 0;
  int lists = 0;

  bool on_list(int t) const { return (bits >> t) & 1u; }
  int capture_count() const { return std::popcount(bits); }
  // list 1 leftmost
  std::string bitstring() const;
};

class CaptureDataset {
 public:
  static constexpr int kMaxLists = 20;

  CaptureDataset(int lists, std::vector<CaptureHistory> histories);

  int lists() const { return lists_; }
  int size() const { return static_cast<int>(histories_.size()); }  // m
  const std::vector<CaptureHistory>& histories() const { return histories_; }

  // 2^T - 1 observable cells; keys are history bit patterns, zero counts
  // omitted. Invariant under any permutation of input rows.
  const std::map<std::uint32_t, std::int64_t>& cell_counts() const { return cells_; }
  std::int64_t count_in_cell(std::uint32_t bits) const;
  std::vector<int> captures_per_list() const;

 private:
  int lists_;
  std::vector<CaptureHistory> histories_;
  std::map<std::uint32_t, std::int64_t> cells_;
};

// Rows of T comma-separated 0/1 cells, optional header. Whitespace around
// cells tolerated; anything else rejects the whole input.
CaptureDataset parse_capture_csv(std::istream& in, bool header);
CaptureDataset parse_capture_csv(const std::string& text, bool header);

// "history,count" lines, histories as T-character bitstrings (list 1 leftmost),
// cells in ascending bit-pattern order; inverse of parse_cell_counts_csv.
std::string serialize_cell_counts(const CaptureDataset& data);
CaptureDataset parse_cell_counts_csv(const std::string& text);

// Snowshoe-hare fixture: 68 histories over 6 lists, shape validated on load.
CaptureDataset load_hares(const std::string& path);

}  // namespace aobs
