#include "aobs/capture_data.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "aobs/error.hpp"

namespace aobs {
namespace {

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(strip(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

std::string CaptureHistory::bitstring() const {
  std::string s(static_cast<std::size_t>(lists), '0');
  for (int t = 0; t < lists; ++t)
    if (on_list(t)) s[static_cast<std::size_t>(t)] = '1';
  return s;
}

CaptureDataset::CaptureDataset(int lists, std::vector<CaptureHistory> histories)
    : lists_(lists), histories_(std::move(histories)) {
  if (lists_ < 1 || lists_ > kMaxLists)
    fail(errc::fixture_shape_mismatch, "list count out of range [1,20]");
  if (histories_.empty()) fail(errc::empty_input, "dataset has no capture histories");
  for (auto& h : histories_) {
    h.lists = lists_;
    if (h.bits == 0) fail(errc::all_zero_row, "all-zero capture history is unobservable");
    if (h.bits >> lists_) fail(errc::ragged_rows, "history wider than list count");
    ++cells_[h.bits];
  }
}

std::int64_t CaptureDataset::count_in_cell(std::uint32_t bits) const {
  const auto it = cells_.find(bits);
  return it == cells_.end() ? 0 : it->second;
}

std::vector<int> CaptureDataset::captures_per_list() const {
  std::vector<int> n(static_cast<std::size_t>(lists_), 0);
  for (const auto& h : histories_)
    for (int t = 0; t < lists_; ++t)
      if (h.on_list(t)) ++n[static_cast<std::size_t>(t)];
  return n;
}

CaptureDataset parse_capture_csv(std::istream& in, bool header) {
  std::string line;
  std::vector<CaptureHistory> rows;
  int lists = -1;
  std::size_t lineno = 0;
  bool skipped_header = !header;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    const auto cells = split_csv(line);
    if (lists < 0) {
      lists = static_cast<int>(cells.size());
      if (lists < 1 || lists > CaptureDataset::kMaxLists)
        fail(errc::ragged_rows, "row " + std::to_string(lineno) + ": list count out of range");
    } else if (static_cast<int>(cells.size()) != lists) {
      fail(errc::ragged_rows, "row " + std::to_string(lineno) + ": expected " +
                                  std::to_string(lists) + " cells, got " +
                                  std::to_string(cells.size()));
    }
    CaptureHistory h;
    for (int t = 0; t < lists; ++t) {
      const std::string& c = cells[static_cast<std::size_t>(t)];
      if (c == "1")
        h.bits |= (1u << t);
      else if (c != "0")
        fail(errc::non_binary_cell,
             "row " + std::to_string(lineno) + ": cell '" + c + "' is not 0/1");
    }
    if (h.bits == 0)
      fail(errc::all_zero_row, "row " + std::to_string(lineno) + ": all-zero history");
    rows.push_back(h);
  }
  if (rows.empty()) fail(errc::empty_input, "no capture rows in input");
  return CaptureDataset(lists, std::move(rows));
}

CaptureDataset parse_capture_csv(const std::string& text, bool header) {
  std::istringstream in(text);
  return parse_capture_csv(in, header);
}

std::string serialize_cell_counts(const CaptureDataset& data) {
  std::ostringstream out;
  out << "history,count\n";
  for (const auto& [bits, count] : data.cell_counts()) {
    CaptureHistory h{bits, data.lists()};
    out << h.bitstring() << ',' << count << '\n';
  }
  return out.str();
}

CaptureDataset parse_cell_counts_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<CaptureHistory> rows;
  int lists = -1;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string t = strip(line);
    if (t.empty()) continue;
    if (first) {
      first = false;
      if (t == "history,count") continue;  // header optional
    }
    const auto cells = split_csv(t);
    if (cells.size() != 2) fail(errc::ragged_rows, "cell-count line needs 'history,count'");
    const std::string& bitstr = cells[0];
    if (lists < 0)
      lists = static_cast<int>(bitstr.size());
    else if (static_cast<int>(bitstr.size()) != lists)
      fail(errc::ragged_rows, "cell-count histories have mixed widths");
    CaptureHistory h;
    h.lists = lists;
    for (int b = 0; b < lists; ++b) {
      const char c = bitstr[static_cast<std::size_t>(b)];
      if (c == '1')
        h.bits |= (1u << b);
      else if (c != '0')
        fail(errc::non_binary_cell, "history '" + bitstr + "' is not a bitstring");
    }
    std::int64_t count = 0;
    try {
      count = std::stoll(cells[1]);
    } catch (const std::exception&) {
      fail(errc::non_binary_cell, "count '" + cells[1] + "' is not an integer");
    }
    if (count < 0) fail(errc::non_binary_cell, "negative cell count");
    for (std::int64_t k = 0; k < count; ++k) rows.push_back(h);
  }
  if (rows.empty()) fail(errc::empty_input, "no cells in input");
  return CaptureDataset(lists, std::move(rows));
}

CaptureDataset load_hares(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::fixture_missing, "cannot open hare fixture at " + path);
  CaptureDataset data = parse_capture_csv(in, /*header=*/true);
  if (data.size() != 68 || data.lists() != 6)
    fail(errc::fixture_shape_mismatch,
         "hare fixture must hold 68 histories over 6 lists, got m=" +
             std::to_string(data.size()) + " T=" + std::to_string(data.lists()));
  return data;
}

}  // namespace aobs
