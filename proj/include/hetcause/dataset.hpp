#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hetcause/error.hpp"

namespace hetcause {

inline constexpr std::string_view kOutcomeColumn = "Y";

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    s = (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace detail

// Immutable N x M matrix of 0/1 values, stored column-major as packed 64-bit
// words so that joint counts reduce to AND + popcount.
class BinaryDataset {
 public:
  BinaryDataset() = default;

  // columns[c][r] is the value of column c in row r; any nonzero is 1.
  BinaryDataset(std::vector<std::string> names,
                const std::vector<std::vector<std::uint8_t>>& columns)
      : names_(std::move(names)) {
    if (names_.size() != columns.size())
      throw data_error("dataset: name/column count mismatch");
    rows_ = columns.empty() ? 0 : columns.front().size();
    words_ = (rows_ + 63) / 64;
    bits_.assign(names_.size() * words_, 0);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c].size() != rows_)
        throw data_error("dataset: ragged columns");
      auto* w = bits_.data() + c * words_;
      for (std::size_t r = 0; r < rows_; ++r)
        if (columns[c][r]) w[r >> 6] |= std::uint64_t{1} << (r & 63);
    }
    build_index();
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  std::size_t words() const { return words_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t c) const { return names_.at(c); }

  std::optional<std::size_t> find(std::string_view n) const {
    auto it = index_.find(std::string(n));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index(std::string_view n) const {
    auto i = find(n);
    if (!i) throw data_error("dataset: unknown column '" + std::string(n) + "'");
    return *i;
  }

  std::optional<std::size_t> outcome() const { return find(kOutcomeColumn); }

  std::size_t require_outcome() const {
    auto y = outcome();
    if (!y) throw data_error("dataset: outcome column 'Y' missing");
    return *y;
  }

  bool at(std::size_t r, std::size_t c) const {
    return (bits_[c * words_ + (r >> 6)] >> (r & 63)) & 1U;
  }

  std::span<const std::uint64_t> column_bits(std::size_t c) const {
    return {bits_.data() + c * words_, words_};
  }

  std::vector<std::uint8_t> column(std::size_t c) const {
    std::vector<std::uint8_t> v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = at(r, c);
    return v;
  }

  std::size_t count_ones(std::size_t c) const {
    std::size_t n = 0;
    for (auto w : column_bits(c)) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool is_constant(std::size_t c) const {
    auto k = count_ones(c);
    return k == 0 || k == rows_;
  }

  // Counts of every joint assignment of `vars`; bit i of the result index is
  // the value of vars[i].
  std::vector<std::uint32_t> joint_counts(std::span<const std::size_t> vars) const;

  BinaryDataset select_rows(std::span<const std::size_t> rows) const {
    BinaryDataset out;
    out.names_ = names_;
    out.rows_ = rows.size();
    out.words_ = (out.rows_ + 63) / 64;
    out.bits_.assign(out.names_.size() * out.words_, 0);
    for (std::size_t c = 0; c < cols(); ++c) {
      auto* w = out.bits_.data() + c * out.words_;
      for (std::size_t r = 0; r < rows.size(); ++r)
        if (at(rows[r], c)) w[r >> 6] |= std::uint64_t{1} << (r & 63);
    }
    out.index_ = index_;
    return out;
  }

  BinaryDataset select_columns(std::span<const std::string> keep) const {
    std::vector<std::vector<std::uint8_t>> cols_out;
    std::vector<std::string> names_out;
    for (const auto& n : keep) {
      names_out.push_back(n);
      cols_out.push_back(column(index(n)));
    }
    return BinaryDataset(std::move(names_out), cols_out);
  }

  friend bool operator==(const BinaryDataset& a, const BinaryDataset& b) {
    return a.names_ == b.names_ && a.rows_ == b.rows_ && a.bits_ == b.bits_;
  }

 private:
  void build_index() {
    index_.clear();
    for (std::size_t c = 0; c < names_.size(); ++c) {
      if (names_[c].empty()) throw data_error("dataset: empty column name");
      if (!index_.emplace(names_[c], c).second)
        throw data_error("dataset: duplicate column '" + names_[c] + "'");
    }
  }

  std::vector<std::string> names_;
  std::size_t rows_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline std::vector<std::uint32_t> BinaryDataset::joint_counts(
    std::span<const std::size_t> vars) const {
  const std::size_t k = vars.size();
  if (k > 24) throw config_error("joint_counts: too many variables");
  std::vector<std::uint32_t> out(std::size_t{1} << k, 0);
  if (rows_ == 0) return out;
  if (k == 0) {
    out[0] = static_cast<std::uint32_t>(rows_);
    return out;
  }
  // Row-wise pass once the table is wide relative to the data.
  if ((std::size_t{1} << k) > 4 * rows_ / 64 + 64) {
    for (std::size_t r = 0; r < rows_; ++r) {
      std::size_t idx = 0;
      for (std::size_t i = 0; i < k; ++i)
        idx |= static_cast<std::size_t>(at(r, vars[i])) << i;
      ++out[idx];
    }
    return out;
  }
  // Depth-first refinement of row masks over all but the last two variables;
  // empty branches are pruned. Each leaf mask is split four ways in a single
  // sweep with three popcounts.
  std::vector<std::uint64_t> buf((2 * k + 1) * words_, ~std::uint64_t{0});
  if (rows_ % 64) buf[words_ - 1] = (std::uint64_t{1} << (rows_ % 64)) - 1;
  const std::size_t split = k >= 2 ? k - 2 : 0;
  auto leaf = [&](const std::uint64_t* mask, std::size_t idx, std::size_t total) {
    if (k == 1) {
      const auto a = column_bits(vars[0]);
      std::size_t na = 0;
      for (std::size_t w = 0; w < words_; ++w) na += static_cast<std::size_t>(std::popcount(mask[w] & a[w]));
      out[1] = static_cast<std::uint32_t>(na);
      out[0] = static_cast<std::uint32_t>(total - na);
      return;
    }
    const auto a = column_bits(vars[split]), b = column_bits(vars[split + 1]);
    std::size_t na = 0, nb = 0, nab = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      const auto ma = mask[w] & a[w], mb = mask[w] & b[w];
      na += static_cast<std::size_t>(std::popcount(ma));
      nb += static_cast<std::size_t>(std::popcount(mb));
      nab += static_cast<std::size_t>(std::popcount(ma & b[w]));
    }
    const std::size_t ba = std::size_t{1} << split, bb = std::size_t{1} << (split + 1);
    out[idx | ba | bb] = static_cast<std::uint32_t>(nab);
    out[idx | ba] = static_cast<std::uint32_t>(na - nab);
    out[idx | bb] = static_cast<std::uint32_t>(nb - nab);
    out[idx] = static_cast<std::uint32_t>(total - na - nb + nab);
  };
  std::function<void(std::size_t, const std::uint64_t*, std::size_t, std::size_t)> rec =
      [&](std::size_t level, const std::uint64_t* mask, std::size_t idx, std::size_t total) {
        if (level == split) return leaf(mask, idx, total);
        const auto col = column_bits(vars[level]);
        auto* one = buf.data() + (2 * level + 1) * words_;
        auto* zero = one + words_;
        std::size_t ones = 0;
        for (std::size_t w = 0; w < words_; ++w) {
          one[w] = mask[w] & col[w];
          zero[w] = mask[w] & ~col[w];
          ones += static_cast<std::size_t>(std::popcount(one[w]));
        }
        if (ones) rec(level + 1, one, idx | (std::size_t{1} << level), ones);
        if (total - ones) rec(level + 1, zero, idx, total - ones);
      };
  rec(0, buf.data(), 0, rows_);
  return out;
}

// CSV: header of column names, then one row of 0/1 cells per record.
inline BinaryDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw data_error("dataset csv: empty input");
  auto names = detail::split_csv_line(line);
  std::vector<std::vector<std::uint8_t>> cols(names.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != names.size())
      throw data_error("dataset csv: wrong cell count on line " + std::to_string(lineno));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c] == "0") cols[c].push_back(0);
      else if (cells[c] == "1") cols[c].push_back(1);
      else
        throw data_error("dataset csv: non-binary cell '" + cells[c] + "' on line " +
                         std::to_string(lineno));
    }
  }
  return BinaryDataset(std::move(names), cols);
}

inline BinaryDataset read_dataset_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot open " + path);
  return read_dataset_csv(f);
}

inline void write_dataset_csv(std::ostream& out, const BinaryDataset& d) {
  for (std::size_t c = 0; c < d.cols(); ++c) out << (c ? "," : "") << d.name(c);
  out << '\n';
  std::string row;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    row.clear();
    for (std::size_t c = 0; c < d.cols(); ++c) {
      if (c) row.push_back(',');
      row.push_back(d.at(r, c) ? '1' : '0');
    }
    row.push_back('\n');
    out << row;
  }
}

inline void write_dataset_csv(const std::string& path, const BinaryDataset& d) {
  std::ofstream f(path);
  if (!f) throw data_error("cannot write " + path);
  write_dataset_csv(f, d);
}

}  // namespace hetcause
