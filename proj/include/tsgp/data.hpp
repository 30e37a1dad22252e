#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tsgp {

// Fitness cases for real-valued classification. Features are stored one
// contiguous column per feature so the block interpreter streams terminal
// loads; targets are the binarized labels.
struct FitnessCaseTable {
  std::vector<std::vector<double>> columns;
  std::vector<std::uint8_t> targets;
  std::int64_t case_count = 0;
  std::int32_t feature_count = 0;
  std::int64_t block_size = 2400;

  std::span<const double> column(std::int32_t feature) const {
    return columns[static_cast<std::size_t>(feature)];
  }
  void copy_case(std::int64_t c, std::vector<double>& out) const;

  int block_count() const;
  std::int64_t block_begin(int block) const;
  std::int64_t block_length(int block) const;
};

// Bit-packed Boolean fitness cases: bit b of word w of a terminal holds that
// terminal's value in case w*lane_width + b. Trailing bits of the last word
// are zero and excluded from hit counts.
struct BitCaseTable {
  std::vector<std::vector<std::uint64_t>> input_masks;  // one vector per terminal
  std::vector<std::uint64_t> target_words;
  std::int64_t case_count = 0;
  std::int32_t feature_count = 0;
  int lane_width = 32;
  std::int64_t block_size = 2400;  // raw cases; rounded to whole words

  std::int64_t word_count() const {
    return (case_count + lane_width - 1) / lane_width;
  }
  // valid (in-range) lanes of word w
  int word_lanes(std::int64_t w) const;
  std::uint64_t word_mask(std::int64_t w) const;

  std::int64_t words_per_block() const;
  int block_count() const;
  std::int64_t block_begin_word(int block) const;
  std::int64_t block_word_count(int block) const;
  std::int64_t block_case_count(int block) const;
};

std::vector<std::uint64_t> pack_bits(std::span<const std::uint8_t> values, int lane_width);
std::vector<std::uint8_t> unpack_bits(std::span<const std::uint64_t> words, int lane_width,
                                      std::int64_t count);

// Boolean k-address-bit multiplexer truth table over all
// 2^(k + 2^k) input combinations. Terminal order: A0..A(k-1), D0..D(2^k-1),
// with terminal t taking bit t of the case index. Target = the data bit
// selected by the address bits.
BitCaseTable build_multiplexer(int address_bits, int lane_width = 32);

struct LoadSchema {
  int label_column = -1;  // -1 = last column
  std::vector<std::string> positive_labels;
  char delimiter = 0;  // 0 = auto: comma when the line contains one, else whitespace
};

// Delimiter-separated classification file. Numeric columns parse as reals;
// symbolic columns are coded by first appearance; the label column is
// binarized by membership in the positive set. Malformed rows raise with the
// offending line number.
FitnessCaseTable load_classification_file(const std::string& path, const LoadSchema& schema);

// Deterministic stand-in for the Shuttle benchmark at its native scale:
// 9 integer-valued sensor-like features, ~79% positive class, a rule-based
// target learnable by the classification primitive set.
FitnessCaseTable synthetic_shuttle_like(std::int64_t case_count, std::uint64_t seed);

}  // namespace tsgp
