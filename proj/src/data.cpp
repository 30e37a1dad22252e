#include "tsgp/data.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tsgp {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  if (delimiter == 0) {
    delimiter = line.find(',') != std::string::npos ? ',' : ' ';
  }
  if (delimiter == ' ') {
    std::istringstream in(line);
    std::string f;
    while (in >> f) fields.push_back(f);
    return fields;
  }
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delimiter)) {
    // trim surrounding blanks
    const auto b = field.find_first_not_of(" \t");
    const auto e = field.find_last_not_of(" \t");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

void FitnessCaseTable::copy_case(std::int64_t c, std::vector<double>& out) const {
  out.resize(static_cast<std::size_t>(feature_count));
  for (std::int32_t k = 0; k < feature_count; ++k) {
    out[static_cast<std::size_t>(k)] = columns[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
  }
}

int FitnessCaseTable::block_count() const {
  return static_cast<int>(ceil_div(case_count, block_size));
}

std::int64_t FitnessCaseTable::block_begin(int block) const {
  return static_cast<std::int64_t>(block) * block_size;
}

std::int64_t FitnessCaseTable::block_length(int block) const {
  return std::min(block_size, case_count - block_begin(block));
}

int BitCaseTable::word_lanes(std::int64_t w) const {
  return static_cast<int>(std::min<std::int64_t>(lane_width, case_count - w * lane_width));
}

std::uint64_t BitCaseTable::word_mask(std::int64_t w) const {
  const int lanes = word_lanes(w);
  return lanes >= 64 ? ~0ull : ((1ull << lanes) - 1);
}

std::int64_t BitCaseTable::words_per_block() const {
  return std::max<std::int64_t>(1, block_size / lane_width);
}

int BitCaseTable::block_count() const {
  return static_cast<int>(ceil_div(word_count(), words_per_block()));
}

std::int64_t BitCaseTable::block_begin_word(int block) const {
  return static_cast<std::int64_t>(block) * words_per_block();
}

std::int64_t BitCaseTable::block_word_count(int block) const {
  return std::min(words_per_block(), word_count() - block_begin_word(block));
}

std::int64_t BitCaseTable::block_case_count(int block) const {
  const std::int64_t begin = block_begin_word(block) * lane_width;
  const std::int64_t end =
      std::min(case_count, (block_begin_word(block) + block_word_count(block)) * lane_width);
  return end - begin;
}

std::vector<std::uint64_t> pack_bits(std::span<const std::uint8_t> values, int lane_width) {
  assert(lane_width == 32 || lane_width == 64);
  std::vector<std::uint64_t> words(
      static_cast<std::size_t>(ceil_div(static_cast<std::int64_t>(values.size()), lane_width)), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i]) {
      words[i / static_cast<std::size_t>(lane_width)] |=
          1ull << (i % static_cast<std::size_t>(lane_width));
    }
  }
  return words;
}

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint64_t> words, int lane_width,
                                      std::int64_t count) {
  std::vector<std::uint8_t> values(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    values[static_cast<std::size_t>(i)] =
        (words[static_cast<std::size_t>(i / lane_width)] >> (i % lane_width)) & 1u;
  }
  return values;
}

BitCaseTable build_multiplexer(int address_bits, int lane_width) {
  assert(address_bits >= 1);
  const int data_bits = 1 << address_bits;
  const int terminals = address_bits + data_bits;
  assert(terminals <= 26);

  BitCaseTable table;
  table.lane_width = lane_width;
  table.feature_count = terminals;
  table.case_count = std::int64_t{1} << terminals;

  std::vector<std::uint8_t> scratch(static_cast<std::size_t>(table.case_count));
  for (int t = 0; t < terminals; ++t) {
    for (std::int64_t c = 0; c < table.case_count; ++c) {
      scratch[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>((c >> t) & 1);
    }
    table.input_masks.push_back(pack_bits(scratch, lane_width));
  }
  for (std::int64_t c = 0; c < table.case_count; ++c) {
    const std::int64_t address = c & (data_bits - 1);
    scratch[static_cast<std::size_t>(c)] =
        static_cast<std::uint8_t>((c >> (address_bits + address)) & 1);
  }
  table.target_words = pack_bits(scratch, lane_width);
  return table;
}

FitnessCaseTable load_classification_file(const std::string& path, const LoadSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  FitnessCaseTable table;
  std::vector<std::map<std::string, double>> symbol_codes;
  std::vector<bool> numeric;
  int label_column = schema.label_column;
  std::size_t column_count = 0;

  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line, schema.delimiter);
    if (fields.empty()) continue;

    if (column_count == 0) {
      column_count = fields.size();
      if (column_count < 2) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected at least one feature and a label column");
      }
      if (label_column < 0) label_column = static_cast<int>(column_count) - 1;
      if (label_column >= static_cast<int>(column_count)) {
        throw std::runtime_error("label column out of range for " + path);
      }
      table.feature_count = static_cast<std::int32_t>(column_count) - 1;
      table.columns.resize(static_cast<std::size_t>(table.feature_count));
      symbol_codes.resize(column_count);
      numeric.resize(column_count);
      double v;
      for (std::size_t i = 0; i < column_count; ++i) {
        numeric[i] = parse_double(fields[i], v);
      }
    } else if (fields.size() != column_count) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(column_count) + " fields, got " +
                               std::to_string(fields.size()));
    }

    std::size_t out_col = 0;
    for (std::size_t i = 0; i < column_count; ++i) {
      if (static_cast<int>(i) == label_column) continue;
      double v;
      if (numeric[i]) {
        if (!parse_double(fields[i], v)) {
          throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                   ": unparseable numeric value '" + fields[i] + "'");
        }
      } else {
        // symbolic columns are coded by first appearance
        auto [it, inserted] =
            symbol_codes[i].try_emplace(fields[i], static_cast<double>(symbol_codes[i].size()));
        v = it->second;
      }
      table.columns[out_col++].push_back(v);
    }
    const std::string& label = fields[static_cast<std::size_t>(label_column)];
    const bool positive = std::find(schema.positive_labels.begin(), schema.positive_labels.end(),
                                    label) != schema.positive_labels.end();
    table.targets.push_back(positive ? 1 : 0);
  }
  if (table.targets.empty()) throw std::runtime_error("dataset file is empty: " + path);
  table.case_count = static_cast<std::int64_t>(table.targets.size());
  return table;
}

FitnessCaseTable synthetic_shuttle_like(std::int64_t case_count, std::uint64_t seed) {
  FitnessCaseTable table;
  table.feature_count = 9;
  table.case_count = case_count;
  table.columns.assign(9, {});
  for (auto& col : table.columns) col.reserve(static_cast<std::size_t>(case_count));
  table.targets.reserve(static_cast<std::size_t>(case_count));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto rint = [&](double scale, double shift) { return std::round(gauss(rng) * scale + shift); };

  // The rows emulate sequential telemetry: the flight regime persists over
  // long runs of consecutive cases instead of being drawn independently, so
  // partial hit rates swing the way they do on the real ordered Shuttle file.
  std::vector<double> latent;
  latent.reserve(static_cast<std::size_t>(case_count));
  bool regime = false;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double into_regime = 15.0 / static_cast<double>(case_count);
  const double out_of_regime = 30.0 / static_cast<double>(case_count);
  for (std::int64_t c = 0; c < case_count; ++c) {
    if (unit(rng) < (regime ? out_of_regime : into_regime)) regime = !regime;
    const double f0 = rint(25, 40);
    const double f1 = rint(60, 0);
    const double f2 = rint(15, 80);
    const double f3 = rint(20, 0);
    const double f4 = rint(35, -10);
    const double f5 = regime ? 5.0 + std::fabs(rint(4, 0)) : 4.0 - std::fabs(rint(5, 0));
    const double f6 = f0 - f2 + rint(5, 0);
    const double f7 = rint(12, 2);
    const double f8 = f2 - f3 + rint(3, 0);
    const double columns[9] = {f0, f1, f2, f3, f4, f5, f6, f7, f8};
    for (int k = 0; k < 9; ++k) table.columns[static_cast<std::size_t>(k)].push_back(columns[k]);
    // regime-switching rule: programs that miss the f5 condition lose whole
    // windows of cases at once, which keeps losers detectable early. The
    // unobserved component caps attainable accuracy the way real telemetry
    // does without flattening the gradient.
    const double core = f5 > 4.0 ? f3 - 2.0 * f0 : 2.0 * f0 - f3;
    latent.push_back(core + gauss(rng) * 20.0);
  }

  // threshold at the ~21.4th percentile gives the Shuttle-like 78.6% majority
  std::vector<double> sorted(latent);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(0.214 * case_count),
                   sorted.end());
  const double threshold = sorted[static_cast<std::size_t>(0.214 * case_count)];
  for (std::int64_t c = 0; c < case_count; ++c) {
    table.targets.push_back(latent[static_cast<std::size_t>(c)] >= threshold ? 1 : 0);
  }
  return table;
}

}  // namespace tsgp
