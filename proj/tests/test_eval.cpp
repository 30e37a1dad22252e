#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "tsgp/eval.hpp"

using namespace tsgp;
namespace oracle = tsgp::testing;

namespace {

FitnessCaseTable random_table(Rng& rng, std::int64_t cases, std::int32_t features,
                              std::int64_t block_size = 2400) {
  FitnessCaseTable table;
  table.case_count = cases;
  table.feature_count = features;
  table.block_size = block_size;
  table.columns.assign(static_cast<std::size_t>(features), {});
  std::uniform_real_distribution<double> value(-100.0, 100.0);
  for (auto& col : table.columns) {
    for (std::int64_t c = 0; c < cases; ++c) col.push_back(value(rng));
  }
  for (std::int64_t c = 0; c < cases; ++c) {
    table.targets.push_back(static_cast<std::uint8_t>(rng() & 1));
  }
  return table;
}

// the classic disjunctive-normal-form 6-multiplexer built from
// {AND, OR, NAND, NOR} only: NOT x == NAND(x, x)
Program perfect_mux6() {
  const std::string not_a0 = "NAND x0 x0";
  const std::string not_a1 = "NAND x1 x1";
  const std::string line0 = "AND AND " + not_a0 + " " + not_a1 + " x2";
  const std::string line1 = "AND AND x0 " + not_a1 + " x3";
  const std::string line2 = "AND AND " + not_a0 + " x1 x4";
  const std::string line3 = "AND AND x0 x1 x5";
  return parse_program("OR OR " + line0 + " " + line1 + " OR " + line2 + " " + line3);
}

}  // namespace

TEST_CASE("interpreter primitive semantics") {
  const std::vector<double> xy = {2.0, 3.0};
  CHECK(interpret_case(parse_program("+ x0 x1"), xy) == 5.0);
  CHECK(interpret_case(parse_program("- x0 x1"), xy) == -1.0);
  CHECK(interpret_case(parse_program("* x0 x1"), xy) == 6.0);
  CHECK(interpret_case(parse_program("/ x1 x0"), xy) == 1.5);
  CHECK(interpret_case(parse_program("/ 1.0 0.0"), xy) == 1.0);  // protected
  CHECK(interpret_case(parse_program("/ 1.0 0.0000000001"), xy) == 1.0);
  CHECK(interpret_case(parse_program("> x0 x1"), xy) == 0.0);
  CHECK(interpret_case(parse_program("< x0 x1"), xy) == 1.0);
  CHECK(interpret_case(parse_program("== x0 x0"), xy) == 1.0);
  CHECK(interpret_case(parse_program("== x0 x1"), xy) == 0.0);
  CHECK(interpret_case(parse_program("AND x0 x1"), xy) == 1.0);
  CHECK(interpret_case(parse_program("AND x0 -1.0"), xy) == 0.0);
  CHECK(interpret_case(parse_program("OR -1.0 x1"), xy) == 1.0);
  CHECK(interpret_case(parse_program("OR -1.0 0.0"), xy) == 0.0);
  CHECK(interpret_case(parse_program("NAND x0 x1"), xy) == 0.0);
  CHECK(interpret_case(parse_program("NOR 0.0 0.0"), xy) == 1.0);
  CHECK(interpret_case(parse_program("IF x0 7.0 9.0"), xy) == 7.0);
  CHECK(interpret_case(parse_program("IF 0.0 7.0 9.0"), xy) == 9.0);
  long nodes = 0;
  interpret_case(parse_program("IF x0 7.0 9.0"), xy, &nodes);
  CHECK(nodes == 4);
}

TEST_CASE("classification decision rule") {
  CHECK(classify(1.0));
  CHECK(classify(1e-300));
  CHECK_FALSE(classify(0.0));
  CHECK_FALSE(classify(-2.0));
  CHECK_FALSE(classify(std::numeric_limits<double>::infinity()));
  CHECK_FALSE(classify(std::numeric_limits<double>::quiet_NaN()));
}

TEST_CASE("interpreter matches the recursive oracle on random programs") {
  Rng rng(101);
  const PrimitiveSet prims = PrimitiveSet::classification(6);
  std::uniform_real_distribution<double> value(-50.0, 50.0);
  for (int p = 0; p < 1000; ++p) {
    const Program program = random_program(rng, prims, {}, InitMethod::Grow, 5);
    for (int c = 0; c < (p < 50 ? 100 : 3); ++c) {
      std::vector<double> features(6);
      for (auto& f : features) f = value(rng);
      const double got = interpret_case(program, features);
      const double want = oracle::ref_eval(program, features);
      if (std::isnan(want)) {
        CHECK(std::isnan(got));
      } else {
        CHECK(got == want);
      }
    }
  }
}

TEST_CASE("block evaluation matches the per-case oracle") {
  Rng rng(202);
  const PrimitiveSet prims = PrimitiveSet::classification(5);
  const FitnessCaseTable table = random_table(rng, 100, 5, 100);
  for (int p = 0; p < 60; ++p) {
    const Program program = random_program(rng, prims, {}, InitMethod::Grow, 5);
    const BlockHits got = eval_block_scalar(program, table, 0);
    CHECK(got.cases == 100);
    CHECK(got.hits == oracle::ref_hits_scalar(program, table, 0, 100));
  }
}

TEST_CASE("constant program scores the positive targets") {
  Rng rng(9);
  FitnessCaseTable table = random_table(rng, 57, 2, 57);
  long positives = 0;
  for (const auto t : table.targets) positives += t;
  const BlockHits hits = eval_block_scalar(parse_program("1.0"), table, 0);
  CHECK(hits.hits == positives);
}

TEST_CASE("block partition covers 58000 cases as 25 blocks, last of 400") {
  FitnessCaseTable table;
  table.case_count = 58000;
  table.block_size = 2400;
  CHECK(table.block_count() == 25);
  CHECK(table.block_length(0) == 2400);
  CHECK(table.block_begin(24) == 57600);
  CHECK(table.block_length(24) == 400);
}

TEST_CASE("total hits are invariant to the block size") {
  Rng rng(303);
  const PrimitiveSet prims = PrimitiveSet::classification(4);
  FitnessCaseTable table = random_table(rng, 531, 4);
  for (int p = 0; p < 20; ++p) {
    const Program program = random_program(rng, prims, {}, InitMethod::Grow, 5);
    long reference = -1;
    for (const std::int64_t block_size : {std::int64_t{1}, std::int64_t{7}, std::int64_t{64},
                                          std::int64_t{531}, std::int64_t{2400}}) {
      table.block_size = block_size;
      long total = 0, cases = 0;
      for (int b = 0; b < table.block_count(); ++b) {
        const BlockHits r = eval_block_scalar(program, table, b);
        total += r.hits;
        cases += r.cases;
      }
      CHECK(cases == 531);
      if (reference < 0) reference = total;
      CHECK(total == reference);
    }
  }
}

TEST_CASE("a perfect 6-multiplexer program scores all 64 cases") {
  const BitCaseTable table = build_multiplexer(2);
  const Program mux = perfect_mux6();
  REQUIRE(boolean_compatible(mux));
  long hits = 0;
  for (int b = 0; b < table.block_count(); ++b) hits += eval_block_bits(mux, table, b).hits;
  CHECK(hits == 64);
}

TEST_CASE("a word equal to the target contributes exactly the lane width") {
  BitCaseTable table;
  table.case_count = 64;
  table.lane_width = 32;
  table.feature_count = 1;
  table.block_size = 2400;
  table.input_masks = {{0xDEADBEEFu, 0x12345678u}};
  table.target_words = {0xDEADBEEFu, 0x0u};
  const Program identity = parse_program("x0");
  CHECK(eval_word_range(identity, table, 0, 1) == 32);
  // second word disagrees in popcount(0x12345678) positions
  CHECK(eval_word_range(identity, table, 1, 2) == 32 - std::popcount(0x12345678u));
}

TEST_CASE("bit-parallel hits equal the scalar per-case oracle") {
  Rng rng(404);
  const PrimitiveSet prims = PrimitiveSet::boolean(6);
  const BitCaseTable table = build_multiplexer(2);
  for (int p = 0; p < 200; ++p) {
    const Program program = random_program(rng, prims, {}, InitMethod::Grow, 5);
    long packed = 0;
    for (int b = 0; b < table.block_count(); ++b) {
      packed += eval_block_bits(program, table, b).hits;
    }
    CHECK(packed == oracle::ref_hits_bits_scalarized(program, table));
  }
}

TEST_CASE("trailing partial words only count their valid lanes") {
  // 33 cases at lane width 32: the second word holds one case
  std::vector<std::uint8_t> ones(33, 1);
  BitCaseTable table;
  table.case_count = 33;
  table.lane_width = 32;
  table.feature_count = 1;
  table.block_size = 2400;
  table.input_masks = {pack_bits(ones, 32)};
  table.target_words = pack_bits(ones, 32);
  CHECK(table.word_count() == 2);
  const Program identity = parse_program("x0");
  CHECK(eval_word_range(identity, table, 0, 2) == 33);
  // NOT(x0) disagrees everywhere, and the 31 dead lanes must not count
  CHECK(eval_word_range(parse_program("NAND x0 x0"), table, 0, 2) == 0);
}

TEST_CASE("update_state accumulates and tolerates the empty final block") {
  EvalState state;
  update_state(state, 5, 10);
  CHECK(state.hits == 5);
  CHECK(state.cases_evaluated == 10);
  update_state(state, 0, 0);  // zero-length block is the identity
  CHECK(state.hits == 5);
  CHECK(state.cases_evaluated == 10);
}

TEST_CASE("blockwise accumulation equals a single unblocked pass") {
  Rng rng(505);
  const PrimitiveSet prims = PrimitiveSet::classification(3);
  FitnessCaseTable table = random_table(rng, 777, 3, 100);
  for (int p = 0; p < 20; ++p) {
    const Program program = random_program(rng, prims, {}, InitMethod::Grow, 4);
    EvalState state;
    for (int b = 0; b < table.block_count(); ++b) {
      const BlockHits r = eval_block_scalar(program, table, b);
      update_state(state, r.hits, r.cases);
    }
    CHECK(state.cases_evaluated == 777);
    CHECK(state.hits == eval_case_range(program, table, 0, 777));
  }
}
