#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "tsgp/data.hpp"
#include "tsgp/genome.hpp"

namespace tsgp {

enum class MemberStatus : std::uint8_t {
  Active,      // still being evaluated block by block
  Loser,       // lost every tournament it occupies; evaluation terminated
  NotSampled,  // occupies no tournament; skipped entirely
  KnownFull,   // full fitness known (evaluated to completion or inherited)
};

// Per-member bookkeeping for one generation. hits and cases_evaluated count
// raw fitness cases and only grow; a KnownFull member whose fitness was
// inherited from an intact survivor keeps cases_evaluated at 0.
struct EvalState {
  long hits = 0;
  long cases_evaluated = 0;
  MemberStatus status = MemberStatus::Active;
  std::vector<std::uint8_t> lost_flags;  // one per tournament the member occupies
  long nodes_executed = 0;
};

// Positive class iff the program output is finite and strictly positive.
inline bool classify(double output) {
  return output > 0.0 && output < std::numeric_limits<double>::infinity();
}

// Evaluates one fitness case on an explicit stack (no recursion, no
// randomness). Protected division returns 1.0 when |denominator| < 1e-9;
// comparisons and gates return 1.0/0.0 with operand > 0 as truth.
double interpret_case(const Program& program, std::span<const double> features,
                      long* nodes_executed = nullptr);

struct BlockHits {
  long hits = 0;
  long cases = 0;  // raw fitness cases consumed
};

// Hits over the half-open case range [begin, end).
long eval_case_range(const Program& program, const FitnessCaseTable& table, std::int64_t begin,
                     std::int64_t end);
BlockHits eval_block_scalar(const Program& program, const FitnessCaseTable& table, int block);

// Bit-parallel evaluation over packed words; hits are raw cases via the
// popcount of output XNOR target under the word's valid-lane mask.
long eval_word_range(const Program& program, const BitCaseTable& table, std::int64_t word_begin,
                     std::int64_t word_end);
BlockHits eval_block_bits(const Program& program, const BitCaseTable& table, int block);

// True when the program uses only Boolean gates and feature terminals.
bool boolean_compatible(const Program& program);

void update_state(EvalState& state, long block_hits, long block_cases);

}  // namespace tsgp
