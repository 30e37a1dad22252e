#include "tsgp/eval.hpp"

#include <bit>
#include <cassert>
#include <cmath>
#include <cstring>

namespace tsgp {

namespace {

// Fitness cases interpreted per opcode dispatch. The value stack holds one
// row of kChunk lanes per pending operand, so simple opcodes compile to
// vectorized loops over contiguous rows.
constexpr int kChunk = 64;
constexpr int kWordChunk = 16;

constexpr double kDivEpsilon = 1e-9;

// Maximum number of pending operands while the prefix genome is interpreted
// back to front (terminals push, functions pop their arity and push one).
int stack_rows(const Program& program) {
  int depth = 0;
  int max_depth = 0;
  for (auto it = program.nodes.rbegin(); it != program.nodes.rend(); ++it) {
    depth += 1 - arity(it->op);
    if (depth > max_depth) max_depth = depth;
  }
  return max_depth;
}

inline double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return std::fabs(b) < kDivEpsilon ? 1.0 : a / b;
    case Op::Gt: return a > b ? 1.0 : 0.0;
    case Op::Lt: return a < b ? 1.0 : 0.0;
    case Op::Eq: return a == b ? 1.0 : 0.0;
    case Op::And: return (a > 0.0 && b > 0.0) ? 1.0 : 0.0;
    case Op::Or: return (a > 0.0 || b > 0.0) ? 1.0 : 0.0;
    case Op::Nand: return (a > 0.0 && b > 0.0) ? 0.0 : 1.0;
    case Op::Nor: return (a > 0.0 || b > 0.0) ? 0.0 : 1.0;
    default: assert(false); return 0.0;
  }
}

}  // namespace

double interpret_case(const Program& program, std::span<const double> features,
                      long* nodes_executed) {
  thread_local std::vector<double> stack;
  stack.resize(static_cast<std::size_t>(stack_rows(program)));
  int d = 0;
  for (auto it = program.nodes.rbegin(); it != program.nodes.rend(); ++it) {
    switch (it->op) {
      case Op::Feature:
        stack[static_cast<std::size_t>(d++)] = features[static_cast<std::size_t>(it->feature)];
        break;
      case Op::Constant:
        stack[static_cast<std::size_t>(d++)] = it->value;
        break;
      case Op::If: {
        const double cond = stack[static_cast<std::size_t>(d - 1)];
        const double then_v = stack[static_cast<std::size_t>(d - 2)];
        const double else_v = stack[static_cast<std::size_t>(d - 3)];
        stack[static_cast<std::size_t>(d - 3)] = cond > 0.0 ? then_v : else_v;
        d -= 2;
        break;
      }
      default: {
        const double a = stack[static_cast<std::size_t>(d - 1)];  // first argument
        const double b = stack[static_cast<std::size_t>(d - 2)];
        stack[static_cast<std::size_t>(d - 2)] = apply_binary(it->op, a, b);
        d -= 1;
      }
    }
  }
  assert(d == 1);
  if (nodes_executed) *nodes_executed += program.size();
  return stack[0];
}

long eval_case_range(const Program& program, const FitnessCaseTable& table, std::int64_t begin,
                     std::int64_t end) {
  thread_local std::vector<double> buf;
  const int rows = stack_rows(program);
  buf.resize(static_cast<std::size_t>(rows) * kChunk);
  double* const stack = buf.data();

  long hits = 0;
  for (std::int64_t c0 = begin; c0 < end; c0 += kChunk) {
    const int len = static_cast<int>(std::min<std::int64_t>(kChunk, end - c0));
    int d = 0;
    for (auto it = program.nodes.rbegin(); it != program.nodes.rend(); ++it) {
      switch (it->op) {
        case Op::Feature: {
          const double* col = table.column(it->feature).data() + c0;
          std::memcpy(stack + static_cast<std::ptrdiff_t>(d) * kChunk, col,
                      static_cast<std::size_t>(len) * sizeof(double));
          ++d;
          break;
        }
        case Op::Constant: {
          double* row = stack + static_cast<std::ptrdiff_t>(d) * kChunk;
          const double v = it->value;
          for (int i = 0; i < len; ++i) row[i] = v;
          ++d;
          break;
        }
        case Op::If: {
          const double* cond = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          const double* then_v = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          double* out = stack + static_cast<std::ptrdiff_t>(d - 3) * kChunk;
          for (int i = 0; i < len; ++i) out[i] = cond[i] > 0.0 ? then_v[i] : out[i];
          d -= 2;
          break;
        }
        case Op::Add: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) b[i] = a[i] + b[i];
          --d;
          break;
        }
        case Op::Sub: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) b[i] = a[i] - b[i];
          --d;
          break;
        }
        case Op::Mul: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) b[i] = a[i] * b[i];
          --d;
          break;
        }
        case Op::Div: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) {
            b[i] = std::fabs(b[i]) < kDivEpsilon ? 1.0 : a[i] / b[i];
          }
          --d;
          break;
        }
        case Op::Gt: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) b[i] = a[i] > b[i] ? 1.0 : 0.0;
          --d;
          break;
        }
        case Op::Lt: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) b[i] = a[i] < b[i] ? 1.0 : 0.0;
          --d;
          break;
        }
        case Op::Eq: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) b[i] = a[i] == b[i] ? 1.0 : 0.0;
          --d;
          break;
        }
        case Op::And: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) b[i] = (a[i] > 0.0 && b[i] > 0.0) ? 1.0 : 0.0;
          --d;
          break;
        }
        case Op::Or: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) b[i] = (a[i] > 0.0 || b[i] > 0.0) ? 1.0 : 0.0;
          --d;
          break;
        }
        case Op::Nand: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) b[i] = (a[i] > 0.0 && b[i] > 0.0) ? 0.0 : 1.0;
          --d;
          break;
        }
        case Op::Nor: {
          const double* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kChunk;
          double* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kChunk;
          for (int i = 0; i < len; ++i) b[i] = (a[i] > 0.0 || b[i] > 0.0) ? 0.0 : 1.0;
          --d;
          break;
        }
      }
    }
    assert(d == 1);
    const std::uint8_t* tgt = table.targets.data() + c0;
    long chunk_hits = 0;
    for (int i = 0; i < len; ++i) {
      chunk_hits += (classify(stack[i]) == (tgt[i] != 0)) ? 1 : 0;
    }
    hits += chunk_hits;
  }
  return hits;
}

BlockHits eval_block_scalar(const Program& program, const FitnessCaseTable& table, int block) {
  const std::int64_t begin = table.block_begin(block);
  const std::int64_t len = table.block_length(block);
  BlockHits out;
  out.cases = len;
  out.hits = eval_case_range(program, table, begin, begin + len);
  return out;
}

bool boolean_compatible(const Program& program) {
  for (const Node& node : program.nodes) {
    switch (node.op) {
      case Op::And:
      case Op::Or:
      case Op::Nand:
      case Op::Nor:
      case Op::Feature:
        break;
      default:
        return false;
    }
  }
  return true;
}

long eval_word_range(const Program& program, const BitCaseTable& table, std::int64_t word_begin,
                     std::int64_t word_end) {
  assert(boolean_compatible(program));
  thread_local std::vector<std::uint64_t> buf;
  const int rows = stack_rows(program);
  buf.resize(static_cast<std::size_t>(rows) * kWordChunk);
  std::uint64_t* const stack = buf.data();

  const std::int64_t last_word = table.word_count() - 1;
  long hits = 0;
  for (std::int64_t w0 = word_begin; w0 < word_end; w0 += kWordChunk) {
    const int len = static_cast<int>(std::min<std::int64_t>(kWordChunk, word_end - w0));
    int d = 0;
    for (auto it = program.nodes.rbegin(); it != program.nodes.rend(); ++it) {
      switch (it->op) {
        case Op::Feature: {
          const std::uint64_t* col =
              table.input_masks[static_cast<std::size_t>(it->feature)].data() + w0;
          std::memcpy(stack + static_cast<std::ptrdiff_t>(d) * kWordChunk, col,
                      static_cast<std::size_t>(len) * sizeof(std::uint64_t));
          ++d;
          break;
        }
        case Op::And: {
          const std::uint64_t* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kWordChunk;
          std::uint64_t* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kWordChunk;
          for (int i = 0; i < len; ++i) b[i] = a[i] & b[i];
          --d;
          break;
        }
        case Op::Or: {
          const std::uint64_t* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kWordChunk;
          std::uint64_t* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kWordChunk;
          for (int i = 0; i < len; ++i) b[i] = a[i] | b[i];
          --d;
          break;
        }
        case Op::Nand: {
          const std::uint64_t* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kWordChunk;
          std::uint64_t* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kWordChunk;
          for (int i = 0; i < len; ++i) b[i] = ~(a[i] & b[i]);
          --d;
          break;
        }
        case Op::Nor: {
          const std::uint64_t* a = stack + static_cast<std::ptrdiff_t>(d - 1) * kWordChunk;
          std::uint64_t* b = stack + static_cast<std::ptrdiff_t>(d - 2) * kWordChunk;
          for (int i = 0; i < len; ++i) b[i] = ~(a[i] | b[i]);
          --d;
          break;
        }
        default:
          assert(false);
      }
    }
    assert(d == 1);
    const std::uint64_t* tgt = table.target_words.data() + w0;
    long chunk_hits = 0;
    for (int i = 0; i < len; ++i) {
      std::uint64_t agree = ~(stack[i] ^ tgt[i]);
      if (w0 + i == last_word) agree &= table.word_mask(last_word);
      else agree &= table.lane_width >= 64 ? ~0ull : ((1ull << table.lane_width) - 1);
      chunk_hits += std::popcount(agree);
    }
    hits += chunk_hits;
  }
  return hits;
}

BlockHits eval_block_bits(const Program& program, const BitCaseTable& table, int block) {
  const std::int64_t wbegin = table.block_begin_word(block);
  const std::int64_t wcount = table.block_word_count(block);
  BlockHits out;
  out.cases = table.block_case_count(block);
  out.hits = eval_word_range(program, table, wbegin, wbegin + wcount);
  return out;
}

void update_state(EvalState& state, long block_hits, long block_cases) {
  assert(state.status == MemberStatus::Active);
  assert(block_hits >= 0 && block_hits <= block_cases);
  state.hits += block_hits;
  state.cases_evaluated += block_cases;
}

}  // namespace tsgp
