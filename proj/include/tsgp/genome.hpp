#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tsgp {

using Rng = std::mt19937_64;

// Node opcodes. The classification set is {*, /, +, -, >, <, ==, AND, OR, IF};
// the Boolean set is {AND, OR, NAND, NOR}. AND/OR are shared: over {0,1}
// inputs the real-valued truth rule (operand > 0) coincides with the gate.
enum class Op : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,  // protected: |denominator| < 1e-9 yields 1.0
  Gt,
  Lt,
  Eq,
  And,
  Or,
  If,
  Nand,
  Nor,
  Feature,   // terminal, payload = feature index
  Constant,  // terminal, payload = value
};

int arity(Op op);
bool is_terminal(Op op);
const char* op_token(Op op);

struct Node {
  Op op = Op::Constant;
  std::int32_t feature = 0;  // meaningful when op == Feature
  double value = 0.0;        // meaningful when op == Constant

  static Node function(Op op) { return Node{op, 0, 0.0}; }
  static Node feature_terminal(std::int32_t index) { return Node{Op::Feature, index, 0.0}; }
  static Node constant_terminal(double v) { return Node{Op::Constant, 0, v}; }

  bool operator==(const Node& other) const {
    return op == other.op && feature == other.feature && value == other.value;
  }
};

// The active primitives of a problem: which functions may appear, how many
// input features exist and whether constant terminals are drawn.
struct PrimitiveSet {
  std::vector<Op> functions;
  std::int32_t feature_count = 0;
  bool use_constants = false;
  double constant_min = -20000.0;
  double constant_max = 20000.0;

  static PrimitiveSet classification(std::int32_t feature_count);
  static PrimitiveSet boolean(std::int32_t feature_count);

  int terminal_choices() const { return feature_count + (use_constants ? 1 : 0); }
};

struct TreeLimits {
  std::int32_t max_size = 1000;
  std::int32_t max_depth = 50;
};

// A program is a prefix-ordered (pre-order) genome. `unmodified` marks a
// child that is genetically identical to a previous-generation parent;
// such survivors carry the parent's fully evaluated fitness in
// `cached_fitness` when it was known.
struct Program {
  std::vector<Node> nodes;
  bool unmodified = false;
  std::optional<long> cached_fitness;

  std::int32_t size() const { return static_cast<std::int32_t>(nodes.size()); }
  std::int32_t depth() const;
  bool same_genome(const Program& other) const { return nodes == other.nodes; }
};

// Prefix-walk helpers.
bool arity_consistent(std::span<const Node> nodes);
std::int32_t compute_depth(std::span<const Node> nodes);
// Index one past the subtree rooted at `root`.
std::int32_t subtree_end(std::span<const Node> nodes, std::int32_t root);

enum class InitMethod { Grow, Full };

Program random_program(Rng& rng, const PrimitiveSet& prims, const TreeLimits& limits,
                       InitMethod method, int max_init_depth);

// Standard ramped half-and-half: depths cycle over [min_depth, max_depth],
// alternating grow and full.
std::vector<Program> ramped_half_and_half(Rng& rng, const PrimitiveSet& prims,
                                          const TreeLimits& limits, int count,
                                          int min_depth = 2, int max_depth = 6);

// Deterministic core of crossover: swap the subtrees rooted at point_a/point_b.
std::pair<Program, Program> crossover_at(const Program& a, const Program& b,
                                         std::int32_t point_a, std::int32_t point_b);

// Uniform crossover points, K=10 retries against the limits, then the
// offending offspring falls back to a verbatim copy of its own parent.
std::pair<Program, Program> subtree_crossover(const Program& a, const Program& b, Rng& rng,
                                              const TreeLimits& limits);

// Replaces a uniformly chosen subtree by a freshly grown one (grow method,
// depth 2..6). K=10 retries, then a verbatim parent copy.
Program subtree_mutation(const Program& parent, Rng& rng, const PrimitiveSet& prims,
                         const TreeLimits& limits);

struct BreedParams {
  double p_crossover = 0.5;
  double p_mutation = 0.5;
  TreeLimits limits;
};

struct BredPair {
  Program first;
  Program second;
  // Whether crossover or mutation fired on the child at all. A child that is
  // unmodified *and* untouched survived by the luck of the operator draws,
  // not through an operator fallback.
  bool first_touched = false;
  bool second_touched = false;
};

// Crossover is decided once per pair, mutation once per child, independently.
// Children identical to either parent are flagged unmodified and inherit that
// parent's cached fitness.
BredPair breed(const Program& a, const Program& b, Rng& rng, const PrimitiveSet& prims,
               const BreedParams& params);

// One program per line, space-separated prefix tokens. Constants always carry
// a fractional digit and round-trip exactly.
std::string to_text(const Program& program);
Program parse_program(const std::string& text);

}  // namespace tsgp
