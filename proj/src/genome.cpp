#include "tsgp/genome.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace tsgp {

namespace {

constexpr int kOperatorRetries = 10;
constexpr int kMutationGrowMin = 2;
constexpr int kMutationGrowMax = 4;

int draw_index(Rng& rng, int bound) {
  assert(bound > 0);
  return static_cast<int>(std::uniform_int_distribution<std::uint32_t>(
      0, static_cast<std::uint32_t>(bound - 1))(rng));
}

bool draw_prob(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::bernoulli_distribution(p)(rng);
}

Node draw_terminal(Rng& rng, const PrimitiveSet& prims) {
  const int choices = prims.terminal_choices();
  const int pick = draw_index(rng, choices);
  if (pick < prims.feature_count) {
    return Node::feature_terminal(pick);
  }
  const double v =
      std::uniform_real_distribution<double>(prims.constant_min, prims.constant_max)(rng);
  return Node::constant_terminal(v);
}

// Appends a random subtree in prefix order. `levels_left` counts nodes along
// the path including the one emitted here, so levels_left == 1 forces a
// terminal.
void grow_subtree(Rng& rng, const PrimitiveSet& prims, int levels_left, bool full,
                  std::vector<Node>& out) {
  const int nfun = static_cast<int>(prims.functions.size());
  bool pick_function;
  if (levels_left <= 1) {
    pick_function = false;
  } else if (full) {
    pick_function = true;
  } else {
    // grow: uniform over the combined primitive set
    pick_function = draw_index(rng, nfun + prims.terminal_choices()) < nfun;
  }
  if (!pick_function) {
    out.push_back(draw_terminal(rng, prims));
    return;
  }
  const Op op = prims.functions[static_cast<std::size_t>(draw_index(rng, nfun))];
  out.push_back(Node::function(op));
  for (int i = 0; i < arity(op); ++i) {
    grow_subtree(rng, prims, levels_left - 1, full, out);
  }
}

bool within_limits(const Program& p, const TreeLimits& limits) {
  return p.size() <= limits.max_size && p.depth() <= limits.max_depth;
}

// Koza-style 90/10 point bias: function nodes with probability 0.9, leaves
// otherwise. Keeps breeding disruptive enough that the population does not
// collapse onto near-identical genomes.
std::int32_t draw_operator_point(Rng& rng, const Program& p) {
  if (p.size() == 1) return 0;
  std::vector<std::int32_t> pool;
  pool.reserve(static_cast<std::size_t>(p.size()));
  const bool want_function = draw_prob(rng, 0.9);
  for (std::int32_t i = 0; i < p.size(); ++i) {
    if ((arity(p.nodes[static_cast<std::size_t>(i)].op) > 0) == want_function) {
      pool.push_back(i);
    }
  }
  if (pool.empty()) return draw_index(rng, p.size());
  return pool[static_cast<std::size_t>(draw_index(rng, static_cast<int>(pool.size())))];
}

Program copy_of_parent(const Program& parent) {
  Program copy;
  copy.nodes = parent.nodes;
  copy.unmodified = true;
  copy.cached_fitness = parent.cached_fitness;
  return copy;
}

// A child equal to a parent genome is an intact survivor and inherits that
// parent's cached fitness.
void finalize_child_flags(Program& child, const Program& a, const Program& b) {
  if (child.nodes == a.nodes) {
    child.unmodified = true;
    child.cached_fitness = a.cached_fitness;
  } else if (child.nodes == b.nodes) {
    child.unmodified = true;
    child.cached_fitness = b.cached_fitness;
  } else {
    child.unmodified = false;
    child.cached_fitness.reset();
  }
}

}  // namespace

int arity(Op op) {
  switch (op) {
    case Op::If:
      return 3;
    case Op::Feature:
    case Op::Constant:
      return 0;
    default:
      return 2;
  }
}

bool is_terminal(Op op) { return arity(op) == 0; }

const char* op_token(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Gt: return ">";
    case Op::Lt: return "<";
    case Op::Eq: return "==";
    case Op::And: return "AND";
    case Op::Or: return "OR";
    case Op::If: return "IF";
    case Op::Nand: return "NAND";
    case Op::Nor: return "NOR";
    case Op::Feature: return "x";
    case Op::Constant: return "c";
  }
  return "?";
}

PrimitiveSet PrimitiveSet::classification(std::int32_t feature_count) {
  PrimitiveSet set;
  set.functions = {Op::Mul, Op::Div, Op::Add, Op::Sub, Op::Gt,
                   Op::Lt,  Op::Eq,  Op::And, Op::Or,  Op::If};
  set.feature_count = feature_count;
  set.use_constants = true;
  return set;
}

PrimitiveSet PrimitiveSet::boolean(std::int32_t feature_count) {
  PrimitiveSet set;
  set.functions = {Op::And, Op::Or, Op::Nand, Op::Nor};
  set.feature_count = feature_count;
  set.use_constants = false;
  return set;
}

std::int32_t Program::depth() const { return compute_depth(nodes); }

bool arity_consistent(std::span<const Node> nodes) {
  if (nodes.empty()) return false;
  std::int64_t need = 1;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    need += arity(nodes[i].op) - 1;
    if (need == 0 && i + 1 != nodes.size()) return false;  // trailing nodes
    if (need < 0) return false;
  }
  return need == 0;
}

std::int32_t compute_depth(std::span<const Node> nodes) {
  std::int32_t max_depth = 0;
  std::vector<std::int32_t> pending;  // children still owed per open function
  for (const Node& node : nodes) {
    const auto d = static_cast<std::int32_t>(pending.size()) + 1;
    max_depth = std::max(max_depth, d);
    const int a = arity(node.op);
    if (a > 0) {
      pending.push_back(a);
    } else {
      while (!pending.empty() && --pending.back() == 0) pending.pop_back();
    }
  }
  return max_depth;
}

std::int32_t subtree_end(std::span<const Node> nodes, std::int32_t root) {
  std::int64_t need = 1;
  auto i = static_cast<std::size_t>(root);
  while (need > 0) {
    assert(i < nodes.size());
    need += arity(nodes[i].op) - 1;
    ++i;
  }
  return static_cast<std::int32_t>(i);
}

Program random_program(Rng& rng, const PrimitiveSet& prims, const TreeLimits& limits,
                       InitMethod method, int max_init_depth) {
  assert(max_init_depth >= 1 && max_init_depth <= limits.max_depth);
  Program p;
  for (;;) {
    p.nodes.clear();
    grow_subtree(rng, prims, max_init_depth, method == InitMethod::Full, p.nodes);
    if (within_limits(p, limits)) break;
  }
  return p;
}

std::vector<Program> ramped_half_and_half(Rng& rng, const PrimitiveSet& prims,
                                          const TreeLimits& limits, int count, int min_depth,
                                          int max_depth) {
  std::vector<Program> population;
  population.reserve(static_cast<std::size_t>(count));
  const int span = max_depth - min_depth + 1;
  for (int i = 0; i < count; ++i) {
    const int depth = min_depth + (i / 2) % span;
    const InitMethod method = (i % 2 == 0) ? InitMethod::Grow : InitMethod::Full;
    population.push_back(random_program(rng, prims, limits, method, depth));
  }
  return population;
}

std::pair<Program, Program> crossover_at(const Program& a, const Program& b,
                                         std::int32_t point_a, std::int32_t point_b) {
  const std::int32_t end_a = subtree_end(a.nodes, point_a);
  const std::int32_t end_b = subtree_end(b.nodes, point_b);

  auto splice = [](const Program& host, std::int32_t from, std::int32_t to,
                   const Program& donor, std::int32_t dfrom, std::int32_t dto) {
    Program child;
    child.nodes.reserve(host.nodes.size() - static_cast<std::size_t>(to - from) +
                        static_cast<std::size_t>(dto - dfrom));
    child.nodes.insert(child.nodes.end(), host.nodes.begin(), host.nodes.begin() + from);
    child.nodes.insert(child.nodes.end(), donor.nodes.begin() + dfrom, donor.nodes.begin() + dto);
    child.nodes.insert(child.nodes.end(), host.nodes.begin() + to, host.nodes.end());
    return child;
  };

  return {splice(a, point_a, end_a, b, point_b, end_b),
          splice(b, point_b, end_b, a, point_a, end_a)};
}

std::pair<Program, Program> subtree_crossover(const Program& a, const Program& b, Rng& rng,
                                              const TreeLimits& limits) {
  Program c1, c2;
  bool ok1 = false, ok2 = false;
  for (int attempt = 0; attempt < kOperatorRetries; ++attempt) {
    const std::int32_t i = draw_operator_point(rng, a);
    const std::int32_t j = draw_operator_point(rng, b);
    std::tie(c1, c2) = crossover_at(a, b, i, j);
    ok1 = within_limits(c1, limits);
    ok2 = within_limits(c2, limits);
    if (ok1 && ok2) break;
  }
  if (!ok1) c1 = copy_of_parent(a);
  if (!ok2) c2 = copy_of_parent(b);
  finalize_child_flags(c1, a, b);
  finalize_child_flags(c2, a, b);
  return {std::move(c1), std::move(c2)};
}

Program subtree_mutation(const Program& parent, Rng& rng, const PrimitiveSet& prims,
                         const TreeLimits& limits) {
  std::vector<Node> replacement;
  for (int attempt = 0; attempt < kOperatorRetries; ++attempt) {
    const std::int32_t point = draw_operator_point(rng, parent);
    const std::int32_t end = subtree_end(parent.nodes, point);
    const int depth =
        kMutationGrowMin + draw_index(rng, kMutationGrowMax - kMutationGrowMin + 1);
    replacement.clear();
    grow_subtree(rng, prims, depth, /*full=*/false, replacement);

    Program child;
    child.nodes.reserve(parent.nodes.size() - static_cast<std::size_t>(end - point) +
                        replacement.size());
    child.nodes.insert(child.nodes.end(), parent.nodes.begin(), parent.nodes.begin() + point);
    child.nodes.insert(child.nodes.end(), replacement.begin(), replacement.end());
    child.nodes.insert(child.nodes.end(), parent.nodes.begin() + end, parent.nodes.end());
    if (within_limits(child, limits)) {
      finalize_child_flags(child, parent, parent);
      return child;
    }
  }
  return copy_of_parent(parent);
}

BredPair breed(const Program& a, const Program& b, Rng& rng, const PrimitiveSet& prims,
               const BreedParams& params) {
  BredPair out;
  out.first = copy_of_parent(a);
  out.second = copy_of_parent(b);

  if (draw_prob(rng, params.p_crossover)) {
    std::tie(out.first, out.second) = subtree_crossover(a, b, rng, params.limits);
    out.first_touched = true;
    out.second_touched = true;
  }
  if (draw_prob(rng, params.p_mutation)) {
    out.first = subtree_mutation(out.first, rng, prims, params.limits);
    out.first_touched = true;
  }
  if (draw_prob(rng, params.p_mutation)) {
    out.second = subtree_mutation(out.second, rng, prims, params.limits);
    out.second_touched = true;
  }

  finalize_child_flags(out.first, a, b);
  finalize_child_flags(out.second, a, b);
  return out;
}

std::string to_text(const Program& program) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < program.nodes.size(); ++i) {
    const Node& node = program.nodes[i];
    if (i) out.push_back(' ');
    switch (node.op) {
      case Op::Feature:
        std::snprintf(buf, sizeof buf, "x%d", node.feature);
        out += buf;
        break;
      case Op::Constant: {
        std::snprintf(buf, sizeof buf, "%.17g", node.value);
        out += buf;
        // keep at least one fractional digit so constants stay distinguishable
        // from feature indices when read back
        if (out.find_first_of(".einf", out.size() - std::strlen(buf)) == std::string::npos) {
          out += ".0";
        }
        break;
      }
      default:
        out += op_token(node.op);
    }
  }
  return out;
}

Program parse_program(const std::string& text) {
  Program p;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    if (token == "+") p.nodes.push_back(Node::function(Op::Add));
    else if (token == "-") p.nodes.push_back(Node::function(Op::Sub));
    else if (token == "*") p.nodes.push_back(Node::function(Op::Mul));
    else if (token == "/") p.nodes.push_back(Node::function(Op::Div));
    else if (token == ">") p.nodes.push_back(Node::function(Op::Gt));
    else if (token == "<") p.nodes.push_back(Node::function(Op::Lt));
    else if (token == "==") p.nodes.push_back(Node::function(Op::Eq));
    else if (token == "AND") p.nodes.push_back(Node::function(Op::And));
    else if (token == "OR") p.nodes.push_back(Node::function(Op::Or));
    else if (token == "IF") p.nodes.push_back(Node::function(Op::If));
    else if (token == "NAND") p.nodes.push_back(Node::function(Op::Nand));
    else if (token == "NOR") p.nodes.push_back(Node::function(Op::Nor));
    else if (token.size() > 1 && token[0] == 'x' &&
             token.find_first_not_of("0123456789", 1) == std::string::npos) {
      p.nodes.push_back(Node::feature_terminal(std::atoi(token.c_str() + 1)));
    } else {
      char* end = nullptr;
      const double v = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0') {
        throw std::runtime_error("unrecognized program token: " + token);
      }
      p.nodes.push_back(Node::constant_terminal(v));
    }
  }
  if (!arity_consistent(p.nodes)) {
    throw std::runtime_error("program text is not arity-consistent");
  }
  return p;
}

}  // namespace tsgp
