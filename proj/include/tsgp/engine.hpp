#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsgp/data.hpp"
#include "tsgp/eval.hpp"
#include "tsgp/genome.hpp"
#include "tsgp/tourney.hpp"

namespace tsgp {

// A benchmark problem: the primitive set plus exactly one fitness-case table.
struct Problem {
  std::string name;
  PrimitiveSet prims;
  std::shared_ptr<const FitnessCaseTable> scalar;
  std::shared_ptr<const BitCaseTable> bits;

  static Problem from_scalar(std::string name, FitnessCaseTable table, std::int64_t block_size);
  static Problem from_bits(std::string name, BitCaseTable table, std::int64_t block_size);

  bool is_boolean() const { return bits != nullptr; }
  std::int64_t total_cases() const;
  std::int64_t total_units() const;  // cases, or packed words for bit problems
  int lanes() const { return bits ? bits->lane_width : 1; }
  int block_count() const;
  std::int64_t block_units(int block) const;
};

struct RunConfig {
  std::int32_t population_size = 4000;
  int generations = 50;
  std::int32_t tournament_size = 7;
  double p_crossover = 0.5;
  double p_mutation = 0.5;
  std::int32_t max_depth = 50;
  std::int32_t max_size = 1000;
  std::int64_t block_size = 2400;
  double elitism_fraction = 0.0;
  bool efficient_selection = false;
  bool reuse_unmodified = false;
  bool skip_unsampled = false;
  bool strict_elitism = false;
  std::uint64_t seed = 1;
  int worker_count = 0;  // 0 = all hardware threads

  std::int32_t elite_count() const {
    return static_cast<std::int32_t>(elitism_fraction * population_size);
  }
};

struct GenerationStats {
  int generation = 0;
  long best_hits = 0;
  double mean_hits = 0.0;
  double accuracy = 0.0;  // percent, of the best fully known member
  double avg_tree_size = 0.0;
  double saving = 0.0;  // percent
  double gpops = 0.0;   // effective rate
  int losers = 0;
  int not_sampled = 0;
  int reused = 0;
  double elapsed = 0.0;  // evaluation + tournament checking, seconds
  // size-weighted work bookkeeping behind saving/gpops
  double saved_weight = 0.0;
  double total_weight = 0.0;
  long nodes_executed = 0;  // interpreter steps actually taken
};

// Top k members by accumulated hits (partial for losers), ties broken by the
// lower population index.
std::vector<std::int32_t> elitism_select(std::span<const long> hits, std::int32_t k);

// One evolutionary run. step() evaluates the current population (standard
// full evaluation, or the efficient tournament-pruning pipeline when
// configured), resolves winners, applies elitism and breeding, and leaves the
// evaluated generation's members, states, tournaments and winners inspectable.
class Engine {
 public:
  Engine(RunConfig config, Problem problem);

  GenerationStats step();

  int generation() const { return generation_; }
  const RunConfig& config() const { return config_; }
  const Problem& problem() const { return problem_; }
  const std::vector<Program>& population() const { return population_; }

  // snapshots of the generation evaluated by the last step()
  const std::vector<Program>& evaluated_population() const { return evaluated_; }
  const std::vector<EvalState>& states() const { return states_; }
  const TournamentSet& tournaments() const { return tournaments_; }
  const std::vector<std::int32_t>& winners() const { return winners_; }
  const std::vector<long>& final_hits() const { return hits_; }
  // block index at which a loser was pruned, -1 otherwise (audit trail)
  const std::vector<int>& pruned_block() const { return pruned_block_; }

  // Full-evaluation hits of an evaluated member; pure, the run is unaffected.
  long force_complete(std::int32_t member) const;

  // Test hook: replaces the loser predicate used at block boundaries.
  void set_loser_rule(LoserRule rule) { loser_rule_ = std::move(rule); }

 private:
  void init_states(std::int32_t elite_count);
  void evaluate_block(const std::vector<std::int32_t>& active, int block);
  GenerationStats make_stats(double elapsed);

  RunConfig config_;
  Problem problem_;
  Rng rng_;
  int generation_ = 0;
  int workers_ = 1;

  std::vector<Program> population_;
  std::vector<Program> evaluated_;
  std::vector<EvalState> states_;
  std::vector<std::uint8_t> reused_;
  std::vector<int> pruned_block_;
  TournamentSet tournaments_;
  std::vector<std::int32_t> winners_;
  std::vector<long> hits_;
  LoserRule loser_rule_;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<GenerationStats> generations;
  double final_accuracy = 0.0;
  long final_best_hits = 0;
  double mean_tree_size = 0.0;
  double eval_seconds = 0.0;
  double saving = 0.0;  // run-level, size-weighted across generations
  double gpops = 0.0;
};

RunResult run_experiment(const RunConfig& config, const Problem& problem);

struct VerifyOptions {
  bool audit_losers = true;
  LoserRule rule;  // injected into the efficient engine only (tests)
};

struct VerifyReport {
  bool ok = true;
  int divergence_generation = -1;
  int divergence_tournament = -1;
  std::string detail;
  long tournaments_checked = 0;
  long losers_audited = 0;
};

// Runs the standard and efficient pipelines in lockstep on one seed and
// asserts per-generation winner identity and next-generation genome identity;
// force-completes every loser and checks none would win a tournament.
// Requires elitism disabled or strict elitism.
VerifyReport verify_lockstep(RunConfig config, const Problem& problem,
                             const VerifyOptions& options = {});

}  // namespace tsgp
