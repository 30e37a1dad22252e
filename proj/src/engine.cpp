#include "tsgp/engine.hpp"

#include <omp.h>

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tsgp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Problem Problem::from_scalar(std::string name, FitnessCaseTable table, std::int64_t block_size) {
  Problem p;
  p.name = std::move(name);
  p.prims = PrimitiveSet::classification(table.feature_count);
  table.block_size = block_size;
  p.scalar = std::make_shared<FitnessCaseTable>(std::move(table));
  return p;
}

Problem Problem::from_bits(std::string name, BitCaseTable table, std::int64_t block_size) {
  Problem p;
  p.name = std::move(name);
  p.prims = PrimitiveSet::boolean(table.feature_count);
  table.block_size = block_size;
  p.bits = std::make_shared<BitCaseTable>(std::move(table));
  return p;
}

std::int64_t Problem::total_cases() const {
  return bits ? bits->case_count : scalar->case_count;
}

std::int64_t Problem::total_units() const {
  return bits ? bits->word_count() : scalar->case_count;
}

int Problem::block_count() const { return bits ? bits->block_count() : scalar->block_count(); }

std::int64_t Problem::block_units(int block) const {
  return bits ? bits->block_word_count(block) : scalar->block_length(block);
}

std::vector<std::int32_t> elitism_select(std::span<const long> hits, std::int32_t k) {
  std::vector<std::int32_t> order(hits.size());
  std::iota(order.begin(), order.end(), 0);
  k = std::min<std::int32_t>(k, static_cast<std::int32_t>(order.size()));
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::int32_t a, std::int32_t b) {
                      const long ha = hits[static_cast<std::size_t>(a)];
                      const long hb = hits[static_cast<std::size_t>(b)];
                      return ha != hb ? ha > hb : a < b;
                    });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

Engine::Engine(RunConfig config, Problem problem)
    : config_(config), problem_(std::move(problem)), rng_(config.seed) {
  if (problem_.prims.feature_count !=
      (problem_.is_boolean() ? problem_.bits->feature_count : problem_.scalar->feature_count)) {
    throw std::invalid_argument("terminal feature count does not match the dataset");
  }
  if (config_.population_size < 2) {
    throw std::invalid_argument("population size must be at least 2");
  }
  workers_ = config_.worker_count > 0 ? config_.worker_count : omp_get_max_threads();
  const TreeLimits limits{config_.max_size, config_.max_depth};
  population_ = ramped_half_and_half(rng_, problem_.prims, limits, config_.population_size);
}

void Engine::init_states(std::int32_t elite_count) {
  const auto n = static_cast<std::size_t>(config_.population_size);
  states_.assign(n, EvalState{});
  reused_.assign(n, 0);
  pruned_block_.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    EvalState& state = states_[i];
    state.lost_flags.assign(tournaments_.member_index[i].size(), 0);
    const Program& member = evaluated_[i];
    if (config_.reuse_unmodified && member.unmodified && member.cached_fitness) {
      // intact survivor: full fitness carries over, nothing to evaluate
      state.status = MemberStatus::KnownFull;
      state.hits = *member.cached_fitness;
      reused_[i] = 1;
    } else if (config_.skip_unsampled && tournaments_.member_index[i].empty() &&
               elite_count == 0) {
      // in no tournament and not an elitism candidate: never evaluated
      state.status = MemberStatus::NotSampled;
    } else {
      state.status = MemberStatus::Active;
    }
  }
}

void Engine::evaluate_block(const std::vector<std::int32_t>& active, int block) {
  const auto count = static_cast<std::int32_t>(active.size());
  const std::int64_t units = problem_.block_units(block);
  auto body = [&](std::int32_t k) {
    const std::int32_t i = active[static_cast<std::size_t>(k)];
    const Program& program = evaluated_[static_cast<std::size_t>(i)];
    const BlockHits r = problem_.is_boolean()
                            ? eval_block_bits(program, *problem_.bits, block)
                            : eval_block_scalar(program, *problem_.scalar, block);
    EvalState& state = states_[static_cast<std::size_t>(i)];
    update_state(state, r.hits, r.cases);
    state.nodes_executed += static_cast<long>(program.size()) * units;
  };
  if (workers_ == 1) {
    // serial reference path
    for (std::int32_t k = 0; k < count; ++k) body(k);
  } else {
#pragma omp parallel for schedule(dynamic, 4) num_threads(workers_)
    for (std::int32_t k = 0; k < count; ++k) body(k);
  }
}

GenerationStats Engine::step() {
  const std::int32_t n = config_.population_size;
  const std::int32_t elite_count = config_.elite_count();
  std::int32_t offspring_needed = n - elite_count;
  // consecutive tournament pairs breed one offspring pair
  const std::int32_t parents_needed = offspring_needed + (offspring_needed & 1);

  evaluated_ = std::move(population_);
  population_.clear();

  // master stream order: tournaments first, then breeding
  tournaments_ = generate_tournaments(rng_, n, parents_needed, config_.tournament_size);
  init_states(elite_count);

  const bool prune = config_.efficient_selection &&
                     !(config_.strict_elitism && elite_count > 0);
  const long total_cases = problem_.total_cases();
  const int blocks = problem_.block_count();

  std::vector<std::int32_t> active;
  active.reserve(static_cast<std::size_t>(n));
  const auto t0 = Clock::now();
  for (int b = 0; b < blocks; ++b) {
    active.clear();
    for (std::int32_t i = 0; i < n; ++i) {
      if (states_[static_cast<std::size_t>(i)].status == MemberStatus::Active) {
        active.push_back(i);
      }
    }
    evaluate_block(active, b);
    if (prune && b + 1 < blocks) {
      mark_losers(states_, tournaments_, total_cases, loser_rule_);
      for (std::int32_t i = 0; i < n; ++i) {
        if (states_[static_cast<std::size_t>(i)].status == MemberStatus::Loser &&
            pruned_block_[static_cast<std::size_t>(i)] < 0) {
          pruned_block_[static_cast<std::size_t>(i)] = b;
        }
      }
    }
  }
  for (auto& state : states_) {
    if (state.status == MemberStatus::Active) {
      assert(state.cases_evaluated == total_cases);
      state.status = MemberStatus::KnownFull;
    }
  }
  const double elapsed = seconds_since(t0);

  hits_.resize(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) {
    hits_[static_cast<std::size_t>(i)] = states_[static_cast<std::size_t>(i)].hits;
  }

  winners_.resize(tournaments_.tournaments.size());
  for (std::size_t m = 0; m < tournaments_.tournaments.size(); ++m) {
    winners_[m] = select_winner(tournaments_.tournaments[m], hits_);
  }

  // parents carry their fully known fitness into breeding
  for (std::int32_t i = 0; i < n; ++i) {
    auto& member = evaluated_[static_cast<std::size_t>(i)];
    if (states_[static_cast<std::size_t>(i)].status == MemberStatus::KnownFull) {
      member.cached_fitness = states_[static_cast<std::size_t>(i)].hits;
    } else {
      member.cached_fitness.reset();
    }
  }

  population_.reserve(static_cast<std::size_t>(n));
  if (elite_count > 0) {
    for (const std::int32_t e : elitism_select(hits_, elite_count)) {
      Program copy = evaluated_[static_cast<std::size_t>(e)];
      copy.unmodified = true;
      population_.push_back(std::move(copy));
    }
  }
  const BreedParams params{config_.p_crossover, config_.p_mutation,
                           TreeLimits{config_.max_size, config_.max_depth}};
  for (std::size_t m = 0; population_.size() < static_cast<std::size_t>(n); m += 2) {
    BredPair pair = breed(evaluated_[static_cast<std::size_t>(winners_[m])],
                          evaluated_[static_cast<std::size_t>(winners_[m + 1])], rng_,
                          problem_.prims, params);
    population_.push_back(std::move(pair.first));
    if (population_.size() < static_cast<std::size_t>(n)) {
      population_.push_back(std::move(pair.second));
    }
  }

  ++generation_;
  return make_stats(elapsed);
}

GenerationStats Engine::make_stats(double elapsed) {
  const std::int32_t n = config_.population_size;
  GenerationStats stats;
  stats.generation = generation_ - 1;
  stats.elapsed = elapsed;

  const std::int64_t total_units = problem_.total_units();
  const int lane = problem_.lanes();
  EfficiencyLedger ledger;
  ledger.total_units = total_units;

  long best = 0;
  double hit_sum = 0.0;
  long known = 0;
  double size_sum = 0.0;
  for (std::int32_t i = 0; i < n; ++i) {
    const EvalState& state = states_[static_cast<std::size_t>(i)];
    const auto size = evaluated_[static_cast<std::size_t>(i)].size();
    size_sum += size;
    switch (state.status) {
      case MemberStatus::KnownFull:
        best = std::max(best, state.hits);
        hit_sum += static_cast<double>(state.hits);
        ++known;
        break;
      case MemberStatus::Loser:
        ++stats.losers;
        break;
      case MemberStatus::NotSampled:
        ++stats.not_sampled;
        break;
      case MemberStatus::Active:
        assert(false);  // all members settle by the end of the block loop
        break;
    }
    if (reused_[static_cast<std::size_t>(i)]) ++stats.reused;
    stats.nodes_executed += state.nodes_executed;
    const std::int64_t units_evaluated =
        problem_.is_boolean() ? (state.cases_evaluated + lane - 1) / lane
                              : state.cases_evaluated;
    ledger.add(size, total_units - units_evaluated);
  }
  assert(stats.losers + stats.not_sampled + known == n);

  stats.best_hits = best;
  stats.mean_hits = known > 0 ? hit_sum / static_cast<double>(known) : 0.0;
  stats.accuracy = 100.0 * static_cast<double>(best) /
                   static_cast<double>(problem_.total_cases());
  stats.avg_tree_size = size_sum / static_cast<double>(n);
  stats.saving = efficiency_saving(ledger);
  stats.gpops = elapsed > 0.0 ? effective_gpops(ledger, elapsed, lane) : 0.0;
  for (std::size_t i = 0; i < ledger.program_size.size(); ++i) {
    const auto size = static_cast<double>(ledger.program_size[i]);
    stats.saved_weight += size * static_cast<double>(ledger.skipped_units[i]);
    stats.total_weight += size * static_cast<double>(total_units);
  }
  return stats;
}

long Engine::force_complete(std::int32_t member) const {
  const EvalState& state = states_[static_cast<std::size_t>(member)];
  if (state.status == MemberStatus::KnownFull) return state.hits;
  const Program& program = evaluated_[static_cast<std::size_t>(member)];
  if (problem_.is_boolean()) {
    const auto& table = *problem_.bits;
    assert(state.cases_evaluated % table.lane_width == 0);
    const std::int64_t words_done = state.cases_evaluated / table.lane_width;
    return state.hits + eval_word_range(program, table, words_done, table.word_count());
  }
  const auto& table = *problem_.scalar;
  return state.hits + eval_case_range(program, table, state.cases_evaluated, table.case_count);
}

RunResult run_experiment(const RunConfig& config, const Problem& problem) {
  RunResult result;
  result.seed = config.seed;
  Engine engine(config, problem);
  double saved = 0.0, total = 0.0, size_sum = 0.0;
  for (int g = 0; g < config.generations; ++g) {
    GenerationStats stats = engine.step();
    saved += stats.saved_weight;
    total += stats.total_weight;
    size_sum += stats.avg_tree_size;
    result.eval_seconds += stats.elapsed;
    result.final_accuracy = stats.accuracy;
    result.final_best_hits = stats.best_hits;
    result.generations.push_back(stats);
  }
  if (config.generations > 0) {
    result.mean_tree_size = size_sum / config.generations;
    result.saving = total > 0.0 ? 100.0 * saved / total : 0.0;
    result.gpops = result.eval_seconds > 0.0
                       ? total * problem.lanes() / result.eval_seconds
                       : 0.0;
  }
  return result;
}

VerifyReport verify_lockstep(RunConfig config, const Problem& problem,
                             const VerifyOptions& options) {
  if (config.elite_count() > 0 && !config.strict_elitism) {
    throw std::invalid_argument(
        "verification requires elitism disabled or strict elitism: the efficient "
        "pipeline documents a path divergence under partial-fitness elitism");
  }
  RunConfig standard_cfg = config;
  standard_cfg.efficient_selection = false;
  RunConfig efficient_cfg = config;
  efficient_cfg.efficient_selection = true;

  Engine standard(standard_cfg, problem);
  Engine efficient(efficient_cfg, problem);
  if (options.rule) efficient.set_loser_rule(options.rule);

  VerifyReport report;
  std::vector<long> full_hits;
  for (int g = 0; g < config.generations; ++g) {
    standard.step();
    efficient.step();

    const auto& tournaments = efficient.tournaments().tournaments;
    assert(tournaments == standard.tournaments().tournaments);

    for (std::size_t m = 0; m < tournaments.size(); ++m) {
      ++report.tournaments_checked;
      if (efficient.winners()[m] != standard.winners()[m]) {
        report.ok = false;
        report.divergence_generation = g;
        report.divergence_tournament = static_cast<int>(m);
        report.detail = "winner mismatch: standard selected member " +
                        std::to_string(standard.winners()[m]) + ", efficient selected " +
                        std::to_string(efficient.winners()[m]);
        return report;
      }
    }

    if (options.audit_losers) {
      const auto n = static_cast<std::int32_t>(efficient.states().size());
      full_hits.assign(static_cast<std::size_t>(n), 0);
      for (std::int32_t i = 0; i < n; ++i) {
        const auto& state = efficient.states()[static_cast<std::size_t>(i)];
        if (state.status == MemberStatus::NotSampled) continue;  // in no tournament
        full_hits[static_cast<std::size_t>(i)] = efficient.force_complete(i);
        if (state.status == MemberStatus::Loser) ++report.losers_audited;
      }
      for (std::size_t m = 0; m < tournaments.size(); ++m) {
        const std::int32_t rewinner = select_winner(tournaments[m], full_hits);
        if (rewinner != efficient.winners()[m]) {
          report.ok = false;
          report.divergence_generation = g;
          report.divergence_tournament = static_cast<int>(m);
          report.detail = "loser audit: member " + std::to_string(rewinner) +
                          " would win tournament " + std::to_string(m) +
                          " under full evaluation but was pruned";
          return report;
        }
      }
    }

    const auto& next_std = standard.population();
    const auto& next_eff = efficient.population();
    for (std::size_t i = 0; i < next_std.size(); ++i) {
      if (!next_std[i].same_genome(next_eff[i])) {
        report.ok = false;
        report.divergence_generation = g;
        report.divergence_tournament = -1;
        report.detail = "next-generation genome mismatch at member " + std::to_string(i);
        return report;
      }
    }
  }
  return report;
}

}  // namespace tsgp
