#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tsgp/eval.hpp"
#include "tsgp/genome.hpp"

namespace tsgp {

// One generation's pre-generated tournaments plus the inverted
// member -> (tournament, slot) index used by the loser check.
struct TournamentSet {
  std::int32_t tournament_size = 0;

  struct Slot {
    std::int32_t tournament;
    std::int32_t slot;
  };

  std::vector<std::vector<std::int32_t>> tournaments;
  std::vector<std::vector<Slot>> member_index;

  std::int32_t count() const { return static_cast<std::int32_t>(tournaments.size()); }
};

// parents_needed tournaments of t members each, sampled uniformly with
// replacement from the population.
TournamentSet generate_tournaments(Rng& rng, std::int32_t population_size,
                                   std::int32_t parents_needed, std::int32_t t);

// A member has mathematically lost when even a perfect run over its remaining
// cases cannot beat the current best. Strict: a member that can still tie is
// kept, so any tie-break stays sound.
inline bool tournament_lost(long member_hits, long member_remaining,
                            long best_hits_in_tournament) {
  return member_hits + member_remaining < best_hits_in_tournament;
}

using LoserRule = std::function<bool(long member_hits, long member_remaining, long best_hits)>;

// Runs the tournament check over all Active members at a block boundary:
// flags tournaments that are already lost and demotes members that lost every
// tournament they occupy. Single-threaded; reads every state.
void mark_losers(std::vector<EvalState>& states, const TournamentSet& set, long total_cases,
                 const LoserRule& rule = nullptr);

// Winner = maximum accumulated hits, ties broken by the earliest slot in the
// tournament's ordered member list. Returns the population index.
std::int32_t select_winner(std::span<const std::int32_t> tournament,
                           std::span<const long> final_hits);

// Size-weighted accounting of evaluation avoided. Units are evaluation units:
// raw fitness cases for scalar problems, packed words for bit problems (the
// saving is a ratio, so both readings agree).
struct EfficiencyLedger {
  std::vector<long> skipped_units;
  std::vector<std::int32_t> program_size;
  std::vector<std::uint8_t> would_evaluate;
  long total_units = 0;

  void add(std::int32_t size, long skipped, bool would_eval = true) {
    program_size.push_back(size);
    skipped_units.push_back(skipped);
    would_evaluate.push_back(would_eval ? 1 : 0);
  }
};

// 100 * sum(skipped_i * size_i) / sum(size_i * total_units) over members with
// would_evaluate set. Throws when no member would evaluate.
double efficiency_saving(const EfficiencyLedger& ledger);

// Effective rate counts skipped work as done: sum(size_i * total_units *
// lanes) / elapsed over would-evaluate members.
double effective_gpops(const EfficiencyLedger& ledger, double elapsed_seconds, int lanes);

}  // namespace tsgp
