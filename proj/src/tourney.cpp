#include "tsgp/tourney.hpp"

#include <cassert>
#include <stdexcept>

namespace tsgp {

TournamentSet generate_tournaments(Rng& rng, std::int32_t population_size,
                                   std::int32_t parents_needed, std::int32_t t) {
  assert(population_size > 0 && t >= 1 && parents_needed >= 0);
  TournamentSet set;
  set.tournament_size = t;
  set.tournaments.resize(static_cast<std::size_t>(parents_needed));
  set.member_index.resize(static_cast<std::size_t>(population_size));

  std::uniform_int_distribution<std::int32_t> pick(0, population_size - 1);
  for (std::int32_t m = 0; m < parents_needed; ++m) {
    auto& tournament = set.tournaments[static_cast<std::size_t>(m)];
    tournament.resize(static_cast<std::size_t>(t));
    for (std::int32_t s = 0; s < t; ++s) {
      const std::int32_t member = pick(rng);
      tournament[static_cast<std::size_t>(s)] = member;
      set.member_index[static_cast<std::size_t>(member)].push_back({m, s});
    }
  }
  return set;
}

void mark_losers(std::vector<EvalState>& states, const TournamentSet& set, long total_cases,
                 const LoserRule& rule) {
  // current best accumulated hits per tournament (KnownFull members
  // contribute their full fitness; losers' frozen partials cannot be maximal)
  std::vector<long> best(set.tournaments.size(), 0);
  for (std::size_t m = 0; m < set.tournaments.size(); ++m) {
    long b = 0;
    for (const std::int32_t member : set.tournaments[m]) {
      b = std::max(b, states[static_cast<std::size_t>(member)].hits);
    }
    best[m] = b;
  }

  for (std::size_t member = 0; member < states.size(); ++member) {
    EvalState& state = states[member];
    if (state.status != MemberStatus::Active) continue;
    const auto& slots = set.member_index[member];
    if (slots.empty()) continue;
    const long remaining = total_cases - state.cases_evaluated;
    bool all_lost = true;
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (!state.lost_flags[k]) {
        const long best_hits = best[static_cast<std::size_t>(slots[k].tournament)];
        const bool lost = rule ? rule(state.hits, remaining, best_hits)
                               : tournament_lost(state.hits, remaining, best_hits);
        if (lost) state.lost_flags[k] = 1;
      }
      all_lost = all_lost && state.lost_flags[k];
    }
    if (all_lost) state.status = MemberStatus::Loser;
  }
}

std::int32_t select_winner(std::span<const std::int32_t> tournament,
                           std::span<const long> final_hits) {
  assert(!tournament.empty());
  std::int32_t winner = tournament[0];
  long best = final_hits[static_cast<std::size_t>(winner)];
  for (std::size_t s = 1; s < tournament.size(); ++s) {
    const std::int32_t member = tournament[s];
    const long hits = final_hits[static_cast<std::size_t>(member)];
    if (hits > best) {
      best = hits;
      winner = member;
    }
  }
  return winner;
}

double efficiency_saving(const EfficiencyLedger& ledger) {
  assert(ledger.total_units > 0);
  double saved = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < ledger.program_size.size(); ++i) {
    if (!ledger.would_evaluate[i]) continue;
    const auto size = static_cast<double>(ledger.program_size[i]);
    saved += static_cast<double>(ledger.skipped_units[i]) * size;
    total += size * static_cast<double>(ledger.total_units);
  }
  if (total == 0.0) {
    throw std::invalid_argument("efficiency_saving: no member would evaluate");
  }
  return 100.0 * saved / total;
}

double effective_gpops(const EfficiencyLedger& ledger, double elapsed_seconds, int lanes) {
  assert(elapsed_seconds > 0.0);
  double work = 0.0;
  for (std::size_t i = 0; i < ledger.program_size.size(); ++i) {
    if (!ledger.would_evaluate[i]) continue;
    work += static_cast<double>(ledger.program_size[i]) *
            static_cast<double>(ledger.total_units) * static_cast<double>(lanes);
  }
  return work / elapsed_seconds;
}

}  // namespace tsgp
