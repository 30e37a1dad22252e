#include "tsgp/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tsgp {

std::string stats_csv_header() {
  return "generation,best_hits,accuracy,avg_size,saving,gpops,losers,not_sampled,reused,elapsed";
}

std::string stats_csv_row(const GenerationStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%ld,%.6f,%.6f,%.6f,%.6g,%d,%d,%d,%.6f", s.generation,
                s.best_hits, s.accuracy, s.avg_tree_size, s.saving, s.gpops, s.losers,
                s.not_sampled, s.reused, s.elapsed);
  return buf;
}

void write_stats_csv(const std::string& path, std::span<const GenerationStats> stats) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write stats file: " + path);
  out << stats_csv_header() << '\n';
  for (const auto& s : stats) out << stats_csv_row(s) << '\n';
}

std::string audit_csv_header() {
  return "generation,member,tournaments,pruned_block,hits_at_pruning";
}

void append_audit_rows(std::string& out, int generation, const Engine& engine) {
  char buf[128];
  const auto& states = engine.states();
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].status != MemberStatus::Loser) continue;
    std::snprintf(buf, sizeof buf, "%d,%zu,%zu,%d,%ld\n", generation, i,
                  engine.tournaments().member_index[i].size(), engine.pruned_block()[i],
                  states[i].hits);
    out += buf;
  }
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  if (values.empty()) return a;
  for (const double v : values) a.mean += v;
  a.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double acc = 0.0;
    for (const double v : values) acc += (v - a.mean) * (v - a.mean);
    a.sd = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  return a;
}

std::string format_mean_sd(const Aggregate& a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", a.mean, a.sd);
  return buf;
}

}  // namespace tsgp
