#pragma once

#include <span>
#include <string>
#include <vector>

#include "tsgp/engine.hpp"

namespace tsgp {

// Per-generation stats as comma-separated rows. Wall-time dependent values
// (gpops, elapsed) sit in the trailing columns so comparisons can drop them.
std::string stats_csv_header();
std::string stats_csv_row(const GenerationStats& stats);
void write_stats_csv(const std::string& path, std::span<const GenerationStats> stats);

// Audit rows for one evaluated generation: every pruned member with the block
// at which it was pruned and its frozen hit count.
std::string audit_csv_header();
void append_audit_rows(std::string& out, int generation, const Engine& engine);

struct Aggregate {
  double mean = 0.0;
  double sd = 0.0;
};

Aggregate aggregate(std::span<const double> values);

// "12.34 ± 5.67"
std::string format_mean_sd(const Aggregate& a);

}  // namespace tsgp
