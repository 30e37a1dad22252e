// Benchmark: serial reference vs OpenMP evaluation, standard vs efficient
// pipelines, on one fixed configuration.

#include <omp.h>

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsgp/engine.hpp"

namespace {

struct Row {
  std::string label;
  double seconds = 0.0;
  double actual_gpops = 0.0;
  double effective_gpops = 0.0;
  double saving = 0.0;
};

Row run_case(const std::string& label, tsgp::RunConfig config, const tsgp::Problem& problem) {
  tsgp::Engine engine(config, problem);
  Row row;
  row.label = label;
  long nodes = 0;
  double total_weight = 0.0;
  for (int g = 0; g < config.generations; ++g) {
    const tsgp::GenerationStats stats = engine.step();
    row.seconds += stats.elapsed;
    nodes += stats.nodes_executed;
    row.saving += stats.saved_weight;
    total_weight += stats.total_weight;
  }
  row.saving = total_weight > 0.0 ? 100.0 * row.saving / total_weight : 0.0;
  const double lanes = problem.lanes();
  row.actual_gpops = row.seconds > 0.0 ? static_cast<double>(nodes) * lanes / row.seconds : 0.0;
  row.effective_gpops = row.seconds > 0.0 ? total_weight * lanes / row.seconds : 0.0;
  return row;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchmark the evaluation kernels and pipelines"};
  tsgp::RunConfig config;
  config.population_size = 1000;
  config.generations = 10;
  config.tournament_size = 7;
  std::int64_t cases = 20000;
  int address_bits = 0;  // 0 = synthetic classification problem
  app.add_option("--population", config.population_size);
  app.add_option("--generations", config.generations);
  app.add_option("--tournament", config.tournament_size);
  app.add_option("--block-size", config.block_size);
  app.add_option("--cases", cases, "synthetic dataset size");
  app.add_option("--multiplexer", address_bits, "use the K-address-bit multiplexer instead");
  app.add_option("--seed", config.seed);
  CLI11_PARSE(app, argc, argv);

  const tsgp::Problem problem =
      address_bits > 0
          ? tsgp::Problem::from_bits("multiplexer-" + std::to_string(address_bits),
                                     tsgp::build_multiplexer(address_bits), config.block_size)
          : tsgp::Problem::from_scalar("synthetic-shuttle",
                                       tsgp::synthetic_shuttle_like(cases, 9021),
                                       config.block_size);

  const int hw = omp_get_max_threads();
  std::vector<Row> rows;

  tsgp::RunConfig serial = config;
  serial.worker_count = 1;
  rows.push_back(run_case("standard, serial", serial, problem));

  tsgp::RunConfig parallel = config;
  parallel.worker_count = hw;
  rows.push_back(run_case("standard, " + std::to_string(hw) + " threads", parallel, problem));

  tsgp::RunConfig efficient = parallel;
  efficient.efficient_selection = true;
  rows.push_back(run_case("efficient, " + std::to_string(hw) + " threads", efficient, problem));

  tsgp::RunConfig full = efficient;
  full.reuse_unmodified = true;
  full.skip_unsampled = true;
  rows.push_back(
      run_case("efficient+reuse+skip, " + std::to_string(hw) + " threads", full, problem));

  std::printf("problem=%s cases=%lld pop=%d gens=%d t=%d\n", problem.name.c_str(),
              static_cast<long long>(problem.total_cases()), config.population_size,
              config.generations, config.tournament_size);
  std::printf("%-34s %10s %14s %14s %9s %9s\n", "pipeline", "eval s", "GPop/s", "eff GPop/s",
              "saving%", "speedup");
  const double base = rows.front().seconds;
  for (const Row& row : rows) {
    std::printf("%-34s %10.3f %14.3e %14.3e %9.2f %8.2fx\n", row.label.c_str(), row.seconds,
                row.actual_gpops, row.effective_gpops, row.saving,
                row.seconds > 0.0 ? base / row.seconds : 0.0);
  }
  return 0;
}
