// Command-line harness: batch experiment runs and standard-vs-efficient
// pipeline verification.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsgp/engine.hpp"
#include "tsgp/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// seed for generated datasets; independent of the run seed so every repeat
// sees the same fitness cases
constexpr std::uint64_t kSyntheticDataSeed = 9021;

struct CliOptions {
  std::string problem;
  std::string data_path;
  std::string schema;
  tsgp::RunConfig config;
  int repeats = 1;
  std::string out_dir;
  bool audit = false;
  bool compare = false;
  std::int64_t synthetic_cases = 58000;
  int lanes = 0;  // 0 = problem default
  std::string config_file;
};

bool parse_bool(const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw std::runtime_error("expected a boolean, got '" + value + "'");
}

// Flat key=value config file; command-line flags take precedence, so a key
// is applied only when its flag was not given.
void apply_config_file(const CLI::App* cmd, CliOptions& opt) {
  std::ifstream in(opt.config_file);
  if (!in) throw std::runtime_error("cannot open config file: " + opt.config_file);
  auto given = [&](const std::string& flag) { return cmd->count(flag) > 0; };
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto begin = line.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r\n");
    line = line.substr(begin, end - begin + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(opt.config_file + ":" + std::to_string(line_no) +
                               ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (given("--" + key)) continue;
    if (key == "problem") opt.problem = value;
    else if (key == "data-path") opt.data_path = value;
    else if (key == "schema") opt.schema = value;
    else if (key == "tournament") opt.config.tournament_size = std::stoi(value);
    else if (key == "population") opt.config.population_size = std::stoi(value);
    else if (key == "generations") opt.config.generations = std::stoi(value);
    else if (key == "block-size") opt.config.block_size = std::stoll(value);
    else if (key == "elitism") opt.config.elitism_fraction = std::stod(value);
    else if (key == "efficient") opt.config.efficient_selection = parse_bool(value);
    else if (key == "reuse") opt.config.reuse_unmodified = parse_bool(value);
    else if (key == "skip-unsampled") opt.config.skip_unsampled = parse_bool(value);
    else if (key == "strict-elitism") opt.config.strict_elitism = parse_bool(value);
    else if (key == "lanes") opt.lanes = std::stoi(value);
    else if (key == "workers") opt.config.worker_count = std::stoi(value);
    else if (key == "seed") opt.config.seed = std::stoull(value);
    else if (key == "repeats") opt.repeats = std::stoi(value);
    else if (key == "out") opt.out_dir = value;
    else if (key == "audit") opt.audit = parse_bool(value);
    else if (key == "cases") opt.synthetic_cases = std::stoll(value);
    else {
      throw std::runtime_error(opt.config_file + ":" + std::to_string(line_no) +
                               ": unrecognized key '" + key + "'");
    }
  }
}

tsgp::LoadSchema parse_schema(const std::string& text) {
  tsgp::LoadSchema schema;
  std::istringstream in(text);
  std::string pair;
  while (std::getline(in, pair, ';')) {
    if (pair.empty()) continue;
    const auto eq = pair.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("schema entries must look like key=value: " + pair);
    }
    const std::string key = pair.substr(0, eq);
    const std::string value = pair.substr(eq + 1);
    if (key == "label") {
      schema.label_column = value == "last" ? -1 : std::stoi(value);
    } else if (key == "positive") {
      std::istringstream labels(value);
      std::string label;
      while (std::getline(labels, label, '|')) schema.positive_labels.push_back(label);
    } else if (key == "delim") {
      if (value == "auto") schema.delimiter = 0;
      else if (value == "comma") schema.delimiter = ',';
      else if (value == "space") schema.delimiter = ' ';
      else if (value.size() == 1) schema.delimiter = value[0];
      else throw std::runtime_error("unrecognized delimiter: " + value);
    } else {
      throw std::runtime_error("unrecognized schema key: " + key);
    }
  }
  return schema;
}

tsgp::Problem build_problem(const CliOptions& opt) {
  const auto& name = opt.problem;
  const std::int64_t block = opt.config.block_size;

  if (name.rfind("multiplexer-", 0) == 0) {
    const int address_bits = std::stoi(name.substr(12));
    if (address_bits < 1 || address_bits + (1 << address_bits) > 26) {
      throw std::runtime_error("multiplexer address bits out of range: " + name);
    }
    const int lanes = opt.lanes == 0 ? 32 : opt.lanes;
    if (lanes != 32 && lanes != 64) throw std::runtime_error("--lanes must be 32 or 64");
    return tsgp::Problem::from_bits(name, tsgp::build_multiplexer(address_bits, lanes), block);
  }
  if (opt.lanes != 0) {
    throw std::runtime_error("--lanes applies only to Boolean (multiplexer) problems");
  }

  if (name == "synthetic-shuttle") {
    return tsgp::Problem::from_scalar(
        name, tsgp::synthetic_shuttle_like(opt.synthetic_cases, kSyntheticDataSeed), block);
  }

  tsgp::LoadSchema schema;
  if (name == "shuttle") {
    schema.positive_labels = {"1"};
  } else if (name == "kddcup") {
    schema.positive_labels = {"normal."};
  } else if (name != "custom") {
    throw std::runtime_error("unknown problem: " + name +
                             " (expected shuttle, kddcup, multiplexer-K, synthetic-shuttle "
                             "or custom)");
  }
  if (!opt.schema.empty()) schema = parse_schema(opt.schema);
  if (opt.data_path.empty()) {
    throw std::runtime_error("problem '" + name + "' needs --data-path");
  }
  if (name == "custom" && schema.positive_labels.empty()) {
    throw std::runtime_error("custom problems need --schema with a positive=... label set");
  }
  return tsgp::Problem::from_scalar(name, tsgp::load_classification_file(opt.data_path, schema),
                                    block);
}

json config_to_json(const tsgp::RunConfig& c) {
  return json{{"population_size", c.population_size},
              {"generations", c.generations},
              {"tournament_size", c.tournament_size},
              {"p_crossover", c.p_crossover},
              {"p_mutation", c.p_mutation},
              {"max_depth", c.max_depth},
              {"max_size", c.max_size},
              {"block_size", c.block_size},
              {"elitism_fraction", c.elitism_fraction},
              {"efficient_selection", c.efficient_selection},
              {"reuse_unmodified", c.reuse_unmodified},
              {"skip_unsampled", c.skip_unsampled},
              {"strict_elitism", c.strict_elitism},
              {"seed", c.seed},
              {"worker_count", c.worker_count}};
}

// One pipeline over `repeats` seeds, optionally with a per-generation audit
// trail. Writes one stats file per run.
struct PipelineOutcome {
  std::vector<tsgp::RunResult> runs;
};

PipelineOutcome run_pipeline(const CliOptions& opt, const tsgp::Problem& problem,
                             bool efficient, const std::string& tag) {
  PipelineOutcome outcome;
  for (int r = 0; r < opt.repeats; ++r) {
    tsgp::RunConfig config = opt.config;
    config.seed = opt.config.seed + static_cast<std::uint64_t>(r);
    config.efficient_selection = efficient;

    tsgp::RunResult result;
    std::string audit_rows;
    if (opt.audit) {
      tsgp::Engine engine(config, problem);
      result.seed = config.seed;
      double saved = 0.0, total = 0.0, size_sum = 0.0;
      for (int g = 0; g < config.generations; ++g) {
        tsgp::GenerationStats stats = engine.step();
        tsgp::append_audit_rows(audit_rows, g, engine);
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
        result.gpops =
            result.eval_seconds > 0.0 ? total * problem.lanes() / result.eval_seconds : 0.0;
      }
    } else {
      result = tsgp::run_experiment(config, problem);
    }

    if (!opt.out_dir.empty()) {
      const fs::path dir(opt.out_dir);
      tsgp::write_stats_csv((dir / ("stats_" + tag + "_seed" + std::to_string(config.seed) +
                                    ".csv")).string(),
                            result.generations);
      if (opt.audit) {
        std::ofstream audit(dir / ("audit_" + tag + "_seed" + std::to_string(config.seed) +
                                   ".csv"));
        audit << tsgp::audit_csv_header() << '\n' << audit_rows;
      }
    }
    outcome.runs.push_back(std::move(result));
  }
  return outcome;
}

json summarize_runs(const PipelineOutcome& outcome) {
  std::vector<double> accuracy, saving, seconds, tree_size, gpops;
  for (const auto& run : outcome.runs) {
    accuracy.push_back(run.final_accuracy);
    saving.push_back(run.saving);
    seconds.push_back(run.eval_seconds);
    tree_size.push_back(run.mean_tree_size);
    gpops.push_back(run.gpops);
  }
  auto agg = [](std::span<const double> v) {
    const tsgp::Aggregate a = tsgp::aggregate(v);
    return json{{"mean", a.mean}, {"sd", a.sd}};
  };
  return json{{"accuracy", agg(accuracy)},
              {"saving", agg(saving)},
              {"eval_seconds", agg(seconds)},
              {"avg_tree_size", agg(tree_size)},
              {"gpops", agg(gpops)}};
}

int cmd_run(const CliOptions& opt) {
  const tsgp::Problem problem = build_problem(opt);
  if (!opt.out_dir.empty()) fs::create_directories(opt.out_dir);

  json doc;
  doc["problem"] = opt.problem;
  doc["total_cases"] = problem.total_cases();
  doc["repeats"] = opt.repeats;
  doc["config"] = config_to_json(opt.config);

  const std::string main_tag = opt.config.efficient_selection ? "efficient" : "standard";
  const PipelineOutcome main_runs = run_pipeline(opt, problem, opt.config.efficient_selection,
                                                 main_tag);
  doc[main_tag] = summarize_runs(main_runs);

  std::optional<PipelineOutcome> baseline;
  if (opt.compare) {
    // paired baseline: the opposite pipeline on the same seeds
    const std::string other_tag = opt.config.efficient_selection ? "standard" : "efficient";
    baseline = run_pipeline(opt, problem, !opt.config.efficient_selection, other_tag);
    doc[other_tag] = summarize_runs(*baseline);
    std::vector<double> speedups;
    for (std::size_t r = 0; r < main_runs.runs.size(); ++r) {
      const auto& eff = opt.config.efficient_selection ? main_runs.runs[r] : baseline->runs[r];
      const auto& std_run =
          opt.config.efficient_selection ? baseline->runs[r] : main_runs.runs[r];
      if (eff.eval_seconds > 0.0) speedups.push_back(std_run.eval_seconds / eff.eval_seconds);
    }
    const tsgp::Aggregate a = tsgp::aggregate(speedups);
    doc["speedup"] = json{{"mean", a.mean}, {"sd", a.sd}};
  }

  if (!opt.out_dir.empty()) {
    std::ofstream out(fs::path(opt.out_dir) / "summary.json");
    out << doc.dump(2) << '\n';
  }

  // one summary row in the style of the paper's result tables
  std::vector<double> accuracy, saving, seconds, tree_size;
  for (const auto& run : main_runs.runs) {
    accuracy.push_back(run.final_accuracy);
    saving.push_back(run.saving);
    seconds.push_back(run.eval_seconds);
    tree_size.push_back(run.mean_tree_size);
  }
  std::printf("problem=%s t=%d pipeline=%s runs=%d\n", opt.problem.c_str(),
              opt.config.tournament_size, main_tag.c_str(), opt.repeats);
  std::printf("  accuracy (%%)       : %s\n",
              tsgp::format_mean_sd(tsgp::aggregate(accuracy)).c_str());
  std::printf("  avg tree size      : %s\n",
              tsgp::format_mean_sd(tsgp::aggregate(tree_size)).c_str());
  std::printf("  eval time (s)      : %s\n",
              tsgp::format_mean_sd(tsgp::aggregate(seconds)).c_str());
  std::printf("  efficiency saving  : %s\n",
              tsgp::format_mean_sd(tsgp::aggregate(saving)).c_str());
  if (opt.compare && doc.contains("speedup")) {
    std::printf("  speedup vs paired  : %.3fx\n", doc["speedup"]["mean"].get<double>());
  }
  return 0;
}

int cmd_verify(const CliOptions& opt) {
  const tsgp::Problem problem = build_problem(opt);
  for (int r = 0; r < opt.repeats; ++r) {
    tsgp::RunConfig config = opt.config;
    config.seed = opt.config.seed + static_cast<std::uint64_t>(r);
    const tsgp::VerifyReport report = tsgp::verify_lockstep(config, problem);
    if (!report.ok) {
      std::fprintf(stderr,
                   "verify FAILED: seed=%llu generation=%d tournament=%d\n  %s\n",
                   static_cast<unsigned long long>(config.seed), report.divergence_generation,
                   report.divergence_tournament, report.detail.c_str());
      return 1;
    }
    std::printf("verify seed=%llu: OK (%ld tournaments checked, %ld losers audited)\n",
                static_cast<unsigned long long>(config.seed), report.tournaments_checked,
                report.losers_audited);
  }
  return 0;
}

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--problem", opt.problem,
                  "shuttle | kddcup | multiplexer-K | synthetic-shuttle | custom");
  cmd->add_option("--data-path", opt.data_path, "dataset file for file-backed problems");
  cmd->add_option("--schema", opt.schema,
                  "label=<idx|last>;positive=<l1|l2|...>;delim=<auto|comma|space>");
  cmd->add_option("--tournament", opt.config.tournament_size, "tournament size t");
  cmd->add_option("--population", opt.config.population_size, "population size");
  cmd->add_option("--generations", opt.config.generations, "number of generations");
  cmd->add_option("--block-size", opt.config.block_size, "fitness cases per block");
  cmd->add_option("--elitism", opt.config.elitism_fraction, "elite fraction, e.g. 0.10");
  cmd->add_flag("--efficient", opt.config.efficient_selection,
                "use the efficient tournament-selection pipeline");
  cmd->add_flag("--reuse", opt.config.reuse_unmodified,
                "do not reevaluate intact survivors with known fitness");
  cmd->add_flag("--skip-unsampled", opt.config.skip_unsampled,
                "do not evaluate members occupying no tournament");
  cmd->add_flag("--strict-elitism", opt.config.strict_elitism,
                "fully evaluate everyone when elitism is on (keeps paths identical)");
  cmd->add_option("--lanes", opt.lanes, "bit lanes per word for Boolean problems (32 or 64)");
  cmd->add_option("--workers", opt.config.worker_count, "evaluation threads (0 = all cores)");
  cmd->add_option("--seed", opt.config.seed, "master seed; repeats use seed, seed+1, ...");
  cmd->add_option("--repeats", opt.repeats, "independent runs")->check(CLI::PositiveNumber);
  cmd->add_option("--out", opt.out_dir, "output directory for stats/summary files");
  cmd->add_flag("--audit", opt.audit, "emit per-generation pruning audit rows");
  cmd->add_option("--cases", opt.synthetic_cases, "case count for synthetic-shuttle");
  cmd->add_option("--config", opt.config_file, "flat key=value config file");
}

void finalize_options(const CLI::App* cmd, CliOptions& opt) {
  if (!opt.config_file.empty()) apply_config_file(cmd, opt);
  if (opt.problem.empty()) throw std::runtime_error("--problem is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tournament-selection GP engine with early-termination evaluation"};
  app.require_subcommand(1);

  CliOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "run experiments and emit reports");
  add_common_flags(run, run_opt);
  run->add_flag("--compare", run_opt.compare,
                "also run the paired opposite pipeline on the same seeds and report speedup");

  CliOptions verify_opt;
  CLI::App* verify = app.add_subcommand(
      "verify", "run standard and efficient pipelines in lockstep and check path identity");
  add_common_flags(verify, verify_opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      finalize_options(run, run_opt);
      return cmd_run(run_opt);
    }
    if (verify->parsed()) {
      finalize_options(verify, verify_opt);
      return cmd_verify(verify_opt);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
