#ifndef MELIF_BENCH_HPP
#define MELIF_BENCH_HPP

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "melif/dataset.hpp"
#include "melif/evaluator.hpp"
#include "melif/filters.hpp"
#include "melif/optim.hpp"

namespace melif {

/// One column of the experiment matrix: an optimizer plus its halting rule.
struct RunConfig {
  std::string id;
  OptimizerKind optimizer = OptimizerKind::melif;
  HaltSpec halt;

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.id == b.id && a.optimizer == b.optimizer && a.halt.max_points == b.halt.max_points &&
           a.halt.stagnation_window == b.halt.stagnation_window && a.halt.perfect_score == b.halt.perfect_score;
  }
};

/// The ten standard configurations, in report order.
inline std::vector<std::string> standard_config_ids() {
  return {"B", "P", "PQ75", "PQ100", "PQ125", "PQrel", "MA75", "MA100", "MA125", "MArel"};
}

/// Standard ids (B, P, PQ75 ... MArel) or custom "<optimizer>[:max=N][:stag=N]".
inline RunConfig parse_run_config(std::string_view id) {
  RunConfig rc{std::string(id), OptimizerKind::melif, {}};
  if (id == "B") return rc;
  if (id == "P") {
    rc.optimizer = OptimizerKind::melif_plus;
    return rc;
  }
  for (auto [prefix, kind] : {std::pair{std::string_view("PQ"), OptimizerKind::pq},
                              std::pair{std::string_view("MA"), OptimizerKind::ma}}) {
    if (!id.starts_with(prefix)) continue;
    auto rest = id.substr(prefix.size());
    rc.optimizer = kind;
    if (rest == "rel") {
      rc.halt.stagnation_window = 32;
      return rc;
    }
    if (rest == "75" || rest == "100" || rest == "125") {
      rc.halt.max_points = std::stoul(std::string(rest));
      return rc;
    }
  }

  auto colon = id.find(':');
  rc.optimizer = parse_optimizer(id.substr(0, colon));
  while (colon != std::string_view::npos) {
    auto next = id.find(':', colon + 1);
    auto part = id.substr(colon + 1, next == std::string_view::npos ? std::string_view::npos : next - colon - 1);
    auto eq = part.find('=');
    if (eq == std::string_view::npos) throw Error("bad config option '" + std::string(part) + "' in '" + rc.id + "'");
    auto key = part.substr(0, eq);
    auto value = std::stoul(std::string(part.substr(eq + 1)));
    if (value == 0) throw Error("config '" + rc.id + "': " + std::string(key) + " must be positive");
    if (key == "max")
      rc.halt.max_points = value;
    else if (key == "stag")
      rc.halt.stagnation_window = value;
    else
      throw Error("unknown config option '" + std::string(key) + "' in '" + rc.id + "'");
    colon = next;
  }
  if ((rc.optimizer == OptimizerKind::pq || rc.optimizer == OptimizerKind::ma) && !rc.halt.max_points &&
      !rc.halt.stagnation_window)
    throw Error("config '" + rc.id + "': pq/ma need max=N or stag=N");
  return rc;
}

struct BenchOptions {
  std::size_t threads = 1;
  GridSpacing spacing{4};
  EvalConfig eval;
  std::vector<Measure> measures = default_measures();
  FilterOptions filters;
};

/// A dataset to benchmark; load() runs inside the matrix so failures become error rows.
struct DatasetSource {
  std::string name;
  std::function<Dataset()> load;
};

struct BenchCell {
  std::string dataset;
  std::string config;
  double wall_seconds = 0.0;
  double best_f1 = 0.0;
  std::size_t points = 0;
  std::string halt_reason;
  std::vector<double> best_weights;
  std::string error;

  friend bool operator==(const BenchCell&, const BenchCell&) = default;
};

struct BenchMetadata {
  std::uint64_t seed = 0;
  double delta = 0.25;
  std::size_t threads = 1;
  std::string classifier;
  std::string metric;
  std::vector<std::string> measures;
  std::size_t m = 0;
  int folds = 0;
  std::string timing_scope = "filter precomputation + search; excludes dataset file I/O";

  friend bool operator==(const BenchMetadata&, const BenchMetadata&) = default;
};

struct BenchReport {
  BenchMetadata metadata;
  std::vector<std::string> datasets;
  std::vector<std::string> configs;
  std::vector<BenchCell> cells;

  bool has_errors() const {
    for (const auto& c : cells)
      if (!c.error.empty()) return true;
    return false;
  }

  const BenchCell* find(std::string_view dataset, std::string_view config) const {
    for (const auto& c : cells)
      if (c.dataset == dataset && c.config == config) return &c;
    return nullptr;
  }

  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

/// Runs one cell: fresh ensemble, objective and cache; timing covers the ensemble
/// precomputation and the search.
inline BenchCell run_cell(const Dataset& ds, const RunConfig& rc, const BenchOptions& opts) {
  BenchCell cell;
  cell.dataset = ds.name();
  cell.config = rc.id;
  auto t0 = std::chrono::steady_clock::now();
  FilterEnsemble ens(ds, opts.measures, opts.filters);
  EvaluationService service(CvObjective(ds, ens, opts.eval));
  OptimizerConfig oc;
  oc.spacing = opts.spacing;
  oc.dims = ens.size();
  oc.threads = opts.threads;
  oc.halt = rc.halt;
  auto result = run_optimizer(rc.optimizer, service, oc);
  cell.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  cell.best_f1 = result.best_score;
  cell.points = result.evaluations.size();
  cell.halt_reason = std::string(halt_reason_name(result.halt_reason));
  cell.best_weights = result.best_point.weights();
  return cell;
}

/// Every config on every dataset, cells run one after another.
inline BenchReport run_matrix(const std::vector<DatasetSource>& sources, const std::vector<RunConfig>& configs,
                              const BenchOptions& opts) {
  if (sources.empty()) throw Error("run_matrix: no datasets");
  BenchReport report;
  report.metadata.seed = opts.eval.seed;
  report.metadata.delta = opts.spacing.delta();
  report.metadata.threads = opts.threads;
  report.metadata.classifier = opts.eval.classifier;
  report.metadata.metric = std::string(metric_name(opts.eval.metric));
  for (auto m : opts.measures) report.metadata.measures.emplace_back(measure_name(m));
  report.metadata.m = opts.eval.m;
  report.metadata.folds = opts.eval.folds;
  for (const auto& rc : configs) report.configs.push_back(rc.id);

  for (const auto& src : sources) {
    std::optional<Dataset> ds;
    std::string load_error;
    try {
      ds.emplace(src.load());
    } catch (const std::exception& e) {
      load_error = e.what();
    }
    report.datasets.push_back(ds ? ds->name() : src.name);
    for (const auto& rc : configs) {
      if (!ds) {
        report.cells.push_back({src.name, rc.id, 0.0, 0.0, 0, "", {}, load_error});
        continue;
      }
      try {
        report.cells.push_back(run_cell(*ds, rc, opts));
      } catch (const std::exception& e) {
        report.cells.push_back({ds->name(), rc.id, 0.0, 0.0, 0, "", {}, e.what()});
      }
    }
  }
  return report;
}

namespace detail {

inline std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

}  // namespace detail

/// One row per dataset: dataset, then time per config, then F1 per config.
/// Error cells are written as NA.
inline void write_report_csv(std::ostream& out, const BenchReport& report, int time_precision = 0) {
  out << "dataset";
  for (const auto& c : report.configs) out << ",time_" << c;
  for (const auto& c : report.configs) out << ",f1_" << c;
  out << '\n';
  if (report.configs.empty()) return;
  for (const auto& ds : report.datasets) {
    out << ds;
    for (const auto& c : report.configs) {
      const auto* cell = report.find(ds, c);
      out << ',' << (cell && cell->error.empty() ? detail::fixed(cell->wall_seconds, time_precision) : "NA");
    }
    for (const auto& c : report.configs) {
      const auto* cell = report.find(ds, c);
      out << ',' << (cell && cell->error.empty() ? detail::fixed(cell->best_f1, 6) : "NA");
    }
    out << '\n';
  }
}

inline void to_json(nlohmann::json& j, const BenchCell& c) {
  j = {{"dataset", c.dataset},         {"config", c.config},         {"wall_seconds", c.wall_seconds},
       {"best_f1", c.best_f1},         {"points", c.points},         {"halt_reason", c.halt_reason},
       {"best_weights", c.best_weights}, {"error", c.error}};
}

inline void from_json(const nlohmann::json& j, BenchCell& c) {
  j.at("dataset").get_to(c.dataset);
  j.at("config").get_to(c.config);
  j.at("wall_seconds").get_to(c.wall_seconds);
  j.at("best_f1").get_to(c.best_f1);
  j.at("points").get_to(c.points);
  j.at("halt_reason").get_to(c.halt_reason);
  j.at("best_weights").get_to(c.best_weights);
  j.at("error").get_to(c.error);
}

inline void to_json(nlohmann::json& j, const BenchMetadata& m) {
  j = {{"seed", m.seed},           {"delta", m.delta},   {"threads", m.threads},
       {"classifier", m.classifier}, {"metric", m.metric}, {"measures", m.measures},
       {"m", m.m},                 {"folds", m.folds},   {"timing_scope", m.timing_scope}};
}

inline void from_json(const nlohmann::json& j, BenchMetadata& m) {
  j.at("seed").get_to(m.seed);
  j.at("delta").get_to(m.delta);
  j.at("threads").get_to(m.threads);
  j.at("classifier").get_to(m.classifier);
  j.at("metric").get_to(m.metric);
  j.at("measures").get_to(m.measures);
  j.at("m").get_to(m.m);
  j.at("folds").get_to(m.folds);
  j.at("timing_scope").get_to(m.timing_scope);
}

inline void to_json(nlohmann::json& j, const BenchReport& r) {
  j = {{"metadata", r.metadata}, {"datasets", r.datasets}, {"configs", r.configs}, {"cells", r.cells}};
}

inline void from_json(const nlohmann::json& j, BenchReport& r) {
  j.at("metadata").get_to(r.metadata);
  j.at("datasets").get_to(r.datasets);
  j.at("configs").get_to(r.configs);
  j.at("cells").get_to(r.cells);
}

inline void write_report_json(std::ostream& out, const BenchReport& report) {
  out << nlohmann::json(report).dump(2) << '\n';
}

inline BenchReport parse_report_json(std::string_view text) {
  return nlohmann::json::parse(text).get<BenchReport>();
}

/// One JSON object per evaluation: {seq, coords, score, wall_nanos[, arm]}.
inline void write_eval_log_jsonl(std::ostream& out, const SearchResult& result) {
  for (std::size_t i = 0; i < result.evaluations.size(); ++i) {
    const auto& r = result.evaluations[i];
    nlohmann::json j = {{"seq", r.seq}, {"coords", r.point.weights()}, {"score", r.score}, {"wall_nanos", r.wall_nanos}};
    if (i < result.arms.size() && result.arms[i]) j["arm"] = *result.arms[i];
    out << j.dump() << '\n';
  }
}

}  // namespace melif

#endif  // MELIF_BENCH_HPP
