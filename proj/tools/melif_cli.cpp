// Command-line front end: benchmark matrix, single searches, synthetic data.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "melif/melif.hpp"

namespace {

struct CommonArgs {
  std::string threads = "auto";
  double delta = 0.25;
  std::size_t m = 100;
  int folds = 5;
  std::string classifier = "centroid";
  std::string metric = "macro";
  std::string measures = "spearman,su,fc,vdm";
  std::uint64_t seed = 42;
  int bins = 10;
  bool no_stratify = false;
  bool no_normalize = false;
  bool parallel_folds = false;
};

struct SyntheticArgs {
  std::string shape;  // "n,d,k"
  std::size_t count = 1;
  double shift = 1.0;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--threads", a.threads, "Worker threads: a number, 'auto' (core count) or '2pf'");
  app->add_option("--delta", a.delta, "Grid spacing; 1/delta must be an integer");
  app->add_option("--m", a.m, "Number of top features kept by the cutting rule");
  app->add_option("--folds", a.folds, "Cross-validation folds");
  app->add_option("--classifier", a.classifier, "centroid, knn or knn:<k>");
  app->add_option("--metric", a.metric, "macro or binary F1");
  app->add_option("--measures", a.measures, "Comma-separated measures: spearman,su,fc,vdm");
  app->add_option("--seed", a.seed, "Seed for fold assignment and synthetic data");
  app->add_option("--bins", a.bins, "Equal-width bins for su and vdm");
  app->add_flag("--no-stratify", a.no_stratify, "Plain shuffled k-fold instead of stratified");
  app->add_flag("--no-normalize", a.no_normalize, "Combine raw measure scores without min-max normalization");
  app->add_flag("--parallel-folds", a.parallel_folds, "Run the folds of one evaluation concurrently");
}

void add_synthetic(CLI::App* app, SyntheticArgs& s) {
  app->add_option("--synthetic", s.shape, "Planted synthetic data: objects,features,informative");
  app->add_option("--synthetic-count", s.count, "Number of synthetic datasets (seeds seed, seed+1, ...)");
  app->add_option("--shift", s.shift, "Class mean shift of informative synthetic features");
}

melif::BenchOptions make_options(const CommonArgs& a) {
  melif::BenchOptions o;
  o.spacing = melif::GridSpacing::from_delta(a.delta);
  o.eval.m = a.m;
  o.eval.folds = a.folds;
  o.eval.classifier = a.classifier;
  melif::make_classifier(a.classifier);  // validate early
  o.eval.metric = melif::parse_metric(a.metric);
  o.eval.stratified = !a.no_stratify;
  o.eval.parallel_folds = a.parallel_folds;
  o.eval.seed = a.seed;
  o.measures.clear();
  for (const auto& name : split(a.measures, ',')) o.measures.push_back(melif::parse_measure(name));
  if (o.measures.empty()) throw melif::Error("--measures is empty");
  o.filters.bins = a.bins;
  o.filters.normalize = !a.no_normalize;
  if (a.threads == "auto") {
    o.threads = std::max(1u, std::thread::hardware_concurrency());
  } else if (a.threads == "2pf") {
    o.threads = 2 * (o.measures.size() + 1) * static_cast<std::size_t>(a.folds);
  } else {
    o.threads = std::stoul(a.threads);
    if (o.threads == 0) throw melif::Error("--threads must be positive");
  }
  return o;
}

melif::SyntheticSpec synthetic_spec(const SyntheticArgs& s, std::uint64_t seed) {
  auto parts = split(s.shape, ',');
  if (parts.size() != 3) throw melif::Error("--synthetic expects objects,features,informative");
  melif::SyntheticSpec spec;
  spec.objects = std::stoul(parts[0]);
  spec.features = std::stoul(parts[1]);
  spec.informative = std::stoul(parts[2]);
  spec.shift = s.shift;
  spec.seed = seed;
  return spec;
}

std::vector<melif::DatasetSource> synthetic_sources(const SyntheticArgs& s, std::uint64_t seed) {
  std::vector<melif::DatasetSource> out;
  for (std::size_t i = 0; i < s.count; ++i) {
    auto spec = synthetic_spec(s, seed + i);
    auto name = melif::make_synthetic(spec).dataset.name();
    out.push_back({name, [spec] { return melif::make_synthetic(spec).dataset; }});
  }
  return out;
}

std::vector<melif::DatasetSource> manifest_sources(const std::string& manifest, bool has_header) {
  std::vector<melif::DatasetSource> out;
  for (const auto& e : melif::load_manifest(manifest))
    out.push_back({e.path.stem().string(), [e, has_header] { return melif::load_csv(e.path, e.label_column, has_header); }});
  return out;
}

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw melif::Error("cannot write '" + path + "'");
  fn(out);
  if (!out) throw melif::Error("write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear combination of ranking filters: search and benchmark"};
  app.require_subcommand(1);

  // run
  CommonArgs run_common;
  SyntheticArgs run_synth;
  std::string manifest, configs = "B,P,PQ75,PQ100,PQ125,PQrel,MA75,MA100,MA125,MArel", out_csv, out_json;
  int time_precision = 0;
  bool run_no_header = false;
  auto* run = app.add_subcommand("run", "Run the configuration matrix over datasets and write a comparison report");
  add_common(run, run_common);
  add_synthetic(run, run_synth);
  run->add_option("--manifest", manifest, "Dataset manifest: '<csv path> [label column]' per line");
  run->add_option("--configs", configs, "Comma-separated config ids (B,P,PQ75,...,MArel or opt:max=N:stag=N)");
  run->add_option("--out-csv", out_csv, "CSV report path (stdout if omitted)");
  run->add_option("--out-json", out_json, "JSON report path");
  run->add_option("--time-precision", time_precision, "Decimal places of the CSV time columns");
  run->add_flag("--no-header", run_no_header, "Dataset CSV files have no header row");

  // search
  CommonArgs search_common;
  SyntheticArgs search_synth;
  std::string dataset_path, label_column = "last", optimizer = "pq", log_jsonl;
  std::size_t max_points = 0, stagnation = 0;
  bool search_no_header = false;
  auto* search = app.add_subcommand("search", "Run one optimizer on one dataset");
  add_common(search, search_common);
  add_synthetic(search, search_synth);
  search->add_option("--dataset", dataset_path, "Dataset CSV");
  search->add_option("--label", label_column, "Label column: name, 0-based index or 'last'");
  search->add_option("--optimizer", optimizer, "melif, melif+, pq or ma");
  search->add_option("--max-points", max_points, "Halt after this many completed evaluations");
  search->add_option("--stagnation", stagnation, "Halt after this many evaluations without a new best");
  search->add_option("--log-jsonl", log_jsonl, "Write the evaluation log as JSON lines");
  search->add_flag("--no-header", search_no_header, "Dataset CSV has no header row");

  // synth
  SyntheticArgs gen;
  std::uint64_t gen_seed = 42;
  std::string out_dir = ".";
  auto* synth = app.add_subcommand("synth", "Write planted synthetic datasets and a manifest");
  add_synthetic(synth, gen);
  synth->add_option("--seed", gen_seed, "Seed of the first dataset");
  synth->add_option("--out-dir", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto opts = make_options(run_common);
      std::vector<melif::DatasetSource> sources;
      if (!manifest.empty()) sources = manifest_sources(manifest, !run_no_header);
      if (!run_synth.shape.empty()) {
        auto more = synthetic_sources(run_synth, run_common.seed);
        sources.insert(sources.end(), more.begin(), more.end());
      }
      if (sources.empty()) throw melif::Error("give --manifest and/or --synthetic");
      std::vector<melif::RunConfig> rcs;
      for (const auto& id : split(configs, ',')) rcs.push_back(melif::parse_run_config(id));

      auto report = melif::run_matrix(sources, rcs, opts);
      for (const auto& c : report.cells)
        if (!c.error.empty()) std::cerr << "melif: " << c.dataset << " / " << c.config << ": " << c.error << '\n';
      if (out_csv.empty())
        melif::write_report_csv(std::cout, report, time_precision);
      else
        write_file(out_csv, [&](std::ostream& o) { melif::write_report_csv(o, report, time_precision); });
      if (!out_json.empty()) write_file(out_json, [&](std::ostream& o) { melif::write_report_json(o, report); });
      return report.has_errors() ? 2 : 0;
    }

    if (*search) {
      auto opts = make_options(search_common);
      std::optional<melif::Dataset> ds;
      if (!dataset_path.empty())
        ds.emplace(melif::load_csv(dataset_path, melif::LabelColumn::parse(label_column), !search_no_header));
      else if (!search_synth.shape.empty())
        ds.emplace(melif::make_synthetic(synthetic_spec(search_synth, search_common.seed)).dataset);
      else
        throw melif::Error("give --dataset or --synthetic");

      melif::FilterEnsemble ens(*ds, opts.measures, opts.filters);
      melif::EvaluationService service(melif::CvObjective(*ds, ens, opts.eval));
      melif::OptimizerConfig oc;
      oc.spacing = opts.spacing;
      oc.dims = ens.size();
      oc.threads = opts.threads;
      if (max_points) oc.halt.max_points = max_points;
      if (stagnation) oc.halt.stagnation_window = stagnation;
      auto kind = melif::parse_optimizer(optimizer);
      if ((kind == melif::OptimizerKind::pq || kind == melif::OptimizerKind::ma) && !max_points && !stagnation)
        oc.halt.stagnation_window = 32;
      auto result = melif::run_optimizer(kind, service, oc);

      std::cout << "dataset     " << ds->name() << '\n'
                << "optimizer   " << optimizer << '\n'
                << "best point  " << result.best_point.to_string() << '\n'
                << "best score  " << result.best_score << '\n'
                << "evaluations " << result.evaluations.size() << '\n'
                << "halt        " << melif::halt_reason_name(result.halt_reason) << '\n'
                << "seconds     " << static_cast<double>(result.wall_nanos) * 1e-9 << '\n';
      if (!log_jsonl.empty()) write_file(log_jsonl, [&](std::ostream& o) { melif::write_eval_log_jsonl(o, result); });
      return 0;
    }

    if (*synth) {
      if (gen.shape.empty()) throw melif::Error("--synthetic is required");
      std::filesystem::create_directories(out_dir);
      std::ofstream list(std::filesystem::path(out_dir) / "manifest.txt");
      for (std::size_t i = 0; i < gen.count; ++i) {
        auto data = melif::make_synthetic(synthetic_spec(gen, gen_seed + i));
        auto file = data.dataset.name() + ".csv";
        melif::write_csv(std::filesystem::path(out_dir) / file, data.dataset);
        list << file << " label\n";
      }
      if (!list) throw melif::Error("cannot write manifest in '" + out_dir + "'");
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "melif: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
