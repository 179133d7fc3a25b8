#ifndef MELIF_EVALUATOR_HPP
#define MELIF_EVALUATOR_HPP

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "melif/classifier.hpp"
#include "melif/dataset.hpp"
#include "melif/filters.hpp"
#include "melif/grid.hpp"
#include "melif/metrics.hpp"

namespace melif {

/// What an objective returns for one grid point.
struct Evaluation {
  double score = 0.0;
  std::vector<std::size_t> selected_features;
};

/// A published evaluation. seq is the 1-based completion order within one service.
struct EvalRecord {
  GridPoint point;
  double score = 0.0;
  std::vector<std::size_t> selected_features;
  std::int64_t wall_nanos = 0;
  std::uint64_t seq = 0;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

using Objective = std::function<Evaluation(const GridPoint&)>;

/// Memoizing front end to an objective.
///
/// Each grid point is computed at most once: the first caller computes, concurrent
/// callers for the same point block on a shared future and receive the same record.
/// Sequence numbers are taken from a single counter at completion time, and the
/// optional completion hook runs under the sequencing lock, so hooks observe
/// completions strictly in seq order.
class EvaluationService {
 public:
  using CompletionHook = std::function<void(const EvalRecord&)>;

  explicit EvaluationService(Objective objective) : objective_(std::move(objective)) {
    if (!objective_) throw Error("evaluation service: empty objective");
  }

  EvaluationService(const EvaluationService&) = delete;
  EvaluationService& operator=(const EvaluationService&) = delete;

  /// Returns the record for p, computing it if no other caller has. The hook is
  /// invoked only by the computing caller.
  EvalRecord evaluate(const GridPoint& p, const CompletionHook& on_complete = {}) {
    std::promise<EvalRecord> promise;
    std::shared_future<EvalRecord> pending;
    {
      std::lock_guard lock(cache_mutex_);
      auto [it, inserted] = cache_.try_emplace(p);
      if (inserted)
        it->second = promise.get_future().share();
      else
        pending = it->second;
    }
    if (pending.valid()) return pending.get();
    try {
      auto start = std::chrono::steady_clock::now();
      Evaluation e = objective_(p);
      auto elapsed = std::chrono::steady_clock::now() - start;
      ++computed_;
      if (!std::isfinite(e.score)) throw Error("objective returned a non-finite score at " + p.to_string());
      EvalRecord rec{p, e.score, std::move(e.selected_features),
                     std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count(), 0};
      {
        std::lock_guard lock(seq_mutex_);
        rec.seq = ++last_seq_;
        log_.push_back(rec);
        if (on_complete) on_complete(rec);
      }
      promise.set_value(rec);
      return rec;
    } catch (...) {
      promise.set_exception(std::current_exception());
      throw;
    }
  }

  /// Completed record for p, if any; never blocks on in-flight work.
  std::optional<EvalRecord> cached(const GridPoint& p) const {
    std::shared_future<EvalRecord> f;
    {
      std::lock_guard lock(cache_mutex_);
      auto it = cache_.find(p);
      if (it == cache_.end()) return std::nullopt;
      f = it->second;
    }
    if (f.wait_for(std::chrono::seconds(0)) != std::future_status::ready) return std::nullopt;
    try {
      return f.get();
    } catch (...) {
      return std::nullopt;
    }
  }

  /// Number of objective invocations that completed.
  std::size_t evaluations_run() const { return computed_.load(); }

  /// All completed records in seq order.
  std::vector<EvalRecord> log() const {
    std::lock_guard lock(seq_mutex_);
    return log_;
  }

 private:
  Objective objective_;
  mutable std::mutex cache_mutex_;
  std::unordered_map<GridPoint, std::shared_future<EvalRecord>, GridPointHash> cache_;
  mutable std::mutex seq_mutex_;
  std::uint64_t last_seq_ = 0;
  std::vector<EvalRecord> log_;
  std::atomic<std::size_t> computed_{0};
};

/// Settings for the cross-validated objective.
struct EvalConfig {
  std::size_t m = 100;
  int folds = 5;
  std::string classifier = "centroid";
  Metric metric = Metric::macro_f1;
  bool stratified = true;
  bool parallel_folds = false;
  std::uint64_t seed = 42;
};

/// combine -> cut top m -> k-fold train/predict -> mean per-fold F1.
///
/// Holds references to the dataset and ensemble; both must outlive it.
/// The fold split is fixed at construction so every grid point sees the same folds.
class CvObjective {
 public:
  CvObjective(const Dataset& ds, const FilterEnsemble& ens, EvalConfig cfg)
      : ds_(&ds), ens_(&ens), cfg_(std::move(cfg)), classifier_(make_classifier(cfg_.classifier)) {
    if (cfg_.folds < 2) throw Error("fold count must be at least 2");
    if (cfg_.m == 0) throw Error("cutting rule m must be positive");
    if (ens.feature_count() != ds.feature_count())
      throw Error("filter ensemble and dataset disagree on feature count");
    split_ = cfg_.stratified ? stratified_kfold(ds, cfg_.folds, cfg_.seed)
                             : shuffled_kfold(ds.object_count(), cfg_.folds, cfg_.seed);
    for (int f = 0; f < split_.fold_count; ++f) {
      train_.push_back(split_.train_indices(f));
      test_.push_back(split_.test_indices(f));
    }
  }

  const FoldSplit& folds() const { return split_; }

  Evaluation operator()(const GridPoint& p) const {
    if (p.dim() != ens_->size())
      throw Error("grid point has " + std::to_string(p.dim()) + " coordinates, ensemble has " +
                  std::to_string(ens_->size()) + " measures");
    auto weights = p.weights();
    auto selected = cut_top_m(combine(*ens_, weights), CuttingRule{cfg_.m});
    return {score_selection(selected), std::move(selected)};
  }

  /// Mean per-fold F1 of the classifier trained on the given feature columns.
  double score_selection(std::span<const std::size_t> columns) const {
    const auto n_folds = static_cast<std::size_t>(split_.fold_count);
    std::vector<double> fold_scores(n_folds);
    auto run_fold = [&](std::size_t f) { fold_scores[f] = score_fold(f, columns); };
    if (cfg_.parallel_folds && n_folds > 1) {
      std::vector<std::future<void>> jobs;
      for (std::size_t f = 0; f < n_folds; ++f) jobs.push_back(std::async(std::launch::async, run_fold, f));
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t f = 0; f < n_folds; ++f) run_fold(f);
    }
    double sum = 0.0;
    for (double v : fold_scores) sum += v;
    return sum / static_cast<double>(n_folds);
  }

 private:
  double score_fold(std::size_t f, std::span<const std::size_t> columns) const {
    const auto& train = train_[f];
    const auto& test = test_[f];
    auto labels_of = [&](const std::vector<std::size_t>& rows) {
      std::vector<int> y(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) y[i] = ds_->labels()[rows[i]];
      return y;
    };
    auto y_train = labels_of(train);
    auto y_test = labels_of(test);
    if (test.empty() || std::all_of(y_train.begin(), y_train.end(), [&](int y) { return y == y_train.front(); }))
      throw Error("dataset '" + ds_->name() + "': fold " + std::to_string(f) +
                  " is degenerate (empty test set or single-class training set)");
    auto model = classifier_->fit(ds_->features().select(train, columns), y_train);
    auto predicted = model->predict(ds_->features().select(test, columns));
    return score_predictions(cfg_.metric, y_test, predicted);
  }

  const Dataset* ds_;
  const FilterEnsemble* ens_;
  EvalConfig cfg_;
  std::shared_ptr<const Classifier> classifier_;
  FoldSplit split_;
  std::vector<std::vector<std::size_t>> train_, test_;
};

/// Dataset-free objective: scores a point by a closed-form function of its weights,
/// optionally sleeping to emulate evaluation cost.
inline Objective make_stub_objective(std::function<double(std::span<const double>)> f,
                                     std::chrono::microseconds cost = std::chrono::microseconds{0}) {
  return [f = std::move(f), cost](const GridPoint& p) {
    if (cost.count() > 0) std::this_thread::sleep_for(cost);
    auto w = p.weights();
    return Evaluation{f(w), {}};
  };
}

}  // namespace melif

#endif  // MELIF_EVALUATOR_HPP
