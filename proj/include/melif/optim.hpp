#ifndef MELIF_OPTIM_HPP
#define MELIF_OPTIM_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "melif/bandit.hpp"
#include "melif/evaluator.hpp"
#include "melif/grid.hpp"
#include "melif/halt.hpp"

namespace melif {

struct OptimizerConfig {
  GridSpacing spacing{4};
  /// Empty means default_starting_points(dims).
  std::vector<GridPoint> starting_points;
  std::size_t dims = 0;
  std::size_t threads = 1;
  HaltSpec halt;
  double exploration = 1.0;

  std::vector<GridPoint> resolved_starts() const {
    if (starting_points.empty() && dims == 0) throw Error("optimizer: dimension count must be positive");
    auto starts = starting_points.empty() ? default_starting_points(dims, spacing) : starting_points;
    if (starts.empty()) throw Error("optimizer: no starting points");
    for (std::size_t i = 0; i < starts.size(); ++i) {
      if (starts[i].dim() != starts.front().dim()) throw Error("optimizer: starting points differ in dimension");
      if (!(starts[i].spacing() == spacing)) throw Error("optimizer: starting point spacing differs from config");
      for (std::size_t j = 0; j < i; ++j)
        if (starts[i] == starts[j]) throw Error("optimizer: duplicate starting point " + starts[i].to_string());
    }
    return starts;
  }
};

struct SearchResult {
  GridPoint best_point;
  double best_score = 0.0;
  /// Every distinct record the run observed, in seq order.
  std::vector<EvalRecord> evaluations;
  /// Arm that evaluated each record (bandit search only), aligned with evaluations.
  std::vector<std::optional<std::size_t>> arms;
  /// Final pull count per arm (bandit search only).
  std::vector<std::size_t> arm_pulls;
  std::int64_t wall_nanos = 0;
  HaltReason halt_reason = HaltReason::exhausted;
};

enum class OptimizerKind { melif, melif_plus, pq, ma };

inline std::string_view optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::melif: return "melif";
    case OptimizerKind::melif_plus: return "melif+";
    case OptimizerKind::pq: return "pq";
    case OptimizerKind::ma: return "ma";
  }
  return "?";
}

inline OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "melif") return OptimizerKind::melif;
  if (s == "melif+") return OptimizerKind::melif_plus;
  if (s == "pq") return OptimizerKind::pq;
  if (s == "ma") return OptimizerKind::ma;
  throw Error("unknown optimizer '" + std::string(s) + "' (expected melif, melif+, pq, ma)");
}

namespace detail {

/// Thread-safe collection of the records a run has seen.
class RunRecorder {
 public:
  void add(const EvalRecord& r, std::optional<std::size_t> arm = std::nullopt) {
    std::lock_guard lock(mutex_);
    if (seen_.emplace(r.seq, records_.size()).second) {
      records_.push_back(r);
      arms_.push_back(arm);
    }
  }

  void finish(SearchResult& out) {
    std::lock_guard lock(mutex_);
    std::vector<std::size_t> order(records_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return records_[a].seq < records_[b].seq; });
    out.evaluations.clear();
    out.arms.clear();
    for (auto i : order) {
      out.evaluations.push_back(records_[i]);
      out.arms.push_back(arms_[i]);
    }
    // q* is the max score; p* the earliest record reaching it
    for (const auto& r : out.evaluations)
      if (&r == &out.evaluations.front() || r.score > out.best_score) {
        out.best_score = r.score;
        out.best_point = r.point;
      }
  }

 private:
  std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::size_t> seen_;
  std::vector<EvalRecord> records_;
  std::vector<std::optional<std::size_t>> arms_;
};

inline std::size_t worker_count(const OptimizerConfig& cfg) {
  if (cfg.threads == 0) throw Error("optimizer: thread count must be positive");
  return cfg.threads;
}

/// Coordinate descent state shared by the descents of one run.
struct DescentContext {
  EvaluationService& service;
  RunRecorder& recorder;
  double perfect_score;
  std::atomic<bool> perfect{false};

  EvalRecord evaluate(const GridPoint& p) {
    auto r = service.evaluate(p);
    recorder.add(r);
    if (r.score >= perfect_score) perfect = true;
    return r;
  }
};

/// Strict-improvement coordinate descent from (current, score). For each dimension
/// tries +delta then -delta; an improving move restarts the scan at dimension 0.
/// Stops after a full pass without improvement or once a perfect score is seen.
inline void descend(DescentContext& ctx, GridPoint current, double score) {
  bool moved = true;
  while (moved && !ctx.perfect) {
    moved = false;
    for (std::size_t d = 0; d < current.dim() && !moved && !ctx.perfect; ++d) {
      for (std::int64_t dir : {+1, -1}) {
        auto candidate = current.shifted(d, dir);
        auto r = ctx.evaluate(candidate);
        if (r.score > score) {
          current = std::move(candidate);
          score = r.score;
          moved = true;
          break;
        }
        if (ctx.perfect) break;
      }
    }
  }
}

/// Best-first search over one or more arms. With a single arm this is the
/// priority-queue scheduler; with several, arms are picked by UCB1.
class BestFirstSearch {
 public:
  BestFirstSearch(EvaluationService& service, const OptimizerConfig& cfg, bool bandit)
      : service_(service), cfg_(cfg), bandit_(bandit), tracker_(cfg.halt) {
    auto starts = cfg.resolved_starts();
    if (!cfg.halt.max_points && !cfg.halt.stagnation_window)
      throw Error("parallel optimizers need max_points or a stagnation window");
    arms_.resize(bandit ? starts.size() : 1);
    for (std::size_t i = 0; i < arms_.size(); ++i) arms_[i].id = i;
    for (std::size_t i = 0; i < starts.size(); ++i) arms_[bandit ? i : 0].queue.push(starts[i], 1.0);
  }

  SearchResult run() {
    auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = worker_count(cfg_);
    if (n == 1) {
      work();
    } else {
      std::vector<std::thread> workers;
      for (std::size_t i = 0; i < n; ++i) workers.emplace_back([this] { work(); });
      for (auto& w : workers) w.join();
    }
    if (error_) std::rethrow_exception(error_);
    SearchResult out;
    recorder_.finish(out);
    out.wall_nanos =
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
    out.halt_reason = tracker_.reason().value_or(HaltReason::exhausted);
    if (bandit_)
      for (const auto& a : arms_) out.arm_pulls.push_back(a.pulls);
    return out;
  }

 private:
  // Drops already-claimed points from the queue heads; true if any arm has work.
  bool has_work() {
    bool any = false;
    for (auto& a : arms_) {
      while (!a.queue.empty() && claimed_.contains(a.queue.top().point)) a.queue.pop();
      any = any || !a.queue.empty();
    }
    return any;
  }

  void work() {
    std::unique_lock lock(mutex_);
    while (true) {
      cv_.wait(lock, [&] { return tracker_.halted() || error_ || in_flight_ == 0 || has_work(); });
      if (tracker_.halted() || error_) break;
      if (!has_work()) {
        tracker_.force(HaltReason::exhausted);
        cv_.notify_all();
        break;
      }
      const std::size_t arm = arms_.size() == 1 ? 0 : ucb_select(arms_, cfg_.exploration);
      GridPoint p = arms_[arm].queue.pop();
      claimed_.insert(p);
      ++in_flight_;
      lock.unlock();

      bool fresh = false;
      std::optional<EvalRecord> rec;
      try {
        rec = service_.evaluate(p, [&](const EvalRecord& r) {
          fresh = true;
          std::lock_guard inner(mutex_);
          on_complete(r, arm);
        });
      } catch (...) {
        lock.lock();
        if (!error_) error_ = std::current_exception();
        --in_flight_;
        cv_.notify_all();
        break;
      }

      lock.lock();
      if (!fresh) {
        // cached by an earlier run on the same service: visible to q*, not to halting
        recorder_.add(*rec, arm_tag(arm));
      }
      for (auto& nb : neighbors(p))
        if (!claimed_.contains(nb)) arms_[arm].queue.push(std::move(nb), rec->score);
      --in_flight_;
      cv_.notify_all();
    }
  }

  std::optional<std::size_t> arm_tag(std::size_t arm) const {
    return bandit_ ? std::optional<std::size_t>(arm) : std::nullopt;
  }

  void on_complete(const EvalRecord& r, std::size_t arm) {
    recorder_.add(r, arm_tag(arm));
    arms_[arm].record(r.score);
    tracker_.observe(r.score);
  }

  EvaluationService& service_;
  const OptimizerConfig& cfg_;
  bool bandit_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<ArmState> arms_;
  std::unordered_set<GridPoint, GridPointHash> claimed_;
  std::size_t in_flight_ = 0;
  HaltTracker tracker_;
  RunRecorder recorder_;
  std::exception_ptr error_;
};

inline std::int64_t nanos_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Sequential coordinate descent: evaluate every starting point, descend from the best.
inline SearchResult melif_descent(EvaluationService& service, const OptimizerConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  auto starts = cfg.resolved_starts();
  detail::RunRecorder recorder;
  detail::DescentContext ctx{service, recorder, cfg.halt.perfect_score};

  std::optional<EvalRecord> best;
  for (const auto& p : starts) {
    auto r = ctx.evaluate(p);
    if (!best || r.score > best->score) best = r;
    if (ctx.perfect) break;
  }
  if (!ctx.perfect) detail::descend(ctx, best->point, best->score);

  SearchResult out;
  recorder.finish(out);
  out.wall_nanos = detail::nanos_since(t0);
  out.halt_reason = ctx.perfect ? HaltReason::perfect : HaltReason::exhausted;
  return out;
}

/// One coordinate descent per starting point, up to cfg.threads at a time, all
/// sharing the service cache. q* is the best over all descents.
inline SearchResult melif_plus(EvaluationService& service, const OptimizerConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  auto starts = cfg.resolved_starts();
  detail::RunRecorder recorder;
  detail::DescentContext ctx{service, recorder, cfg.halt.perfect_score};

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (!ctx.perfect) {
      std::size_t i = next++;
      if (i >= starts.size()) break;
      try {
        auto r = ctx.evaluate(starts[i]);
        detail::descend(ctx, starts[i], r.score);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        ctx.perfect = true;  // stop the other descents
        break;
      }
    }
  };
  const std::size_t n = std::min(detail::worker_count(cfg), starts.size());
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < n; ++i) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }
  if (error) std::rethrow_exception(error);

  SearchResult out;
  recorder.finish(out);
  out.wall_nanos = detail::nanos_since(t0);
  out.halt_reason = ctx.perfect ? HaltReason::perfect : HaltReason::exhausted;
  return out;
}

/// Parallel best-first search over a single priority queue. Starting points go in
/// with priority 1.0; each evaluated point enqueues its unclaimed neighbors with
/// its own score as priority.
inline SearchResult pq_melif(EvaluationService& service, const OptimizerConfig& cfg) {
  return detail::BestFirstSearch(service, cfg, false).run();
}

/// Parallel bandit search: one arm per starting point, each with its own priority
/// queue; neighbors stay in their parent's arm and arms are chosen by UCB1 over
/// completed evaluations only.
inline SearchResult ma_melif(EvaluationService& service, const OptimizerConfig& cfg) {
  return detail::BestFirstSearch(service, cfg, true).run();
}

inline SearchResult run_optimizer(OptimizerKind kind, EvaluationService& service, const OptimizerConfig& cfg) {
  switch (kind) {
    case OptimizerKind::melif: return melif_descent(service, cfg);
    case OptimizerKind::melif_plus: return melif_plus(service, cfg);
    case OptimizerKind::pq: return pq_melif(service, cfg);
    case OptimizerKind::ma: return ma_melif(service, cfg);
  }
  throw Error("unknown optimizer");
}

}  // namespace melif

#endif  // MELIF_OPTIM_HPP
