#ifndef MELIF_BANDIT_HPP
#define MELIF_BANDIT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "melif/common.hpp"
#include "melif/grid.hpp"

namespace melif {

/// Max-priority queue of grid points; equal priorities pop in insertion order.
class PendingQueue {
 public:
  struct Entry {
    double priority;
    std::uint64_t order;
    GridPoint point;
  };

  void push(GridPoint p, double priority) { heap_.push({priority, next_order_++, std::move(p)}); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const Entry& top() const { return heap_.top(); }

  GridPoint pop() {
    GridPoint p = heap_.top().point;
    heap_.pop();
    return p;
  }

 private:
  struct Lower {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.priority != b.priority) return a.priority < b.priority;
      return a.order > b.order;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Lower> heap_;
  std::uint64_t next_order_ = 0;
};

/// One search-space area seen as a bandit arm. Only completed evaluations feed
/// the statistics.
struct ArmState {
  std::size_t id = 0;
  PendingQueue queue;
  std::size_t pulls = 0;
  double mean_reward = 0.0;
  std::vector<double> rewards;

  void record(double reward) {
    rewards.push_back(reward);
    ++pulls;
    mean_reward += (reward - mean_reward) / static_cast<double>(pulls);
  }
};

/// UCB1 over the arms whose queue is non-empty. An unpulled eligible arm wins
/// outright (lowest id first); otherwise argmax of mean + C*sqrt(2 ln n / n_i),
/// ties to the lowest id, with n the total completed pulls.
inline std::size_t ucb_select(std::span<const ArmState> arms, double exploration = 1.0) {
  std::size_t total = 0;
  for (const auto& a : arms) total += a.pulls;
  const double log_n = std::log(static_cast<double>(std::max<std::size_t>(total, 1)));

  std::optional<std::size_t> best;
  double best_value = 0.0;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const auto& a = arms[i];
    if (a.queue.empty()) continue;
    if (a.pulls == 0) return i;
    double value = a.mean_reward + exploration * std::sqrt(2.0 * log_n / static_cast<double>(a.pulls));
    if (!best || value > best_value) {
      best = i;
      best_value = value;
    }
  }
  if (!best) throw Error("ucb_select: every arm queue is empty");
  return *best;
}

}  // namespace melif

#endif  // MELIF_BANDIT_HPP
