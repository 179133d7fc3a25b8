#ifndef MELIF_HALT_HPP
#define MELIF_HALT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "melif/common.hpp"

namespace melif {

enum class HaltReason { perfect, limit, stagnation, exhausted };

inline std::string_view halt_reason_name(HaltReason r) {
  switch (r) {
    case HaltReason::perfect: return "perfect";
    case HaltReason::limit: return "limit";
    case HaltReason::stagnation: return "stagnation";
    case HaltReason::exhausted: return "exhausted";
  }
  return "?";
}

inline HaltReason parse_halt_reason(std::string_view s) {
  if (s == "perfect") return HaltReason::perfect;
  if (s == "limit") return HaltReason::limit;
  if (s == "stagnation") return HaltReason::stagnation;
  if (s == "exhausted") return HaltReason::exhausted;
  throw Error("unknown halt reason '" + std::string(s) + "'");
}

struct HaltSpec {
  std::optional<std::size_t> max_points;
  std::optional<std::size_t> stagnation_window;
  double perfect_score = 1.0;
};

/// Counters the halting rule looks at. completed counts fresh evaluations of the
/// run; last_improvement is the completion number that set the current best.
struct HaltState {
  std::size_t completed = 0;
  std::size_t last_improvement = 0;
  std::optional<double> best_score;
};

/// First matching reason in the order perfect, limit, stagnation.
inline std::optional<HaltReason> check_halt(const HaltState& s, const HaltSpec& spec) {
  if (s.best_score && *s.best_score >= spec.perfect_score) return HaltReason::perfect;
  if (spec.max_points && s.completed >= *spec.max_points) return HaltReason::limit;
  if (spec.stagnation_window && s.best_score && s.completed - s.last_improvement >= *spec.stagnation_window)
    return HaltReason::stagnation;
  return std::nullopt;
}

/// Feeds completions in order and latches the first halt decision.
class HaltTracker {
 public:
  explicit HaltTracker(HaltSpec spec) : spec_(spec) {}

  /// Records one fresh completion; returns true if this score is a new best.
  bool observe(double score) {
    ++state_.completed;
    bool improved = !state_.best_score || score > *state_.best_score;
    if (improved) {
      state_.best_score = score;
      state_.last_improvement = state_.completed;
    }
    if (!reason_) reason_ = check_halt(state_, spec_);
    return improved;
  }

  void force(HaltReason r) {
    if (!reason_) reason_ = r;
  }

  bool halted() const { return reason_.has_value(); }
  std::optional<HaltReason> reason() const { return reason_; }
  const HaltState& state() const { return state_; }
  const HaltSpec& spec() const { return spec_; }

 private:
  HaltSpec spec_;
  HaltState state_;
  std::optional<HaltReason> reason_;
};

}  // namespace melif

#endif  // MELIF_HALT_HPP
