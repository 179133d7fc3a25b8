#ifndef MELIF_METRICS_HPP
#define MELIF_METRICS_HPP

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "melif/common.hpp"

namespace melif {

namespace detail {

struct ClassCounts {
  std::vector<double> tp, fp, fn;
  std::vector<bool> present;
};

inline ClassCounts count_outcomes(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw Error("f1: label vectors differ in length");
  if (truth.empty()) throw Error("f1: empty label vectors");
  int classes = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) classes = std::max({classes, truth[i] + 1, predicted[i] + 1});
  auto n = static_cast<std::size_t>(classes);
  ClassCounts c{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), std::vector<bool>(n)};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto t = static_cast<std::size_t>(truth[i]);
    auto p = static_cast<std::size_t>(predicted[i]);
    c.present[t] = c.present[p] = true;
    if (t == p) {
      c.tp[t] += 1;
    } else {
      c.fp[p] += 1;
      c.fn[t] += 1;
    }
  }
  return c;
}

inline double class_f1(const ClassCounts& c, std::size_t k) {
  // 2PR/(P+R) == 2tp / (2tp + fp + fn); zero when tp == 0
  double denom = 2 * c.tp[k] + c.fp[k] + c.fn[k];
  return c.tp[k] > 0 ? 2 * c.tp[k] / denom : 0.0;
}

}  // namespace detail

/// Unweighted mean of per-class F1 over every class occurring in either vector.
inline double f1_macro(std::span<const int> truth, std::span<const int> predicted) {
  auto c = detail::count_outcomes(truth, predicted);
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < c.present.size(); ++k) {
    if (!c.present[k]) continue;
    sum += detail::class_f1(c, k);
    ++n;
  }
  return sum / n;
}

/// F1 of a single positive class.
inline double f1_binary(std::span<const int> truth, std::span<const int> predicted, int positive = 1) {
  auto c = detail::count_outcomes(truth, predicted);
  if (positive < 0 || static_cast<std::size_t>(positive) >= c.present.size()) return 0.0;
  return detail::class_f1(c, static_cast<std::size_t>(positive));
}

enum class Metric { macro_f1, binary_f1 };

inline Metric parse_metric(std::string_view s) {
  if (s == "macro") return Metric::macro_f1;
  if (s == "binary") return Metric::binary_f1;
  throw Error("unknown metric '" + std::string(s) + "' (expected macro, binary)");
}

inline std::string_view metric_name(Metric m) { return m == Metric::macro_f1 ? "macro" : "binary"; }

inline double score_predictions(Metric m, std::span<const int> truth, std::span<const int> predicted) {
  return m == Metric::macro_f1 ? f1_macro(truth, predicted) : f1_binary(truth, predicted);
}

}  // namespace melif

#endif  // MELIF_METRICS_HPP
