#ifndef MELIF_FILTERS_HPP
#define MELIF_FILTERS_HPP

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "melif/common.hpp"
#include "melif/dataset.hpp"

namespace melif {

/// Per-feature importance scores produced by one measure.
struct ImportanceVector {
  std::string measure_name;
  std::vector<double> scores;
};

enum class Measure { spearman, symmetric_uncertainty, fit_criterion, vdm };

inline std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::spearman: return "spearman";
    case Measure::symmetric_uncertainty: return "su";
    case Measure::fit_criterion: return "fc";
    case Measure::vdm: return "vdm";
  }
  return "?";
}

inline Measure parse_measure(std::string_view name) {
  if (name == "spearman") return Measure::spearman;
  if (name == "su") return Measure::symmetric_uncertainty;
  if (name == "fc") return Measure::fit_criterion;
  if (name == "vdm") return Measure::vdm;
  throw Error("unknown measure '" + std::string(name) + "' (expected spearman, su, fc, vdm)");
}

inline std::vector<Measure> default_measures() {
  return {Measure::spearman, Measure::symmetric_uncertainty, Measure::fit_criterion, Measure::vdm};
}

struct FilterOptions {
  int bins = 10;
  double sigma_floor = 1e-12;
  bool normalize = true;
  bool parallel = true;
};

/// Average ranks (1-based); tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Equal-width discretization over the observed range. A constant input maps to bin 0.
inline std::vector<int> discretize(std::span<const double> values, int bins) {
  if (bins < 1) throw Error("bin count must be positive");
  std::vector<int> codes(values.size(), 0);
  if (values.empty()) return codes;
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return codes;
  double scale = static_cast<double>(bins) / (hi - lo);
  for (std::size_t i = 0; i < values.size(); ++i) {
    int b = static_cast<int>(std::floor((values[i] - lo) * scale));
    codes[i] = std::clamp(b, 0, bins - 1);
  }
  return codes;
}

namespace detail {

inline double entropy_bits(std::span<const double> counts, double total) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0) {
      double p = c / total;
      h -= p * std::log2(p);
    }
  return h;
}

inline int code_count(std::span<const int> codes) {
  int n = 0;
  for (int c : codes) n = std::max(n, c + 1);
  return n;
}

}  // namespace detail

/// 2 I(A;B) / (H(A) + H(B)) over two discrete code vectors, in bits; 0 when both are constant.
inline double symmetric_uncertainty(std::span<const int> a, std::span<const int> b) {
  const int na = detail::code_count(a), nb = detail::code_count(b);
  std::vector<double> joint(static_cast<std::size_t>(na * nb), 0.0), pa(static_cast<std::size_t>(na), 0.0),
      pb(static_cast<std::size_t>(nb), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[static_cast<std::size_t>(a[i] * nb + b[i])] += 1.0;
    pa[static_cast<std::size_t>(a[i])] += 1.0;
    pb[static_cast<std::size_t>(b[i])] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double ha = detail::entropy_bits(pa, n), hb = detail::entropy_bits(pb, n);
  double hab = detail::entropy_bits(joint, n);
  if (ha + hb <= 0.0) return 0.0;
  double su = 2.0 * (ha + hb - hab) / (ha + hb);
  return std::clamp(su, 0.0, 1.0);
}

/// |Spearman rho| between every feature column and the integer labels.
inline ImportanceVector spearman_scores(const Dataset& ds) {
  const std::size_t n = ds.object_count();
  std::vector<double> y(ds.labels().begin(), ds.labels().end());
  auto ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(n + 1);  // mean of any average-rank vector
  double syy = 0.0;
  for (double r : ry) syy += (r - mean) * (r - mean);

  ImportanceVector out{"spearman", std::vector<double>(ds.feature_count(), 0.0)};
  for (std::size_t j = 0; j < ds.feature_count(); ++j) {
    auto rx = average_ranks(ds.features().column(j));
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dx = rx[i] - mean;
      sxx += dx * dx;
      sxy += dx * (ry[i] - mean);
    }
    if (sxx <= 0.0 || syy <= 0.0) continue;
    out.scores[j] = std::min(1.0, std::abs(sxy / std::sqrt(sxx * syy)));
  }
  return out;
}

inline ImportanceVector symmetric_uncertainty_scores(const Dataset& ds, int bins = 10) {
  ImportanceVector out{"su", std::vector<double>(ds.feature_count(), 0.0)};
  for (std::size_t j = 0; j < ds.feature_count(); ++j) {
    auto codes = discretize(ds.features().column(j), bins);
    out.scores[j] = symmetric_uncertainty(codes, ds.labels());
  }
  return out;
}

/// Fraction of objects whose value is nearest, in per-class standard deviations,
/// to their own class mean. Ties go to the lowest class id.
inline ImportanceVector fit_criterion_scores(const Dataset& ds, double sigma_floor = 1e-12) {
  const std::size_t n = ds.object_count();
  const auto classes = static_cast<std::size_t>(ds.class_count());
  const auto sizes = ds.class_sizes();
  const auto labels = ds.labels();
  ImportanceVector out{"fc", std::vector<double>(ds.feature_count(), 0.0)};
  std::vector<double> mu(classes), sd(classes);
  for (std::size_t j = 0; j < ds.feature_count(); ++j) {
    std::fill(mu.begin(), mu.end(), 0.0);
    std::fill(sd.begin(), sd.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) mu[static_cast<std::size_t>(labels[i])] += ds.features()(i, j);
    for (std::size_t c = 0; c < classes; ++c) mu[c] /= static_cast<double>(sizes[c]);
    for (std::size_t i = 0; i < n; ++i) {
      double d = ds.features()(i, j) - mu[static_cast<std::size_t>(labels[i])];
      sd[static_cast<std::size_t>(labels[i])] += d * d;
    }
    for (std::size_t c = 0; c < classes; ++c) sd[c] = std::sqrt(sd[c] / static_cast<double>(sizes[c])) + sigma_floor;

    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double x = ds.features()(i, j);
      std::size_t best = 0;
      double best_d = std::abs(x - mu[0]) / sd[0];
      for (std::size_t c = 1; c < classes; ++c) {
        double d = std::abs(x - mu[c]) / sd[c];
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best == static_cast<std::size_t>(labels[i])) ++hits;
    }
    out.scores[j] = static_cast<double>(hits) / static_cast<double>(n);
  }
  return out;
}

/// Value difference metric over equal-width bins: sum over unordered pairs of
/// non-empty bins and over classes of the squared class-probability difference.
inline ImportanceVector vdm_scores(const Dataset& ds, int bins = 10) {
  const auto classes = static_cast<std::size_t>(ds.class_count());
  const auto labels = ds.labels();
  ImportanceVector out{"vdm", std::vector<double>(ds.feature_count(), 0.0)};
  std::vector<double> counts;
  std::vector<double> totals;
  for (std::size_t j = 0; j < ds.feature_count(); ++j) {
    auto codes = discretize(ds.features().column(j), bins);
    counts.assign(static_cast<std::size_t>(bins) * classes, 0.0);
    totals.assign(static_cast<std::size_t>(bins), 0.0);
    for (std::size_t i = 0; i < codes.size(); ++i) {
      auto b = static_cast<std::size_t>(codes[i]);
      counts[b * classes + static_cast<std::size_t>(labels[i])] += 1.0;
      totals[b] += 1.0;
    }
    // sum_{v<w} (p_v - p_w)^2 = K * sum_v p_v^2 - (sum_v p_v)^2 over the K non-empty bins
    double nonempty = 0.0;
    for (double t : totals)
      if (t > 0) nonempty += 1.0;
    double score = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      double s = 0.0, s2 = 0.0;
      for (std::size_t b = 0; b < totals.size(); ++b) {
        if (totals[b] == 0) continue;
        double p = counts[b * classes + c] / totals[b];
        s += p;
        s2 += p * p;
      }
      score += nonempty * s2 - s * s;
    }
    out.scores[j] = std::max(0.0, score);
  }
  return out;
}

inline ImportanceVector compute_measure(const Dataset& ds, Measure m, const FilterOptions& opts = {}) {
  switch (m) {
    case Measure::spearman: return spearman_scores(ds);
    case Measure::symmetric_uncertainty: return symmetric_uncertainty_scores(ds, opts.bins);
    case Measure::fit_criterion: return fit_criterion_scores(ds, opts.sigma_floor);
    case Measure::vdm: return vdm_scores(ds, opts.bins);
  }
  throw Error("unknown measure");
}

/// Min-max rescale to [0,1]; a constant vector becomes all zeros.
inline ImportanceVector normalize(ImportanceVector v) {
  if (v.scores.empty()) return v;
  auto [lo_it, hi_it] = std::minmax_element(v.scores.begin(), v.scores.end());
  double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    std::fill(v.scores.begin(), v.scores.end(), 0.0);
    return v;
  }
  double span = hi - lo;
  for (double& s : v.scores) s = (s - lo) / span;
  return v;
}

/// The N basic measures of one dataset, precomputed and normalized. The order of
/// measures fixes the meaning of each weight coordinate.
class FilterEnsemble {
 public:
  FilterEnsemble(const Dataset& ds, std::vector<Measure> measures, const FilterOptions& opts = {})
      : measures_(std::move(measures)) {
    if (measures_.empty()) throw Error("filter ensemble needs at least one measure");
    if (opts.parallel && measures_.size() > 1) {
      std::vector<std::future<ImportanceVector>> jobs;
      for (Measure m : measures_)
        jobs.push_back(std::async(std::launch::async, [&ds, m, &opts] { return compute_measure(ds, m, opts); }));
      for (auto& j : jobs) vectors_.push_back(j.get());
    } else {
      for (Measure m : measures_) vectors_.push_back(compute_measure(ds, m, opts));
    }
    if (opts.normalize)
      for (auto& v : vectors_) v = normalize(std::move(v));
  }

  /// Builds directly from already-computed vectors (no normalization applied).
  explicit FilterEnsemble(std::vector<ImportanceVector> vectors) : vectors_(std::move(vectors)) {
    if (vectors_.empty()) throw Error("filter ensemble needs at least one measure");
    for (const auto& v : vectors_)
      if (v.scores.size() != vectors_.front().scores.size())
        throw Error("filter ensemble: importance vectors differ in length");
  }

  std::size_t size() const { return vectors_.size(); }
  std::size_t feature_count() const { return vectors_.front().scores.size(); }
  const std::vector<ImportanceVector>& vectors() const { return vectors_; }
  const std::vector<Measure>& measures() const { return measures_; }

 private:
  std::vector<Measure> measures_;
  std::vector<ImportanceVector> vectors_;
};

/// Weighted sum of the ensemble's normalized measures, per feature.
inline ImportanceVector combine(const FilterEnsemble& ens, std::span<const double> weights) {
  if (weights.size() != ens.size())
    throw Error("combine: weight vector has " + std::to_string(weights.size()) + " entries, ensemble has " +
                std::to_string(ens.size()));
  ImportanceVector out{"combined", std::vector<double>(ens.feature_count(), 0.0)};
  for (std::size_t k = 0; k < ens.size(); ++k) {
    const auto& s = ens.vectors()[k].scores;
    for (std::size_t j = 0; j < s.size(); ++j) out.scores[j] += weights[k] * s[j];
  }
  return out;
}

/// Keep-top-m cutting rule.
struct CuttingRule {
  std::size_t m = 100;
};

/// Indices of the m highest scores, ordered by descending score then ascending index.
inline std::vector<std::size_t> cut_top_m(const ImportanceVector& combined, CuttingRule rule) {
  const auto& s = combined.scores;
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t m = std::min(rule.m, s.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(),
                    [&](std::size_t a, std::size_t b) { return s[a] > s[b] || (s[a] == s[b] && a < b); });
  idx.resize(m);
  return idx;
}

}  // namespace melif

#endif  // MELIF_FILTERS_HPP
