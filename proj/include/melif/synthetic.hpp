#ifndef MELIF_SYNTHETIC_HPP
#define MELIF_SYNTHETIC_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "melif/dataset.hpp"

namespace melif {

/// Planted classification problem: `informative` columns carry a class-dependent
/// mean shift, every other column is pure N(0,1) noise.
struct SyntheticSpec {
  std::size_t objects = 60;
  std::size_t features = 1000;
  std::size_t informative = 10;
  int classes = 2;
  double shift = 1.0;
  std::uint64_t seed = 1;
};

struct SyntheticDataset {
  Dataset dataset;
  std::vector<std::size_t> informative;  // ascending column ids
};

inline SyntheticDataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 2) throw Error("synthetic: need at least 2 classes");
  if (spec.objects < 2 * static_cast<std::size_t>(spec.classes))
    throw Error("synthetic: need at least 2 objects per class");
  if (spec.informative > spec.features) throw Error("synthetic: more informative features than features");

  std::mt19937_64 rng(spec.seed);
  std::vector<int> labels(spec.objects);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(spec.classes));
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<std::size_t> columns(spec.features);
  std::iota(columns.begin(), columns.end(), std::size_t{0});
  std::shuffle(columns.begin(), columns.end(), rng);
  std::vector<std::size_t> informative(columns.begin(), columns.begin() + static_cast<std::ptrdiff_t>(spec.informative));
  std::sort(informative.begin(), informative.end());
  std::vector<char> is_informative(spec.features, 0);
  for (auto c : informative) is_informative[c] = 1;

  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix x(spec.objects, spec.features);
  for (std::size_t i = 0; i < spec.objects; ++i)
    for (std::size_t j = 0; j < spec.features; ++j)
      x(i, j) = noise(rng) + (is_informative[j] ? spec.shift * labels[i] : 0.0);

  std::string name = "synthetic_n" + std::to_string(spec.objects) + "_d" + std::to_string(spec.features) + "_k" +
                     std::to_string(spec.informative) + "_s" + std::to_string(spec.seed);
  return {Dataset(std::move(name), std::move(x), std::move(labels)), std::move(informative)};
}

}  // namespace melif

#endif  // MELIF_SYNTHETIC_HPP
