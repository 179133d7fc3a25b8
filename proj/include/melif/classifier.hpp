#ifndef MELIF_CLASSIFIER_HPP
#define MELIF_CLASSIFIER_HPP

#include <algorithm>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "melif/common.hpp"

namespace melif {

/// A trained classifier.
class Model {
 public:
  virtual ~Model() = default;
  virtual int predict_one(std::span<const double> x) const = 0;

  std::vector<int> predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_one(x.row(i));
    return out;
  }
};

/// Fits a Model to training rows. Implementations must be deterministic.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Model> fit(const Matrix& x, std::span<const int> y) const = 0;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double t = a[k] - b[k];
    d += t * t;
  }
  return d;
}

class ConstantModel final : public Model {
 public:
  explicit ConstantModel(int label) : label_(label) {}
  int predict_one(std::span<const double>) const override { return label_; }

 private:
  int label_;
};

/// Empty train set is an error; a single-class train set yields a constant model.
inline std::unique_ptr<Model> check_train_set(const Matrix& x, std::span<const int> y) {
  if (x.rows() == 0 || y.empty()) throw Error("classifier: empty training set");
  if (x.rows() != y.size()) throw Error("classifier: label count does not match row count");
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) {
    warn("classifier: training set has a single class; predicting class " + std::to_string(y.front()));
    return std::make_unique<ConstantModel>(y.front());
  }
  return nullptr;
}

}  // namespace detail

class NearestCentroidModel final : public Model {
 public:
  NearestCentroidModel(std::vector<int> classes, Matrix centroids)
      : classes_(std::move(classes)), centroids_(std::move(centroids)) {}

  int predict_one(std::span<const double> x) const override {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      double d = detail::squared_distance(x, centroids_.row(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    return classes_[best];
  }

 private:
  std::vector<int> classes_;
  Matrix centroids_;
};

/// Euclidean nearest class mean; ties go to the lowest class id.
class NearestCentroid final : public Classifier {
 public:
  std::string name() const override { return "centroid"; }

  std::unique_ptr<Model> fit(const Matrix& x, std::span<const int> y) const override {
    if (auto m = detail::check_train_set(x, y)) return m;
    int max_label = *std::max_element(y.begin(), y.end());
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_label + 1), 0);
    Matrix sums(counts.size(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto c = static_cast<std::size_t>(y[i]);
      ++counts[c];
      auto row = x.row(i);
      auto dst = sums.row(c);
      for (std::size_t k = 0; k < row.size(); ++k) dst[k] += row[k];
    }
    std::vector<int> classes;
    std::vector<double> centroid_data;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0) continue;
      classes.push_back(static_cast<int>(c));
      for (double s : sums.row(c)) centroid_data.push_back(s / static_cast<double>(counts[c]));
    }
    Matrix centroids(classes.size(), x.cols(), std::move(centroid_data));
    return std::make_unique<NearestCentroidModel>(std::move(classes), std::move(centroids));
  }
};

class KnnModel final : public Model {
 public:
  KnnModel(Matrix x, std::vector<int> y, std::size_t k) : x_(std::move(x)), y_(std::move(y)), k_(k) {}

  // Majority vote of the k nearest rows (stable on distance, so earlier rows win
  // distance ties); vote ties go to the class holding the single nearest neighbor
  // among the tied classes, then the lowest id.
  int predict_one(std::span<const double> q) const override {
    std::vector<std::pair<double, std::size_t>> dist(x_.rows());
    for (std::size_t i = 0; i < x_.rows(); ++i) dist[i] = {detail::squared_distance(q, x_.row(i)), i};
    const std::size_t k = std::min(k_, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    int max_label = *std::max_element(y_.begin(), y_.end());
    std::vector<std::size_t> votes(static_cast<std::size_t>(max_label + 1), 0);
    std::vector<std::size_t> first_rank(votes.size(), k);
    for (std::size_t r = 0; r < k; ++r) {
      auto c = static_cast<std::size_t>(y_[dist[r].second]);
      ++votes[c];
      first_rank[c] = std::min(first_rank[c], r);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
      if (votes[c] > votes[best] || (votes[c] == votes[best] && first_rank[c] < first_rank[best])) best = c;
    return static_cast<int>(best);
  }

 private:
  Matrix x_;
  std::vector<int> y_;
  std::size_t k_;
};

/// k nearest neighbors with Euclidean distance.
class Knn final : public Classifier {
 public:
  explicit Knn(std::size_t k = 5) : k_(k) {
    if (k_ == 0) throw Error("knn: k must be positive");
  }
  std::string name() const override { return "knn"; }

  std::unique_ptr<Model> fit(const Matrix& x, std::span<const int> y) const override {
    if (auto m = detail::check_train_set(x, y)) return m;
    return std::make_unique<KnnModel>(x, std::vector<int>(y.begin(), y.end()), k_);
  }

 private:
  std::size_t k_;
};

/// "centroid", "knn" (k=5) or "knn:<k>".
inline std::unique_ptr<Classifier> make_classifier(std::string_view spec) {
  if (spec == "centroid") return std::make_unique<NearestCentroid>();
  if (spec == "knn") return std::make_unique<Knn>(5);
  if (spec.starts_with("knn:")) {
    int k = std::stoi(std::string(spec.substr(4)));
    if (k <= 0) throw Error("knn: k must be positive");
    return std::make_unique<Knn>(static_cast<std::size_t>(k));
  }
  throw Error("unknown classifier '" + std::string(spec) + "' (expected centroid, knn, knn:<k>)");
}

}  // namespace melif

#endif  // MELIF_CLASSIFIER_HPP
