#ifndef MELIF_COMMON_HPP
#define MELIF_COMMON_HPP

#include <cstddef>
#include <functional>
#include <iostream>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace melif {

/// Base error for everything the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct WarningSink {
  std::mutex mutex;
  std::function<void(const std::string&)> handler = [](const std::string& msg) {
    std::clog << "melif: warning: " << msg << '\n';
  };
};

inline WarningSink& warning_sink() {
  static WarningSink sink;
  return sink;
}

}  // namespace detail

/// Replaces the warning handler; returns the previous one.
inline std::function<void(const std::string&)> set_warning_handler(
    std::function<void(const std::string&)> handler) {
  auto& sink = detail::warning_sink();
  std::lock_guard lock(sink.mutex);
  std::swap(sink.handler, handler);
  return handler;
}

inline void warn(const std::string& msg) {
  auto& sink = detail::warning_sink();
  std::lock_guard lock(sink.mutex);
  if (sink.handler) sink.handler(msg);
}

/// Dense row-major matrix of doubles. Rows are objects, columns are features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw Error("matrix: data size does not match shape");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
    return out;
  }

  std::span<const double> data() const { return data_; }

  /// Copies the given rows restricted to the given columns, in the given order.
  Matrix select(std::span<const std::size_t> row_ids, std::span<const std::size_t> col_ids) const {
    Matrix out(row_ids.size(), col_ids.size());
    for (std::size_t i = 0; i < row_ids.size(); ++i) {
      const double* src = data_.data() + row_ids[i] * cols_;
      double* dst = out.data_.data() + i * col_ids.size();
      for (std::size_t j = 0; j < col_ids.size(); ++j) dst[j] = src[col_ids[j]];
    }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace melif

#endif  // MELIF_COMMON_HPP
