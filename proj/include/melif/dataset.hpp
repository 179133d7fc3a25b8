#ifndef MELIF_DATASET_HPP
#define MELIF_DATASET_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "melif/common.hpp"

namespace melif {

/// Numeric feature matrix with dense class labels 0..C-1.
///
/// Instances are validated on construction and immutable afterwards, so they
/// can be shared freely between worker threads.
class Dataset {
 public:
  Dataset(std::string name, Matrix features, std::vector<int> labels,
          std::vector<std::string> class_names = {})
      : name_(std::move(name)),
        features_(std::move(features)),
        labels_(std::move(labels)),
        class_names_(std::move(class_names)) {
    validate();
  }

  const std::string& name() const { return name_; }
  const Matrix& features() const { return features_; }
  std::span<const int> labels() const { return labels_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  std::size_t feature_count() const { return features_.cols(); }
  std::size_t object_count() const { return features_.rows(); }
  int class_count() const { return class_count_; }

  std::vector<std::size_t> class_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(class_count_), 0);
    for (int y : labels_) ++sizes[static_cast<std::size_t>(y)];
    return sizes;
  }

  /// Same objects, columns reordered so that new column j is old column order[j].
  Dataset with_columns(std::span<const std::size_t> order) const {
    std::vector<std::size_t> rows(object_count());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return Dataset(name_, features_.select(rows, order), labels_, class_names_);
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  void validate() {
    if (features_.rows() == 0 || features_.cols() == 0)
      throw Error("dataset '" + name_ + "': empty feature matrix");
    if (labels_.size() != features_.rows())
      throw Error("dataset '" + name_ + "': label count does not match object count");
    for (double v : features_.data())
      if (!std::isfinite(v)) throw Error("dataset '" + name_ + "': non-finite feature value");
    int max_label = -1;
    for (int y : labels_) {
      if (y < 0) throw Error("dataset '" + name_ + "': negative label id");
      max_label = std::max(max_label, y);
    }
    class_count_ = max_label + 1;
    auto sizes = class_sizes();
    if (std::count_if(sizes.begin(), sizes.end(), [](auto s) { return s > 0; }) < 2)
      throw Error("dataset '" + name_ + "': fewer than 2 classes");
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      if (sizes[c] == 0) throw Error("dataset '" + name_ + "': label ids are not dense");
      if (sizes[c] < 2)
        throw Error("dataset '" + name_ + "': class " + std::to_string(c) + " has fewer than 2 objects");
    }
    if (class_names_.empty()) {
      for (int c = 0; c < class_count_; ++c) class_names_.push_back(std::to_string(c));
    } else if (class_names_.size() != static_cast<std::size_t>(class_count_)) {
      throw Error("dataset '" + name_ + "': class name count does not match class count");
    }
  }

  std::string name_;
  Matrix features_;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  int class_count_ = 0;
};

/// Which CSV column holds the label: by header name, by 0-based index, or the last column.
struct LabelColumn {
  struct Last {};
  std::variant<Last, std::size_t, std::string> which = Last{};

  static LabelColumn last() { return {}; }
  static LabelColumn index(std::size_t i) { return {i}; }
  static LabelColumn named(std::string n) { return {std::move(n)}; }

  /// "last", a non-negative integer, or a column name.
  static LabelColumn parse(std::string_view text) {
    if (text.empty() || text == "last") return last();
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), idx);
    if (ec == std::errc{} && ptr == text.data() + text.size()) return index(idx);
    return named(std::string(text));
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// A parsed CSV before the Dataset class-size invariants are checked.
struct CsvTable {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> class_names;
};

/// Parses a comma-separated table. Labels may be arbitrary strings and are
/// re-encoded densely in order of first appearance.
inline CsvTable parse_csv_table(std::istream& in, const std::string& name, const LabelColumn& label_column,
                                bool has_header) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::size_t width = 0;
  std::size_t label_idx = 0;
  bool resolved = false;

  auto resolve = [&](std::size_t w) {
    width = w;
    if (width < 2) throw Error(name + ": need at least one feature column and a label column");
    if (std::holds_alternative<LabelColumn::Last>(label_column.which)) {
      label_idx = width - 1;
    } else if (auto* i = std::get_if<std::size_t>(&label_column.which)) {
      label_idx = *i;
    } else {
      const auto& wanted = std::get<std::string>(label_column.which);
      auto it = std::find(header.begin(), header.end(), wanted);
      if (it == header.end()) throw Error(name + ": label column '" + wanted + "' not found");
      label_idx = static_cast<std::size_t>(it - header.begin());
    }
    if (label_idx >= width) throw Error(name + ": label column index out of range");
    resolved = true;
  };

  std::vector<double> values;
  std::vector<int> labels;
  std::map<std::string, int, std::less<>> class_ids;
  std::vector<std::string> class_names;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (has_header && header.empty() && !resolved) {
      for (auto c : cells) header.emplace_back(c);
      resolve(cells.size());
      continue;
    }
    if (!resolved) resolve(cells.size());
    if (cells.size() != width)
      throw Error(name + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                  " cells, expected " + std::to_string(width));
    for (std::size_t c = 0; c < width; ++c) {
      auto cell = cells[c];
      std::string col_name = header.empty() ? std::to_string(c + 1) : "'" + header[c] + "'";
      if (cell.empty())
        throw Error(name + ": missing value at line " + std::to_string(line_no) + ", column " + col_name);
      if (c == label_idx) {
        auto it = class_ids.find(cell);
        if (it == class_ids.end()) {
          it = class_ids.emplace(std::string(cell), static_cast<int>(class_names.size())).first;
          class_names.emplace_back(cell);
        }
        labels.push_back(it->second);
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw Error(name + ": cannot parse '" + std::string(cell) + "' as a finite number at line " +
                    std::to_string(line_no) + ", column " + col_name);
      values.push_back(v);
    }
  }
  if (labels.empty()) throw Error(name + ": no data rows");
  Matrix features(labels.size(), width - 1, std::move(values));
  return {std::move(features), std::move(labels), std::move(class_names)};
}

inline Dataset parse_csv(std::istream& in, const std::string& name, const LabelColumn& label_column,
                         bool has_header) {
  auto t = parse_csv_table(in, name, label_column, has_header);
  return Dataset(name, std::move(t.features), std::move(t.labels), std::move(t.class_names));
}

inline Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column = {},
                        bool has_header = true) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file '" + path.string() + "'");
  return parse_csv(in, path.stem().string(), label_column, has_header);
}

/// Writes features then a trailing "label" column using the class names.
/// Values use shortest round-trip formatting, so load_csv reproduces them exactly.
inline void write_csv(std::ostream& out, const Dataset& ds) {
  const auto& x = ds.features();
  for (std::size_t j = 0; j < x.cols(); ++j) out << 'f' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out << detail::format_double(x(i, j)) << ',';
    out << ds.class_names()[static_cast<std::size_t>(ds.labels()[i])] << '\n';
  }
}

inline void write_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_csv(out, ds);
}

/// Fold id per object.
struct FoldSplit {
  int fold_count = 0;
  std::vector<int> assignments;

  std::vector<std::size_t> test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(i);
    return out;
  }

  friend bool operator==(const FoldSplit&, const FoldSplit&) = default;
};

/// Stratified k-fold assignment. Each class is shuffled and dealt round-robin,
/// continuing the deal position across classes so total fold sizes stay balanced.
/// If a class has fewer than k objects, k is clamped to the smallest class size.
inline FoldSplit stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error("fold count must be at least 2");
  int classes = 0;
  for (int y : labels) classes = std::max(classes, y + 1);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);

  std::size_t smallest = labels.size();
  for (const auto& m : members)
    if (!m.empty()) smallest = std::min(smallest, m.size());
  if (smallest < static_cast<std::size_t>(k)) {
    warn("smallest class has " + std::to_string(smallest) + " objects; clamping fold count " +
         std::to_string(k) + " to " + std::to_string(smallest));
    k = static_cast<int>(smallest);
    if (k < 2) throw Error("cannot build folds: a class has fewer than 2 objects");
  }

  FoldSplit split{k, std::vector<int>(labels.size(), 0)};
  std::mt19937_64 rng(seed);
  std::size_t deal = 0;
  for (auto& m : members) {
    std::shuffle(m.begin(), m.end(), rng);
    for (std::size_t idx : m) split.assignments[idx] = static_cast<int>(deal++ % static_cast<std::size_t>(k));
  }
  return split;
}

inline FoldSplit stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
  return stratified_kfold(ds.labels(), k, seed);
}

/// Unstratified shuffled k-fold; still clamps k so every training set keeps two classes reachable.
inline FoldSplit shuffled_kfold(std::size_t object_count, int k, std::uint64_t seed) {
  if (k < 2) throw Error("fold count must be at least 2");
  if (object_count < static_cast<std::size_t>(k)) throw Error("fewer objects than folds");
  std::vector<std::size_t> order(object_count);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  FoldSplit split{k, std::vector<int>(object_count, 0)};
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    split.assignments[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  return split;
}

/// One dataset line of a benchmark manifest.
struct ManifestEntry {
  std::filesystem::path path;
  LabelColumn label_column;
};

/// Manifest format: one dataset per line, "<path> [label_column]". Blank lines
/// and lines starting with '#' are ignored. Relative paths resolve against the
/// manifest's directory.
inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::istringstream fields{std::string(view)};
    std::string file, label;
    fields >> file >> label;
    std::filesystem::path p(file);
    if (p.is_relative()) p = path.parent_path() / p;
    entries.push_back({p, LabelColumn::parse(label)});
  }
  if (entries.empty()) throw Error("manifest '" + path.string() + "' lists no datasets");
  return entries;
}

}  // namespace melif

#endif  // MELIF_DATASET_HPP
