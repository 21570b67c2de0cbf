#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pmoal/game.hpp"
#include "pmoal/rng.hpp"

namespace pmoal {

/// Stochastic contextual stream over a fixed dataset: a held-out test split,
/// per-column standardization fitted on the training split only, and a
/// seeded pass (with or without replacement) over the training rows.
/// Each round reveals a context, hides the label, and answers exactly one
/// action with that action's feedback symbol and regret increment.
class StreamEnv {
 public:
  StreamEnv(Game game, Matrix features, std::vector<int> labels, double test_frac,
            long long horizon, std::uint64_t seed, bool with_replacement = false)
      : game_(std::move(game)), horizon_(horizon) {
    const std::size_t n = features.rows();
    if (labels.size() != n) throw std::invalid_argument("env: labels size != rows");
    if (horizon_ < 1) throw std::invalid_argument("env: horizon must be >= 1");
    if (!(test_frac >= 0.0) || test_frac >= 1.0)
      throw std::invalid_argument("env: test_frac must lie in [0,1)");
    for (int y : labels)
      if (y < 0 || y >= game_.n_outcomes())
        throw std::invalid_argument("env: label outside the game's outcome range");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng split_rng(derive_seed(seed, "split"));
    split_rng.shuffle(order);
    const std::size_t test_size =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_frac));
    const std::size_t train_size = n - test_size;
    if (train_size == 0) throw std::invalid_argument("env: empty training split");
    if (!with_replacement && static_cast<long long>(train_size) < horizon_)
      throw std::invalid_argument(
          "env: training split smaller than horizon (enable replacement or add rows)");

    const std::size_t d = features.cols();
    mean_.assign(d, 0.0);
    scale_.assign(d, 1.0);
    for (std::size_t i = test_size; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) mean_[c] += features(order[i], c);
    for (auto& m : mean_) m /= static_cast<double>(train_size);
    Vec var(d, 0.0);
    for (std::size_t i = test_size; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) {
        const double dv = features(order[i], c) - mean_[c];
        var[c] += dv * dv;
      }
    for (std::size_t c = 0; c < d; ++c) {
      var[c] /= static_cast<double>(train_size);
      scale_[c] = var[c] > 1e-12 ? std::sqrt(var[c]) : 1.0;
    }

    auto standardized_row = [&](std::size_t r) {
      Vec x(d);
      for (std::size_t c = 0; c < d; ++c) x[c] = (features(r, c) - mean_[c]) / scale_[c];
      return x;
    };
    test_features_.reserve(test_size);
    test_labels_.reserve(test_size);
    for (std::size_t i = 0; i < test_size; ++i) {
      test_features_.push_back(standardized_row(order[i]));
      test_labels_.push_back(labels[order[i]]);
    }
    std::vector<std::size_t> pool(order.begin() + static_cast<std::ptrdiff_t>(test_size),
                                  order.end());
    Rng stream_rng(derive_seed(seed, "stream"));
    stream_features_.reserve(static_cast<std::size_t>(horizon_));
    stream_labels_.reserve(static_cast<std::size_t>(horizon_));
    if (with_replacement) {
      for (long long t = 0; t < horizon_; ++t) {
        const std::size_t r = pool[stream_rng.uniform_int(pool.size())];
        stream_features_.push_back(standardized_row(r));
        stream_labels_.push_back(labels[r]);
      }
    } else {
      stream_rng.shuffle(pool);
      for (long long t = 0; t < horizon_; ++t) {
        stream_features_.push_back(standardized_row(pool[static_cast<std::size_t>(t)]));
        stream_labels_.push_back(labels[pool[static_cast<std::size_t>(t)]]);
      }
    }
  }

  const Game& game() const { return game_; }
  long long horizon() const { return horizon_; }
  long long round() const { return t_; }
  int n_features() const { return static_cast<int>(mean_.size()); }
  double cumulative_regret() const { return regret_; }

  const std::vector<Vec>& test_features() const { return test_features_; }
  const std::vector<int>& test_labels() const { return test_labels_; }

  /// Reveal the next context. The outcome stays hidden until feedback().
  const Vec& step() {
    if (round_open_) throw std::runtime_error("env: feedback not consumed");
    if (t_ >= horizon_) throw std::runtime_error("env: stream exhausted");
    round_open_ = true;
    return stream_features_[static_cast<std::size_t>(t_)];
  }

  /// Answer the played action: its feedback symbol for the hidden outcome
  /// and the regret increment against the best action in hindsight.
  std::pair<Symbol, double> feedback(int action) {
    if (!round_open_) throw std::runtime_error("env: no open round");
    if (action < 0 || action >= game_.n_actions())
      throw std::invalid_argument("env: action out of range");
    const int y = stream_labels_[static_cast<std::size_t>(t_)];
    double best = game_.cost_at(0, y);
    for (int i = 1; i < game_.n_actions(); ++i) best = std::min(best, game_.cost_at(i, y));
    const double inc = game_.cost_at(action, y) - best;
    regret_ += inc;
    round_open_ = false;
    ++t_;
    return {game_.symbol_at(action, y), inc};
  }

  /// Hidden outcome of the open round. Evaluation-only backdoor: the harness
  /// uses it for confusion counts, agents must never call it.
  int current_outcome() const {
    if (!round_open_) throw std::runtime_error("env: no open round");
    return stream_labels_[static_cast<std::size_t>(t_)];
  }

 private:
  Game game_;
  long long horizon_;
  Vec mean_, scale_;
  std::vector<Vec> stream_features_;
  std::vector<int> stream_labels_;
  std::vector<Vec> test_features_;
  std::vector<int> test_labels_;
  long long t_ = 0;
  bool round_open_ = false;
  double regret_ = 0.0;
};

/// Balanced Gaussian clusters: class centers sit sep apart (on a line for
/// 1-D inputs, evenly spaced on a circle of diameter sep otherwise), unit
/// isotropic noise. n_rows = 0 picks the smallest dataset whose training
/// split covers the horizon.
struct GaussianSpec {
  int n_classes = 2;
  int n_features = 2;
  double separation = 3.0;
  long long n_rows = 0;
};

inline std::pair<Matrix, std::vector<int>> generate_gaussian_data(const GaussianSpec& spec,
                                                                  double test_frac,
                                                                  long long horizon,
                                                                  std::uint64_t seed) {
  if (spec.n_classes < 2) throw std::invalid_argument("gaussian: need >= 2 classes");
  if (spec.n_features < 1) throw std::invalid_argument("gaussian: need >= 1 feature");
  long long n = spec.n_rows;
  if (n <= 0) {
    n = static_cast<long long>(
        std::ceil(static_cast<double>(horizon) / (1.0 - test_frac)));
    while (n - static_cast<long long>(std::floor(static_cast<double>(n) * test_frac)) <
           horizon)
      ++n;
  }
  std::vector<Vec> centers(static_cast<std::size_t>(spec.n_classes),
                           Vec(static_cast<std::size_t>(spec.n_features), 0.0));
  for (int c = 0; c < spec.n_classes; ++c) {
    if (spec.n_features == 1) {
      centers[c][0] = spec.separation * (c - 0.5 * (spec.n_classes - 1));
    } else {
      const double angle = 6.283185307179586 * c / spec.n_classes;
      centers[c][0] = 0.5 * spec.separation * std::cos(angle);
      centers[c][1] = 0.5 * spec.separation * std::sin(angle);
    }
  }
  Rng rng(derive_seed(seed, "data"));
  Matrix features(static_cast<std::size_t>(n), static_cast<std::size_t>(spec.n_features));
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (long long r = 0; r < n; ++r) {
    const int c = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.n_classes)));
    labels[static_cast<std::size_t>(r)] = c;
    for (int f = 0; f < spec.n_features; ++f)
      features(static_cast<std::size_t>(r), static_cast<std::size_t>(f)) =
          centers[c][static_cast<std::size_t>(f)] + rng.normal();
  }
  return {std::move(features), std::move(labels)};
}

/// Numeric CSV with a header row; the named column holds integer labels in
/// {1..n_classes}, every other column must parse as a double feature.
inline std::pair<Matrix, std::vector<int>> load_csv_data(const std::string& path,
                                                         const std::string& label_column,
                                                         int n_classes) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int label_idx = -1;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == label_column) label_idx = static_cast<int>(c);
  if (label_idx < 0)
    throw std::invalid_argument("csv: no column named '" + label_column + "'");
  std::vector<Vec> rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vec row;
    int col = 0, label = -1;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("csv: non-numeric value '" + cell + "' at line " +
                                    std::to_string(line_no));
      }
      if (used != cell.size())
        throw std::invalid_argument("csv: non-numeric value '" + cell + "' at line " +
                                    std::to_string(line_no));
      if (col == label_idx) {
        label = static_cast<int>(v);
        if (v != std::floor(v) || label < 1 || label > n_classes)
          throw std::invalid_argument("csv: label out of {1.." +
                                      std::to_string(n_classes) + "} at line " +
                                      std::to_string(line_no));
      } else {
        row.push_back(v);
      }
      ++col;
    }
    if (col != static_cast<int>(header.size()))
      throw std::invalid_argument("csv: wrong column count at line " + std::to_string(line_no));
    rows.push_back(std::move(row));
    labels.push_back(label - 1);
  }
  if (rows.empty()) throw std::invalid_argument("csv: no data rows in " + path);
  Matrix features(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) features(r, c) = rows[r][c];
  return {std::move(features), std::move(labels)};
}

}  // namespace pmoal
