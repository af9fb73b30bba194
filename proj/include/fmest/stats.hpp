#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fmest {

// Batch-means estimator: n samples split into `batches` consecutive equal
// batches (the remainder joins the last batch). The standard error is the
// spread of batch means over sqrt(batches).
class BatchMeans {
 public:
  explicit BatchMeans(std::uint64_t n, int batches = 100)
      : batch_len_(n / static_cast<std::uint64_t>(batches) == 0 ? 1 : n / static_cast<std::uint64_t>(batches)),
        max_batches_(batches) {}

  void add(double x) {
    total_ += x;
    ++count_;
    current_ += x;
    ++current_len_;
    if (current_len_ == batch_len_ && static_cast<int>(means_.size()) < max_batches_ - 1) flush();
  }

  double mean() const { return count_ ? total_ / static_cast<double>(count_) : 0.0; }
  std::uint64_t count() const { return count_; }

  double standard_error() const {
    std::vector<double> means = means_;
    if (current_len_ > 0) means.push_back(current_ / static_cast<double>(current_len_));
    const std::size_t b = means.size();
    if (b < 2) return 0.0;
    double avg = 0.0;
    for (double m : means) avg += m;
    avg /= static_cast<double>(b);
    double ss = 0.0;
    for (double m : means) ss += (m - avg) * (m - avg);
    return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
  }

 private:
  void flush() {
    means_.push_back(current_ / static_cast<double>(current_len_));
    current_ = 0.0;
    current_len_ = 0;
  }

  std::uint64_t batch_len_;
  int max_batches_;
  std::vector<double> means_;
  double current_ = 0.0;
  std::uint64_t current_len_ = 0;
  double total_ = 0.0;
  std::uint64_t count_ = 0;
};

}  // namespace fmest
