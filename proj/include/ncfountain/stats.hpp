#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "ncfountain/erasure_analysis.hpp"

namespace ncfountain {

/// Integer-valued histogram of transmission counts.
class Histogram {
 public:
  void add(std::int64_t value, std::uint64_t count = 1) {
    bins_[value] += count;
    total_ += count;
  }

  void merge(const Histogram& other) {
    for (const auto& [v, c] : other.bins_) add(v, c);
  }

  std::uint64_t total() const noexcept { return total_; }
  const std::map<std::int64_t, std::uint64_t>& bins() const noexcept { return bins_; }

  double probability(std::int64_t value) const {
    auto it = bins_.find(value);
    return (it == bins_.end() || total_ == 0) ? 0.0
                                              : static_cast<double>(it->second) / static_cast<double>(total_);
  }

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::map<std::int64_t, std::uint64_t> bins_;
  std::uint64_t total_ = 0;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased sample variance
  double min = 0.0;
  double max = 0.0;
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.variance = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  return s;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool below(const Interval& other) const noexcept { return hi < other.lo; }
};

/// Two-sided normal quantiles used throughout.
inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489004;

/// Standard error and confidence interval of a statistic from batch
/// estimates: the series is cut into `batches` contiguous batches, the
/// statistic is computed per batch, and the spread of the batch values gives
/// the error. Handles serially dependent series such as carried-over blocks.
struct BatchEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  Interval ci(double z) const { return {estimate - z * std_error, estimate + z * std_error}; }
};

template <class Statistic>
BatchEstimate batch_estimate(std::span<const double> xs, std::size_t batches, Statistic&& stat) {
  if (batches < 2 || xs.size() < 2 * batches) throw std::invalid_argument("batch_estimate: too few samples");
  const std::size_t per = xs.size() / batches;
  std::vector<double> values;
  values.reserve(batches);
  for (std::size_t b = 0; b < batches; ++b) values.push_back(stat(xs.subspan(b * per, per)));
  const Summary s = summarize(values);
  return {stat(xs), std::sqrt(s.variance / static_cast<double>(batches))};
}

inline BatchEstimate batch_mean(std::span<const double> xs, std::size_t batches = 20) {
  return batch_estimate(xs, batches, [](std::span<const double> v) { return summarize(v).mean; });
}

inline BatchEstimate batch_variance(std::span<const double> xs, std::size_t batches = 20) {
  return batch_estimate(xs, batches, [](std::span<const double> v) { return summarize(v).variance; });
}

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Total-variation distance between an empirical histogram and an analytic
/// pdf; histogram mass outside the pdf's support counts against the pdf's tail.
inline double tv_distance(const Histogram& h, const TransmissionPdf& pdf) {
  double acc = 0.0;
  double pdf_seen = 0.0;
  for (std::size_t M = 0; M <= pdf.support_end(); ++M) {
    const double e = h.probability(static_cast<std::int64_t>(M));
    acc += std::abs(e - pdf(M));
    pdf_seen += pdf(M);
  }
  double outside = 0.0;
  for (const auto& [v, c] : h.bins())
    if (v < 0 || static_cast<std::size_t>(v) > pdf.support_end()) outside += h.probability(v);
  acc += std::abs(outside - std::max(0.0, 1.0 - pdf_seen));
  return 0.5 * acc;
}

/// Total-variation distance between two pmfs on 0..n.
inline double tv_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    acc += std::abs(x - y);
  }
  return 0.5 * acc;
}

}  // namespace ncfountain
