#pragma once

// A frozen, sorted particle set with prefix moments, so that sums of
// polynomials of degree <= 2 over any half-line or interval cost O(log M).

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace wgf {

class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::vector<double> samples);

  std::size_t size() const { return z_.size(); }
  bool empty() const { return z_.empty(); }
  std::span<const double> values() const { return z_; }
  double operator[](std::size_t i) const { return z_[i]; }

  /// First index with z > b.
  std::size_t upper(double b) const;
  /// First index with z >= b.
  std::size_t lower(double b) const;

  /// Sums of (1, z, z^2) over sorted indices [i, j).
  std::array<long double, 3> range_sums(std::size_t i, std::size_t j) const;

 private:
  std::vector<double> z_;
  std::vector<long double> s1_, s2_;  // prefix sums, length M + 1
};

/// Prefix sums of per-sample weights c_l and c_l z_l over a SampleSet.
class WeightedPrefix {
 public:
  WeightedPrefix(const SampleSet& samples, std::span<const double> weights);
  /// (sum c, sum c z) over sorted indices [i, j).
  std::array<long double, 2> range_sums(std::size_t i, std::size_t j) const;

 private:
  std::vector<long double> c0_, c1_;
};

}  // namespace wgf
