#include "wgf/sample_set.hpp"

#include <algorithm>
#include <stdexcept>

namespace wgf {

SampleSet::SampleSet(std::vector<double> samples) : z_(std::move(samples)) {
  std::sort(z_.begin(), z_.end());
  s1_.assign(z_.size() + 1, 0.0L);
  s2_.assign(z_.size() + 1, 0.0L);
  for (std::size_t l = 0; l < z_.size(); ++l) {
    const long double z = z_[l];
    s1_[l + 1] = s1_[l] + z;
    s2_[l + 1] = s2_[l] + z * z;
  }
}

std::size_t SampleSet::upper(double b) const {
  return std::upper_bound(z_.begin(), z_.end(), b) - z_.begin();
}

std::size_t SampleSet::lower(double b) const {
  return std::lower_bound(z_.begin(), z_.end(), b) - z_.begin();
}

std::array<long double, 3> SampleSet::range_sums(std::size_t i, std::size_t j) const {
  if (j <= i) return {0.0L, 0.0L, 0.0L};
  return {static_cast<long double>(j - i), s1_[j] - s1_[i], s2_[j] - s2_[i]};
}

WeightedPrefix::WeightedPrefix(const SampleSet& samples, std::span<const double> weights) {
  if (weights.size() != samples.size()) throw std::invalid_argument("WeightedPrefix: size mismatch");
  c0_.assign(weights.size() + 1, 0.0L);
  c1_.assign(weights.size() + 1, 0.0L);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    c0_[l + 1] = c0_[l] + weights[l];
    c1_[l + 1] = c1_[l] + static_cast<long double>(weights[l]) * samples[l];
  }
}

std::array<long double, 2> WeightedPrefix::range_sums(std::size_t i, std::size_t j) const {
  if (j <= i) return {0.0L, 0.0L};
  return {c0_[j] - c0_[i], c1_[j] - c1_[i]};
}

}  // namespace wgf
