#include "chaineq/types.hpp"

#include <algorithm>
#include <numeric>

namespace chaineq {

Partition::Partition(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("cluster_sizes: every cluster needs at least one antenna");
    offsets_.push_back(offsets_.back() + s);
  }
}

Partition Partition::equal(int antennas, int clusters) {
  if (clusters < 1 || antennas % clusters != 0)
    throw std::invalid_argument("clusters: must divide the antenna count");
  return Partition(std::vector<int>(static_cast<std::size_t>(clusters), antennas / clusters));
}

int Partition::max_size() const {
  return sizes_.empty() ? 0 : *std::max_element(sizes_.begin(), sizes_.end());
}

cdouble complex_normal(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  const double re = gauss(rng);
  const double im = gauss(rng);
  return {re, im};
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

double relative_frobenius(const CMatrix& a, const CMatrix& reference) {
  const double denom = reference.norm();
  const double diff = (a - reference).norm();
  return denom == 0.0 ? diff : diff / denom;
}

}  // namespace chaineq
