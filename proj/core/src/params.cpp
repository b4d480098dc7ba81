#include "specshift/params.hpp"

namespace specshift {

std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream) {
  // FNV-1a over the stream name, mixed with the seed via splitmix64.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : stream) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (h | 1ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return std::mt19937_64(z);
}

void fill_uniform(Matrix& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  // Row-major fill keeps the draw order aligned with the serialized layout.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
  }
}

void zero(const std::vector<ParamRef>& params) {
  for (const auto& p : params) p.value->setZero();
}

double checksum(const std::vector<ParamRef>& params) {
  double sum = 0.0;
  double weight = 1.0;
  for (const auto& p : params) {
    const Matrix& m = *p.value;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      sum += weight * m.data()[i];
      weight += 1e-3;
    }
  }
  return sum;
}

}  // namespace specshift
