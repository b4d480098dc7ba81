#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "specshift/linalg.hpp"

namespace specshift {

/// A named parameter tensor owned elsewhere. `shape` is the logical shape;
/// the values are laid out row-major over (value->rows(), value->cols()),
/// which is also row-major over `shape`.
struct ParamRef {
  std::string name;
  std::vector<std::size_t> shape;
  Matrix* value;
};

/// Deterministic generator for one named stream of a seeded run, so that
/// components draw independently of which other components exist.
std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream);

void fill_uniform(Matrix& m, double bound, std::mt19937_64& rng);

/// Zeroes every tensor in the list.
void zero(const std::vector<ParamRef>& params);

/// Sum of all parameter values weighted by position; detects any change.
double checksum(const std::vector<ParamRef>& params);

}  // namespace specshift
