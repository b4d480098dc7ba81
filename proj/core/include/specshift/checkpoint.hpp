#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "specshift/params.hpp"

namespace specshift {

struct TensorRecord {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;  // row-major over shape
};

/// Text header followed by a little-endian float64 payload:
///
///   specshift-checkpoint 1
///   config <key>=<value>
///   meta <key>=<value>
///   tensor <name> <d0> <d1> ...
///   payload <bytes>
///   <raw bytes>
struct Checkpoint {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<TensorRecord> tensors;

  const TensorRecord* find(const std::string& name) const;
  const std::string* meta_value(const std::string& key) const;
};

std::string serialize(const Checkpoint& ckpt);
Checkpoint deserialize(const std::string& bytes, const std::string& origin = "<memory>");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies the current values of the given parameters.
std::vector<TensorRecord> capture(const std::vector<ParamRef>& params);

/// Writes stored tensors into `params` by name. Missing tensors or shape
/// mismatches raise a checkpoint error naming the tensor.
void restore(const Checkpoint& ckpt, const std::vector<ParamRef>& params);

}  // namespace specshift
