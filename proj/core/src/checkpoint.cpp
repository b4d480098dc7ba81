#include "specshift/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "specshift/error.hpp"

namespace specshift {

namespace {

constexpr const char* kMagic = "specshift-checkpoint 1";

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

void put_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xffU));
    bits >>= 8;
  }
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

const TensorRecord* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const std::string* Checkpoint::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string serialize(const Checkpoint& ckpt) {
  std::string out = kMagic;
  out += '\n';
  for (const auto& [k, v] : ckpt.config) out += "config " + k + "=" + v + "\n";
  for (const auto& [k, v] : ckpt.meta) out += "meta " + k + "=" + v + "\n";
  std::size_t total = 0;
  for (const auto& t : ckpt.tensors) {
    require(t.values.size() == product(t.shape),
            "tensor " + t.name + " holds " + std::to_string(t.values.size()) +
                " values but its shape " + shape_string(t.shape) + " needs " +
                std::to_string(product(t.shape)));
    out += "tensor " + t.name;
    for (std::size_t d : t.shape) out += " " + std::to_string(d);
    out += '\n';
    total += t.values.size();
  }
  out += "payload " + std::to_string(total * 8) + "\n";
  out.reserve(out.size() + total * 8);
  for (const auto& t : ckpt.tensors) {
    for (double v : t.values) put_le(out, v);
  }
  return out;
}

Checkpoint deserialize(const std::string& bytes, const std::string& origin) {
  auto bad = [&origin](const std::string& why) {
    fail(ErrorKind::checkpoint, origin + ": " + why);
  };
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) bad("truncated header");
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (next_line() != kMagic) bad("not a specshift checkpoint");
  Checkpoint ckpt;
  std::size_t payload = 0;
  for (;;) {
    const std::string line = next_line();
    const std::size_t sp = line.find(' ');
    if (sp == std::string::npos) bad("malformed header line '" + line + "'");
    const std::string kind = line.substr(0, sp);
    const std::string rest = line.substr(sp + 1);
    if (kind == "config" || kind == "meta") {
      const std::size_t eq = rest.find('=');
      if (eq == std::string::npos) bad("malformed " + kind + " line '" + line + "'");
      (kind == "config" ? ckpt.config : ckpt.meta).emplace_back(rest.substr(0, eq), rest.substr(eq + 1));
    } else if (kind == "tensor") {
      std::istringstream in(rest);
      TensorRecord t;
      in >> t.name;
      std::size_t d;
      while (in >> d) t.shape.push_back(d);
      if (t.name.empty()) bad("tensor line without a name");
      ckpt.tensors.push_back(std::move(t));
    } else if (kind == "payload") {
      try {
        payload = std::stoull(rest);
      } catch (const std::exception&) {
        bad("malformed payload size");
      }
      break;
    } else {
      bad("unknown header entry '" + kind + "'");
    }
  }
  std::size_t expected = 0;
  for (const auto& t : ckpt.tensors) expected += product(t.shape) * 8;
  if (payload != expected) {
    bad("payload size " + std::to_string(payload) + " does not match the tensor table (" +
        std::to_string(expected) + " bytes)");
  }
  if (bytes.size() - pos != payload) {
    bad("file holds " + std::to_string(bytes.size() - pos) + " payload bytes, header says " +
        std::to_string(payload));
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (auto& t : ckpt.tensors) {
    t.values.resize(product(t.shape));
    for (double& v : t.values) {
      v = get_le(p);
      p += 8;
    }
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::checkpoint, path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::checkpoint, path.string() + ": write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::checkpoint, path.string() + ": cannot open checkpoint");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str(), path.string());
}

std::vector<TensorRecord> capture(const std::vector<ParamRef>& params) {
  std::vector<TensorRecord> out;
  for (const auto& p : params) {
    TensorRecord t{p.name, p.shape, {}};
    const Matrix& m = *p.value;
    t.values.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) t.values.push_back(m(r, c));
    }
    out.push_back(std::move(t));
  }
  return out;
}

void restore(const Checkpoint& ckpt, const std::vector<ParamRef>& params) {
  for (const auto& p : params) {
    const TensorRecord* t = ckpt.find(p.name);
    if (t == nullptr) fail(ErrorKind::checkpoint, "checkpoint lacks tensor " + p.name);
    if (t->shape != p.shape) {
      fail(ErrorKind::checkpoint, "tensor " + p.name + " has shape " + shape_string(t->shape) +
                                      " in the checkpoint but " + shape_string(p.shape) +
                                      " in the model");
    }
    Matrix& m = *p.value;
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t->values[i++];
    }
  }
}

}  // namespace specshift
