#pragma once

#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "optimize.hpp"

namespace spdeopt {

/// Shortest round-trip decimal for a double, so CSV diffs are meaningful
/// and re-ingestion is bit-exact.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[v & 0xf];
    v >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

inline void write_text_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + p.string());
  f << content;
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV exports (long format)
// ---------------------------------------------------------------------------

inline std::string path_to_csv(const state_path& p) {
  std::string out = "sample,step,node,value\n";
  for (int s = 0; s < p.n_samples; ++s)
    for (int j = 0; j <= p.n_steps; ++j) {
      const auto x = p.x(s, j);
      for (int i = 0; i < p.n_dof; ++i) {
        out += std::to_string(s);
        out += ',';
        out += std::to_string(j);
        out += ',';
        out += std::to_string(i);
        out += ',';
        out += format_double(x[i]);
        out += '\n';
      }
    }
  return out;
}

inline std::string adjoint_to_csv(const adjoint_path& a) {
  std::string out = "sample,step,node,value\n";
  for (int s = 0; s < a.n_samples; ++s)
    for (int j = 0; j <= a.n_steps; ++j) {
      const auto x = a.p_at(s, j);
      for (int i = 0; i < a.n_dof; ++i) {
        out += std::to_string(s);
        out += ',';
        out += std::to_string(j);
        out += ',';
        out += std::to_string(i);
        out += ',';
        out += format_double(x[i]);
        out += '\n';
      }
    }
  return out;
}

inline std::string history_to_csv(const std::vector<history_row>& rows) {
  std::string out = "iter,cost,grad_norm,stationarity,step_length\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iter);
    out += ',';
    out += format_double(r.cost);
    out += ',';
    out += format_double(r.grad_norm);
    out += ',';
    out += format_double(r.stationarity);
    out += ',';
    out += format_double(r.step);
    out += '\n';
  }
  return out;
}

inline std::string control_to_csv(const control_field& u) {
  std::string out = "sample,step,channel,index,value\n";
  for (int s = 0; s < u.n_samples; ++s)
    for (int j = 0; j < u.n_steps; ++j) {
      for (int i = 0; i < u.n_interior; ++i) {
        out += std::to_string(s) + ',' + std::to_string(j) + ",interior," + std::to_string(i) +
               ',' + format_double(u.interior[u.int_offset(s, j) + i]) + '\n';
      }
      for (int i = 0; i < u.n_boundary; ++i) {
        out += std::to_string(s) + ',' + std::to_string(j) + ",boundary," + std::to_string(i) +
               ',' + format_double(u.boundary[u.bdy_offset(s, j) + i]) + '\n';
      }
    }
  return out;
}

// ---------------------------------------------------------------------------
// Compact binary dump (re-ingestion format)
// ---------------------------------------------------------------------------

inline std::string path_to_binary(const state_path& p) {
  std::string out;
  const char magic[8] = {'S', 'P', 'D', 'E', 'P', 'T', 'H', '1'};
  out.append(magic, 8);
  const std::uint32_t dims[3] = {static_cast<std::uint32_t>(p.n_samples),
                                 static_cast<std::uint32_t>(p.n_steps),
                                 static_cast<std::uint32_t>(p.n_dof)};
  out.append(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.append(reinterpret_cast<const char*>(p.data.data()), p.data.size() * sizeof(double));
  return out;
}

/// Loads the data block of a binary dump; control/driver metadata are not
/// part of the format.
inline state_path path_from_binary(const std::string& blob) {
  require(blob.size() >= 8 + 3 * sizeof(std::uint32_t), "path_from_binary: truncated header");
  require(blob.compare(0, 8, "SPDEPTH1") == 0, "path_from_binary: bad magic");
  std::uint32_t dims[3];
  std::memcpy(dims, blob.data() + 8, sizeof(dims));
  state_path p;
  p.n_samples = static_cast<int>(dims[0]);
  p.n_steps = static_cast<int>(dims[1]);
  p.n_dof = static_cast<int>(dims[2]);
  const std::size_t count =
      static_cast<std::size_t>(p.n_samples) * (p.n_steps + 1) * p.n_dof;
  require(blob.size() == 8 + sizeof(dims) + count * sizeof(double),
          "path_from_binary: size mismatch");
  p.data.resize(count);
  std::memcpy(p.data.data(), blob.data() + 8 + sizeof(dims), count * sizeof(double));
  return p;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

/// Artifact listing with content hashes; no timestamps, so identical runs
/// produce identical manifests.
class manifest {
 public:
  manifest(std::uint64_t config_hash, std::uint64_t seed, int samples)
      : config_hash_(config_hash), seed_(seed), samples_(samples) {}

  void add(const std::string& name, const std::string& content) {
    artifacts_.emplace_back(name, fnv1a64(content));
  }

  std::string text() const {
    std::string out;
    out += "config_hash " + hex16(config_hash_) + "\n";
    out += "version " + std::string(k_version) + "\n";
    out += "seed " + std::to_string(seed_) + "\n";
    out += "samples " + std::to_string(samples_) + "\n";
    for (const auto& [name, h] : artifacts_) out += "artifact " + name + " " + hex16(h) + "\n";
    return out;
  }

 private:
  std::uint64_t config_hash_;
  std::uint64_t seed_;
  int samples_;
  std::vector<std::pair<std::string, std::uint64_t>> artifacts_;
};

}  // namespace spdeopt
