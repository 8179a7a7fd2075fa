#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmflow/grid.hpp"

namespace hmflow {

// Field snapshot: text header (key: value lines ending with a blank line)
// followed by raw doubles in row-major node order, components interleaved.
// The binary round trip is bit-exact. slabs > 1 stores a time-indexed
// sequence of fields back to back (control trajectories).
struct Snapshot {
  int dim = 1, nx = 0, ny = 1;
  double lx = 1.0, ly = 1.0;
  int ncomp = 0;
  int slabs = 1;
  double time = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version;
  std::vector<double> data;
};

void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);

// CSV rendering of one field: header comments, then node coordinates and
// components, fixed %.17g formatting.
std::string field_csv(const Grid& g, const std::vector<double>& data, int ncomp,
                      const std::string& config_hash, std::uint64_t seed,
                      const std::string& version);

void write_text(const std::string& path, const std::string& text);

}  // namespace hmflow
