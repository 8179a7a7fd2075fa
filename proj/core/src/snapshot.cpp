#include "hmflow/snapshot.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hmflow/errors.hpp"

namespace hmflow {

namespace {
constexpr const char* kMagic = "hmflow-snapshot";
}

void write_snapshot(const std::string& path, const Snapshot& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("snapshot: cannot open '" + path + "' for writing");
  char buf[256];
  out << kMagic << "\n";
  std::snprintf(buf, sizeof(buf), "dim: %d\n", s.dim);
  out << buf;
  std::snprintf(buf, sizeof(buf), "nx: %d\nny: %d\n", s.nx, s.ny);
  out << buf;
  std::snprintf(buf, sizeof(buf), "lx: %.17g\nly: %.17g\n", s.lx, s.ly);
  out << buf;
  std::snprintf(buf, sizeof(buf), "ncomp: %d\nslabs: %d\n", s.ncomp, s.slabs);
  out << buf;
  std::snprintf(buf, sizeof(buf), "time: %.17g\n", s.time);
  out << buf;
  std::snprintf(buf, sizeof(buf), "seed: %llu\n", static_cast<unsigned long long>(s.seed));
  out << buf;
  out << "config: " << s.config_hash << "\n";
  out << "version: " << s.version << "\n";
  out << "\n";
  out.write(reinterpret_cast<const char*>(s.data.data()),
            static_cast<std::streamsize>(s.data.size() * sizeof(double)));
  if (!out) throw Error("snapshot: write failed for '" + path + "'");
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("snapshot: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw Error("snapshot: '" + path + "' is not a field snapshot");
  }
  Snapshot s;
  while (std::getline(in, line) && !line.empty()) {
    const std::size_t colon = line.find(": ");
    if (colon == std::string::npos) throw Error("snapshot: malformed header line '" + line + "'");
    const std::string key = line.substr(0, colon);
    const std::string val = line.substr(colon + 2);
    if (key == "dim") s.dim = std::stoi(val);
    else if (key == "nx") s.nx = std::stoi(val);
    else if (key == "ny") s.ny = std::stoi(val);
    else if (key == "lx") s.lx = std::stod(val);
    else if (key == "ly") s.ly = std::stod(val);
    else if (key == "ncomp") s.ncomp = std::stoi(val);
    else if (key == "slabs") s.slabs = std::stoi(val);
    else if (key == "time") s.time = std::stod(val);
    else if (key == "seed") s.seed = std::stoull(val);
    else if (key == "config") s.config_hash = val;
    else if (key == "version") s.version = val;
    // Unknown keys are ignored for forward compatibility.
  }
  const std::size_t expect =
      static_cast<std::size_t>(s.nx) * s.ny * s.ncomp * (s.slabs > 0 ? s.slabs : 1);
  s.data.resize(expect);
  in.read(reinterpret_cast<char*>(s.data.data()),
          static_cast<std::streamsize>(expect * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != expect * sizeof(double)) {
    throw Error("snapshot: '" + path + "' truncated");
  }
  return s;
}

std::string field_csv(const Grid& g, const std::vector<double>& data, int ncomp,
                      const std::string& config_hash, std::uint64_t seed,
                      const std::string& version) {
  std::string out;
  out += "# version: " + version + "\n";
  out += "# config: " + config_hash + "\n";
  char buf[512];
  std::snprintf(buf, sizeof(buf), "# seed: %llu\n", static_cast<unsigned long long>(seed));
  out += buf;
  out += g.dim == 1 ? "x" : "x,y";
  for (int c = 0; c < ncomp; ++c) {
    std::snprintf(buf, sizeof(buf), ",c%d", c);
    out += buf;
  }
  out += "\n";
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int node = g.index(i, j);
      if (g.dim == 1) {
        std::snprintf(buf, sizeof(buf), "%.17g", g.x(i));
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", g.x(i), g.y(j));
      }
      out += buf;
      for (int c = 0; c < ncomp; ++c) {
        std::snprintf(buf, sizeof(buf), ",%.17g", data[static_cast<std::size_t>(ncomp) * node + c]);
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace hmflow
