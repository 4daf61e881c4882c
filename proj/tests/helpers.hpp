#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>

#include "adsorb/calculator.hpp"
#include "adsorb/errors.hpp"
#include "adsorb/slab.hpp"
#include "adsorb/structure.hpp"

namespace testutil {

inline std::filesystem::path repo_root() { return ADSORB_REPO_ROOT; }

inline std::string fixture_path(const std::string& relative) {
  return (repo_root() / "fixtures" / relative).string();
}

// Scratch directory removed on scope exit; tests write run output here so the
// source tree stays clean.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& stem) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("adsorb-" + stem + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path.string(); }
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

struct Caught {
  bool threw = false;
  adsorb::ErrorKind kind = adsorb::ErrorKind::config;
  std::string message;
};

template <typename Fn>
Caught catch_error(Fn&& fn) {
  Caught c;
  try {
    fn();
  } catch (const adsorb::Error& e) {
    c.threw = true;
    c.kind = e.kind();
    c.message = e.what();
  }
  return c;
}

inline adsorb::Structure fcc_slab(const std::string& element, double a,
                                  const std::array<int, 3>& miller, int nx, int ny,
                                  int layers) {
  adsorb::BulkSpec bulk;
  bulk.kind = adsorb::BulkKind::fcc;
  bulk.element_a = element;
  bulk.a = a;
  adsorb::SlabMetadata meta;
  meta.bulk_formula = element;
  meta.miller = miller;
  meta.layers = layers;
  return adsorb::build_slab(bulk, meta, nx, ny);
}

inline adsorb::Structure pt111_slab() { return fcc_slab("Pt", 4.0, {1, 1, 1}, 2, 2, 3); }

// Single-element table with a wide-open cutoff; shift off keeps the analytic
// pair energy exact at any separation.
inline adsorb::CalcParams uniform_params(const std::string& element, double epsilon,
                                         double sigma, double cutoff, bool shift) {
  adsorb::CalcParams p;
  p.elements[element] = {epsilon, sigma};
  p.cutoff = cutoff;
  p.shift = shift;
  return p;
}

inline adsorb::Structure open_box_dimer(const std::string& element, double r,
                                        double box = 40.0) {
  adsorb::Structure s;
  s.lattice.cell = adsorb::Mat3::identity();
  for (int i = 0; i < 3; ++i) s.lattice.cell.m[i][i] = box;
  s.lattice.pbc = {false, false, false};
  double mid = box / 2.0;
  s.atoms.push_back(adsorb::make_atom(element, {mid - r / 2.0, mid, mid}));
  s.atoms.push_back(adsorb::make_atom(element, {mid + r / 2.0, mid, mid}));
  return s;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

// Runs a shell command, capturing stdout and stderr interleaved.
inline CommandResult run_command(const std::string& command) {
  CommandResult result;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (!pipe) return result;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace testutil
