#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "adsorb/geom.hpp"

namespace adsorb {

// Atom role tags used throughout the pipeline.
inline constexpr int kTagFixedBulk = 0;
inline constexpr int kTagFreeSurface = 1;
inline constexpr int kTagAdsorbate = 2;

struct Lattice {
  Mat3 cell;                                    // rows are cell vectors, Angstrom
  std::array<bool, 3> pbc = {true, true, true};

  Vec3 a() const { return cell.row(0); }
  Vec3 b() const { return cell.row(1); }
  Vec3 c() const { return cell.row(2); }
  double volume() const { return cell.det(); }

  Vec3 fractional(const Vec3& cartesian) const;
  Vec3 cartesian(const Vec3& fractional) const;
};

struct Atom {
  std::string symbol;
  int z = 0;
  Vec3 position;
  int tag = kTagFreeSurface;
};

Atom make_atom(const std::string& symbol, const Vec3& position, int tag = kTagFreeSurface);

struct Structure {
  Lattice lattice;
  std::vector<Atom> atoms;

  std::size_t size() const { return atoms.size(); }
};

// Throws unless the structure has >= 1 atom, a non-degenerate right-handed
// cell, finite positions, symbol/Z agreement, and no minimum-image pair
// closer than 0.1 Angstrom.
void validate_structure(const Structure& s);

// Displacement from atom i to the nearest periodic image of atom j. Images are
// scanned only along axes with pbc true (9 in-plane images for slabs).
Vec3 min_image_vec(const Lattice& lattice, const Vec3& from, const Vec3& to);
double min_image_distance(const Structure& s, std::size_t i, std::size_t j);

}  // namespace adsorb
