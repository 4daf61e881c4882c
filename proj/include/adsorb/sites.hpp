#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "adsorb/rng.hpp"
#include "adsorb/structure.hpp"

namespace adsorb {

enum class SiteKind { ontop, bridge, hollow, random };

const char* to_string(SiteKind k);
SiteKind site_kind_from_string(const std::string& s);

struct Site {
  Vec3 position;  // z is the top-layer reference height
  SiteKind kind = SiteKind::ontop;
  std::vector<std::size_t> parents;  // surface atom indices
  std::vector<std::string> parent_elements;
};

// One vertex of a surface triangle: a home-cell surface atom plus the
// in-plane periodic image offset it was taken from.
struct SurfaceVertex {
  std::size_t atom = 0;
  int di = 0, dj = 0;
};

struct SurfaceTriangle {
  std::array<SurfaceVertex, 3> vertices;
  std::array<Vec3, 3> corners;  // Cartesian, consistent with `vertices`
  double area = 0.0;
};

// Home-cell representative triangles of the periodic 2-D Delaunay
// triangulation of the top layer (computed over a 3x3 tiling and folded).
struct Triangulation {
  std::vector<std::size_t> vertices;  // surface atom indices
  std::vector<SurfaceTriangle> triangles;
  double z_ref = 0.0;  // mean z of the surface atoms
  double cell_area = 0.0;
};

inline constexpr double kDefaultLayerWindow = 0.5;  // Angstrom

// Indices of top-layer atoms: tag in {0,1} and z within `layer_window` of the
// highest such atom.
std::vector<std::size_t> surface_atoms(const Structure& slab,
                                       double layer_window = kDefaultLayerWindow);

Triangulation triangulate_surface(const Structure& slab,
                                  double layer_window = kDefaultLayerWindow);

// Ontop sites at surface atoms, bridge sites at midpoints of strict Delaunay
// edges (edges whose adjacent-triangle quadruple is cocircular are arbitrary
// diagonals of a tie and yield no bridge), hollow sites at triangle
// centroids; near-coincident hollow centroids merge into one 4-fold site.
std::vector<Site> enumerate_heuristic_sites(const Structure& slab,
                                            double layer_window = kDefaultLayerWindow);

// n area-weighted uniform samples over the surface triangles; deterministic
// for a fixed seed.
std::vector<Site> sample_random_sites(const Structure& slab, std::size_t n,
                                      std::uint64_t seed,
                                      double layer_window = kDefaultLayerWindow);

// Sampling core shared with tests: picks a triangle with probability
// proportional to area, then a uniform point inside it. Returns the sampled
// points; when `picked` is non-null it records the triangle index per sample.
std::vector<Vec3> sample_in_triangles(const std::vector<std::array<Vec3, 3>>& triangles,
                                      std::size_t n, SplitMix64& rng,
                                      std::vector<std::size_t>* picked = nullptr);

}  // namespace adsorb
