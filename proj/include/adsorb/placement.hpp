#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adsorb/adsorbate.hpp"
#include "adsorb/sites.hpp"
#include "adsorb/solution.hpp"
#include "adsorb/structure.hpp"

namespace adsorb {

struct PlacementParams {
  double height = 2.0;          // A between binding center and top-layer plane
  double jitter = 0.2;          // A half-width of the heuristic x-y jitter
  double min_clearance = 0.5;   // A slab-adsorbate collision threshold
  int n_var = 3;                // azimuthal variants per matched site (side-on)
  std::size_t n_max = 48;       // configuration cap for the agent strategy
  double match_margin = 1.0;    // A distance margin in match_sites
  bool mass_weighted = false;   // weight the binding center by atomic mass
};

struct Provenance {
  std::string strategy;  // heuristic | random | agent
  Site site;
  std::uint64_t seed = 0;
  int variant = 0;
};

// Slab plus adsorbate, adsorbate atoms appended after the slab atoms with
// tag 2. Slab atoms are copied bit-identically from the input slab.
struct Configuration {
  Structure structure;
  Provenance provenance;
  std::size_t n_slab_atoms = 0;
  std::size_t id = 0;
};

// Random rotation about z, binding atom at site + height, then x-y jitter
// drawn from U(-jitter, jitter); up to 10 jitter retries on collision.
Configuration place_heuristic(const Structure& slab, const AdsorbateSpec& ads,
                              const Site& site, std::size_t binding_index,
                              std::uint64_t seed, const PlacementParams& params = {});

// Uniform random 3-D rotation with the center of mass exactly at
// site + height; retries redraw the rotation.
Configuration place_random(const Structure& slab, const AdsorbateSpec& ads,
                           const Site& site, std::uint64_t seed,
                           const PlacementParams& params = {});

// Deterministic placement from a Solution: the binding-atom center sits at
// site + height; end-on points the non-binding centroid up (azimuth-free, so
// variants coincide); side-on lays the binding axis horizontal at azimuth
// variant * 2 pi / n_var.
Configuration place_agent(const Structure& slab, const AdsorbateSpec& ads,
                          const Site& site, const BindingIndexArray& binding,
                          Orientation orientation, int variant,
                          const PlacementParams& params = {});

// Sites whose kind and parent-element multiset match the solution; falls
// back to kind-only when no exact match exists, then admits other kinds
// within `margin` of the matched set. Original site order is preserved.
std::vector<Site> match_sites(const std::vector<Site>& sites, const Solution& solution,
                              const Lattice& lattice, double margin = 1.0);

// Matched sites x orientation variants, round-robin over sites, capped at
// n_max, geometric duplicates collapsed. The result size is the agent-mode
// initial-configuration count.
std::vector<Configuration> generate_configurations(const Structure& slab,
                                                   const AdsorbateSpec& ads,
                                                   const Solution& solution,
                                                   const BindingIndexArray& binding,
                                                   std::uint64_t seed,
                                                   const PlacementParams& params = {});

// One heuristic placement per enumerated site.
std::vector<Configuration> generate_heuristic(const Structure& slab,
                                              const AdsorbateSpec& ads,
                                              std::size_t binding_index,
                                              std::uint64_t seed,
                                              const PlacementParams& params = {});

// `count` area-uniform random placements.
std::vector<Configuration> generate_random(const Structure& slab,
                                           const AdsorbateSpec& ads, std::size_t count,
                                           std::uint64_t seed,
                                           const PlacementParams& params = {});

}  // namespace adsorb
