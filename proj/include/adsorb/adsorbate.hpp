#pragma once

#include <string>
#include <vector>

#include "adsorb/geom.hpp"

namespace adsorb {

// Rigid gas-phase adsorbate in a molecule-local frame with its centroid at
// the origin. Atom order is frozen by the registry asset files so binding
// indices are stable across runs.
struct AdsorbateSpec {
  std::string key;
  std::vector<std::string> symbols;
  std::vector<int> atomic_numbers;
  std::vector<Vec3> geometry;

  std::size_t size() const { return symbols.size(); }
};

// Registry keys are opaque SMILES-like strings backed by
// assets/adsorbates/<key>.extxyz; a key that names a readable extended-XYZ
// file is loaded from that file instead.
AdsorbateSpec adsorbate_from_registry(const std::string& key);

std::vector<std::string> registry_keys();

}  // namespace adsorb
