#include "adsorb/adsorbate.hpp"

#include <algorithm>
#include <filesystem>

#include "adsorb/assets.hpp"
#include "adsorb/errors.hpp"
#include "adsorb/extxyz.hpp"

namespace adsorb {

namespace {

AdsorbateSpec from_structure(const std::string& key, const Structure& s) {
  AdsorbateSpec spec;
  spec.key = key;
  Vec3 centroid{0, 0, 0};
  for (const Atom& a : s.atoms) centroid += a.position;
  centroid = centroid / static_cast<double>(s.atoms.size());
  for (const Atom& a : s.atoms) {
    spec.symbols.push_back(a.symbol);
    spec.atomic_numbers.push_back(a.z);
    spec.geometry.push_back(a.position - centroid);
  }
  return spec;
}

}  // namespace

std::vector<std::string> registry_keys() {
  std::vector<std::string> keys;
  std::filesystem::path dir = asset_path("adsorbates");
  if (!std::filesystem::is_directory(dir)) return keys;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".extxyz") keys.push_back(entry.path().stem().string());
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

AdsorbateSpec adsorbate_from_registry(const std::string& key) {
  std::filesystem::path registry_file = asset_path("adsorbates") / (key + ".extxyz");
  if (std::filesystem::is_regular_file(registry_file))
    return from_structure(key, parse_extxyz_file(registry_file));
  if (std::filesystem::is_regular_file(key))
    return from_structure(key, parse_extxyz_file(key));

  std::string known;
  for (const auto& k : registry_keys()) {
    if (!known.empty()) known += ", ";
    known += k;
  }
  throw Error(ErrorKind::lookup,
              "unknown adsorbate '" + key + "' and no such file; registry: " + known);
}

}  // namespace adsorb
