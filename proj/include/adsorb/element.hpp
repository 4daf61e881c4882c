#pragma once

#include <optional>
#include <string>

namespace adsorb {

// Canonical element table, Z = 1..103. Symbol/number lookups throw on unknown
// input; radius and mass lookups are total over the supported range.
int atomic_number(const std::string& symbol);
const std::string& element_symbol(int z);
bool is_known_element(const std::string& symbol);

// Single-bond covalent radius in Angstrom (Cordero-style values), used for
// adsorbate connectivity detection.
double covalent_radius(int z);

// Standard atomic weight in amu.
double atomic_mass(int z);

}  // namespace adsorb
