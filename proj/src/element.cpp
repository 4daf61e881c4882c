#include "adsorb/element.hpp"

#include <array>
#include <unordered_map>

#include "adsorb/errors.hpp"

namespace adsorb {

namespace {

constexpr int kMaxZ = 103;

const std::array<const char*, kMaxZ + 1> kSymbols = {
    "X",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr"};

// Cordero et al. single-bond radii, Angstrom. Sp3 carbon; low-spin where two
// values exist. Trans-curium entries extrapolated flat.
const std::array<double, kMaxZ + 1> kCovalentRadii = {
    0.00, 0.31, 0.28, 1.28, 0.96, 0.84, 0.76, 0.71, 0.66, 0.57, 0.58, 1.66,
    1.41, 1.21, 1.11, 1.07, 1.05, 1.02, 1.06, 2.03, 1.76, 1.70, 1.60, 1.53,
    1.39, 1.39, 1.32, 1.26, 1.24, 1.32, 1.22, 1.22, 1.20, 1.19, 1.20, 1.20,
    1.16, 2.20, 1.95, 1.90, 1.75, 1.64, 1.54, 1.47, 1.46, 1.42, 1.39, 1.45,
    1.44, 1.42, 1.39, 1.39, 1.38, 1.39, 1.40, 2.44, 2.15, 2.07, 2.04, 2.03,
    2.01, 1.99, 1.98, 1.98, 1.96, 1.94, 1.92, 1.92, 1.89, 1.90, 1.87, 1.87,
    1.75, 1.70, 1.62, 1.51, 1.44, 1.41, 1.36, 1.36, 1.32, 1.45, 1.46, 1.48,
    1.40, 1.50, 1.50, 2.60, 2.21, 2.15, 2.06, 2.00, 1.96, 1.90, 1.87, 1.80,
    1.69, 1.69, 1.69, 1.69, 1.69, 1.69, 1.69, 1.69};

const std::array<double, kMaxZ + 1> kMasses = {
    0.000,   1.008,   4.003,   6.941,   9.012,   10.811,  12.011,  14.007,
    15.999,  18.998,  20.180,  22.990,  24.305,  26.982,  28.086,  30.974,
    32.066,  35.453,  39.948,  39.098,  40.078,  44.956,  47.867,  50.942,
    51.996,  54.938,  55.845,  58.933,  58.693,  63.546,  65.380,  69.723,
    72.640,  74.922,  78.971,  79.904,  83.798,  85.468,  87.620,  88.906,
    91.224,  92.906,  95.950,  98.000,  101.070, 102.906, 106.420, 107.868,
    112.414, 114.818, 118.710, 121.760, 127.600, 126.904, 131.293, 132.905,
    137.327, 138.905, 140.116, 140.908, 144.242, 145.000, 150.360, 151.964,
    157.250, 158.925, 162.500, 164.930, 167.259, 168.934, 173.045, 174.967,
    178.486, 180.948, 183.840, 186.207, 190.230, 192.217, 195.084, 196.967,
    200.592, 204.383, 207.200, 208.980, 209.000, 210.000, 222.000, 223.000,
    226.000, 227.000, 232.038, 231.036, 238.029, 237.000, 244.000, 243.000,
    247.000, 247.000, 251.000, 252.000, 257.000, 258.000, 259.000, 262.000};

const std::unordered_map<std::string, int>& symbol_index() {
  static const std::unordered_map<std::string, int> index = [] {
    std::unordered_map<std::string, int> m;
    for (int z = 1; z <= kMaxZ; ++z) m.emplace(kSymbols[z], z);
    return m;
  }();
  return index;
}

}  // namespace

int atomic_number(const std::string& symbol) {
  auto it = symbol_index().find(symbol);
  if (it == symbol_index().end())
    throw Error(ErrorKind::lookup, "unknown element '" + symbol + "'");
  return it->second;
}

const std::string& element_symbol(int z) {
  static const std::array<std::string, kMaxZ + 1> symbols = [] {
    std::array<std::string, kMaxZ + 1> s;
    for (int i = 0; i <= kMaxZ; ++i) s[static_cast<std::size_t>(i)] = kSymbols[static_cast<std::size_t>(i)];
    return s;
  }();
  if (z < 1 || z > kMaxZ)
    throw Error(ErrorKind::lookup, "atomic number out of range: " + std::to_string(z));
  return symbols[static_cast<std::size_t>(z)];
}

bool is_known_element(const std::string& symbol) {
  return symbol_index().count(symbol) > 0;
}

double covalent_radius(int z) {
  if (z < 1 || z > kMaxZ)
    throw Error(ErrorKind::lookup, "atomic number out of range: " + std::to_string(z));
  return kCovalentRadii[static_cast<std::size_t>(z)];
}

double atomic_mass(int z) {
  if (z < 1 || z > kMaxZ)
    throw Error(ErrorKind::lookup, "atomic number out of range: " + std::to_string(z));
  return kMasses[static_cast<std::size_t>(z)];
}

}  // namespace adsorb
