#pragma once

#include <array>
#include <optional>
#include <string>

#include "adsorb/structure.hpp"

namespace adsorb {

enum class BulkKind { fcc, bcc, l12 };

// L1_2 bulks decorate the fcc lattice: element_b on cube corners, element_a on
// face centers (A3B stoichiometry). Elemental bulks use element_a only.
struct BulkSpec {
  BulkKind kind = BulkKind::fcc;
  std::string element_a;
  std::string element_b;
  double a = 4.0;  // cubic lattice constant, Angstrom

  std::string formula() const;
};

struct SlabMetadata {
  std::string bulk_formula;
  std::array<int, 3> miller = {1, 1, 1};
  double shift = 0.0;  // termination selector in [0,1) for multi-termination cuts
  bool top = true;
  int layers = 3;
  double vacuum = 15.0;
  std::string mpid;  // optional free-text source id, never dereferenced
};

// Reduce by gcd and fold to the canonical representative of the cubic family
// (components made non-negative and sorted descending).
std::array<int, 3> normalize_miller(const std::array<int, 3>& miller);

// Analytic interlayer spacing for a supported (bulk kind, miller) pair.
double interlayer_spacing(BulkKind kind, const std::array<int, 3>& miller, double a);

// Slab with `layers` atomic layers of an (nx x ny) surface supercell, bottom
// layer at z = 0, `vacuum` Angstrom above the top layer, pbc (T,T,F). The
// bottom ceil(layers/2) layers are tagged 0, the rest 1. Supercell counts are
// in primitive elemental surface cells; L1_2 decoration needs even nx (and
// even ny except for (110) cuts).
Structure build_slab(const BulkSpec& bulk, const SlabMetadata& meta, int nx, int ny);

}  // namespace adsorb
