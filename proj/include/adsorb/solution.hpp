#pragma once

#include <array>
#include <string>
#include <vector>

#include "adsorb/sites.hpp"

namespace adsorb {

struct Query {
  std::string adsorbate_key;
  std::string catalyst_formula;
  std::array<int, 3> miller{1, 1, 1};
  std::string slab_path;  // optional; overrides slab construction
};

enum class Orientation { end_on, side_on };

const char* to_string(Orientation o);

// An adsorption hypothesis: where the adsorbate binds and how it faces the
// surface. site_type never takes SiteKind::random.
struct Solution {
  SiteKind site_type = SiteKind::ontop;
  std::vector<std::string> surface_binding_atoms;
  std::vector<std::string> adsorbate_binding_atoms;
  Orientation orientation = Orientation::end_on;
  std::string reasoning;
};

using BindingIndexArray = std::vector<std::size_t>;

}  // namespace adsorb
