#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "adsorb/adsorbate.hpp"
#include "adsorb/calculator.hpp"
#include "adsorb/structure.hpp"

namespace adsorb {

struct FireParams {
  double dt_init = 0.1;
  double dt_max = 1.0;
  int n_min = 5;
  double f_inc = 1.1;
  double f_dec = 0.5;
  double alpha_start = 0.1;
  double f_alpha = 0.99;
  double fmax = 0.05;  // eV/A convergence threshold over free atoms
  int max_steps = 300;
  double max_step_length = 0.2;  // A per atom per step
};

enum class RelaxStatus { converged, max_steps, failed };

const char* to_string(RelaxStatus s);

struct AnomalyParams {
  double bond_factor = 1.25;            // x covalent-radius sum to call a bond
  double stretch_ratio = 2.0;           // bond growth that counts as dissociation
  double desorb_distance = 3.5;         // A adsorbate-to-surface gap
  double reconstruct_displacement = 1.0;  // A free-surface-atom drift
};

struct AnomalyFlags {
  bool dissociated = false;
  double max_stretch_ratio = 0.0;
  bool desorbed = false;
  double min_surface_distance = 0.0;
  bool reconstructed = false;
  double max_surface_displacement = 0.0;

  bool any() const { return dissociated || desorbed || reconstructed; }
};

struct RelaxationResult {
  Structure final;
  double energy = 0.0;
  double max_force = 0.0;
  int steps = 0;
  RelaxStatus status = RelaxStatus::failed;
  std::string diagnostic;
  AnomalyFlags anomalies;
  // One entry per evaluation when recording: positions and energy.
  std::vector<std::pair<std::vector<Vec3>, double>> trajectory;
};

// FIRE descent with unit masses. Atoms tagged 0 are frozen: their forces and
// velocities are zeroed every step, so their positions never change.
RelaxationResult relax(const Structure& start, Calculator& calc,
                       const FireParams& p, bool record_trajectory = false);

AnomalyFlags detect_anomalies(const Structure& initial, const Structure& final,
                              const AnomalyParams& p = {});

struct AdsorptionRecord {
  std::vector<double> delta_e;  // one per result, in input order
  double delta_e_ads = 0.0;
  std::size_t argmin = 0;
  std::size_t n_valid = 0;
  std::size_t n_anomalous = 0;
};

// delta_e_i = E_sys_i - E_slab - E_gas; the minimum runs over converged,
// anomaly-free results only, ties broken by lowest index.
AdsorptionRecord adsorption_energy(const std::vector<RelaxationResult>& results,
                                   double e_slab, double e_gas);

struct ReferenceEnergies {
  double e_slab = 0.0;
  double e_gas = 0.0;
};

class ReferenceCache {
 public:
  bool get(const std::string& key, ReferenceEnergies* out) const;
  void put(const std::string& key, const ReferenceEnergies& value);

 private:
  std::map<std::string, ReferenceEnergies> store_;
};

// E_slab from relaxing the bare slab; E_gas from relaxing the isolated
// adsorbate in a 20 A aperiodic cubic box.
ReferenceEnergies reference_energies(const Structure& slab, const AdsorbateSpec& ads,
                                     Calculator& calc, const FireParams& p,
                                     ReferenceCache* cache = nullptr,
                                     const std::string& cache_key = "");

}  // namespace adsorb
