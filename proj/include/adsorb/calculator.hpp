#pragma once

#include <map>
#include <string>
#include <vector>

#include "adsorb/structure.hpp"

namespace adsorb {

struct PairCoeff {
  double epsilon = 0.0;  // eV
  double sigma = 0.0;    // Angstrom
};

struct CalcParams {
  std::map<std::string, PairCoeff> elements;
  double cutoff = 8.0;  // Angstrom
  bool shift = true;    // zero the pair energy at the cutoff
};

// Loads the bundled per-element table from assets/lj_params.json.
CalcParams default_calc_params();

struct EnergyForces {
  double energy = 0.0;
  std::vector<Vec3> forces;
};

class Calculator {
 public:
  virtual ~Calculator() = default;
  virtual EnergyForces evaluate(const Structure& s) = 0;
  virtual std::string describe() const = 0;
};

// Pairwise Lennard-Jones with Lorentz-Berthelot mixing under the minimum
// image convention. Frozen atoms still contribute energy and forces here;
// the optimizer is the only place that zeroes them.
EnergyForces lj_energy_forces(const Structure& s, const CalcParams& p);

class LjCalculator : public Calculator {
 public:
  explicit LjCalculator(CalcParams p) : params_(std::move(p)) {}
  EnergyForces evaluate(const Structure& s) override {
    return lj_energy_forces(s, params_);
  }
  std::string describe() const override { return "builtin"; }
  const CalcParams& params() const { return params_; }

 private:
  CalcParams params_;
};

// Max deviation between analytic forces and central finite differences over
// a deterministic subset of atoms. h must lie in [1e-5, 1e-3].
double numerical_force_check(const Structure& s, const CalcParams& p, double h);

}  // namespace adsorb
