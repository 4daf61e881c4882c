#include "adsorb/calculator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "adsorb/assets.hpp"
#include "adsorb/errors.hpp"
#include "adsorb/rng.hpp"

namespace adsorb {

CalcParams default_calc_params() {
  CalcParams p;
  auto doc = nlohmann::json::parse(read_text_file(asset_path("lj_params.json")));
  p.cutoff = doc.at("cutoff").get<double>();
  p.shift = doc.at("shift").get<bool>();
  for (const auto& [symbol, coeff] : doc.at("elements").items()) {
    PairCoeff c;
    c.epsilon = coeff.at("epsilon").get<double>();
    c.sigma = coeff.at("sigma").get<double>();
    p.elements[symbol] = c;
  }
  return p;
}

namespace {

const PairCoeff& coeff_for(const CalcParams& p, const std::string& symbol) {
  auto it = p.elements.find(symbol);
  if (it == p.elements.end())
    throw Error(ErrorKind::missing_parameter,
                "no pair parameters for element '" + symbol + "'");
  return it->second;
}

void check_params(const Structure& s, const CalcParams& p) {
  std::set<std::string> seen;
  for (const auto& a : s.atoms) {
    if (!seen.insert(a.symbol).second) continue;
    const PairCoeff& c = coeff_for(p, a.symbol);
    if (c.epsilon <= 0.0 || c.sigma <= 0.0)
      throw Error(ErrorKind::missing_parameter,
                  "non-positive pair parameters for element '" + a.symbol + "'");
    // The shifted potential is only smooth when the cutoff clears the
    // repulsive wall of every pair present.
    if (p.cutoff <= 2.0 * c.sigma)
      throw Error(ErrorKind::missing_parameter,
                  "cutoff " + std::to_string(p.cutoff) +
                      " A too small for element '" + a.symbol +
                      "' (sigma " + std::to_string(c.sigma) +
                      " A); raise the cutoff");
  }
}

}  // namespace

EnergyForces lj_energy_forces(const Structure& s, const CalcParams& p) {
  check_params(s, p);

  const std::size_t n = s.atoms.size();
  EnergyForces out;
  out.forces.assign(n, Vec3{});
  const double rc2 = p.cutoff * p.cutoff;

  for (std::size_t i = 0; i < n; ++i) {
    const PairCoeff& ci = coeff_for(p, s.atoms[i].symbol);
    for (std::size_t j = i + 1; j < n; ++j) {
      const PairCoeff& cj = coeff_for(p, s.atoms[j].symbol);
      Vec3 d = min_image_vec(s.lattice, s.atoms[j].position, s.atoms[i].position);
      double r2 = d.norm2();
      if (r2 >= rc2) continue;

      double sigma = 0.5 * (ci.sigma + cj.sigma);
      double eps = std::sqrt(ci.epsilon * cj.epsilon);
      double s2 = sigma * sigma / r2;
      double s6 = s2 * s2 * s2;
      double s12 = s6 * s6;
      double e = 4.0 * eps * (s12 - s6);
      if (p.shift) {
        double c6 = std::pow(sigma / p.cutoff, 6);
        e -= 4.0 * eps * (c6 * c6 - c6);
      }
      out.energy += e;

      // dE/dr = -24 eps (2 s12 - s6) / r; force on i points along +d for a
      // repulsive pair.
      double fr = 24.0 * eps * (2.0 * s12 - s6) / r2;
      Vec3 f = d * fr;
      out.forces[i] += f;
      out.forces[j] -= f;
    }
  }
  return out;
}

double numerical_force_check(const Structure& s, const CalcParams& p, double h) {
  if (h < 1e-5 || h > 1e-3)
    throw Error(ErrorKind::precondition,
                "finite-difference step must lie in [1e-5, 1e-3] A");
  EnergyForces analytic = lj_energy_forces(s, p);

  std::vector<std::size_t> subset;
  if (s.atoms.size() <= 8) {
    for (std::size_t i = 0; i < s.atoms.size(); ++i) subset.push_back(i);
  } else {
    SplitMix64 rng{0x9e3779b97f4a7c15ull};
    std::set<std::size_t> chosen;
    while (chosen.size() < 8)
      chosen.insert(static_cast<std::size_t>(rng.next_below(s.atoms.size())));
    subset.assign(chosen.begin(), chosen.end());
  }

  double worst = 0.0;
  Structure probe = s;
  for (std::size_t i : subset) {
    for (int axis = 0; axis < 3; ++axis) {
      double* comp = axis == 0 ? &probe.atoms[i].position.x
                   : axis == 1 ? &probe.atoms[i].position.y
                               : &probe.atoms[i].position.z;
      double orig = *comp;
      *comp = orig + h;
      double ep = lj_energy_forces(probe, p).energy;
      *comp = orig - h;
      double em = lj_energy_forces(probe, p).energy;
      *comp = orig;
      double fd = -(ep - em) / (2.0 * h);
      double fa = axis == 0 ? analytic.forces[i].x
                : axis == 1 ? analytic.forces[i].y
                            : analytic.forces[i].z;
      worst = std::max(worst, std::abs(fa - fd));
    }
  }
  return worst;
}

}  // namespace adsorb
