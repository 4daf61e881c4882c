#include "adsorb/relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "adsorb/element.hpp"
#include "adsorb/errors.hpp"

namespace adsorb {

const char* to_string(RelaxStatus s) {
  switch (s) {
    case RelaxStatus::converged: return "converged";
    case RelaxStatus::max_steps: return "max-steps";
    case RelaxStatus::failed: return "failed";
  }
  return "?";
}

namespace {

double max_free_force(const Structure& s, const std::vector<Vec3>& forces) {
  double worst = 0.0;
  for (std::size_t i = 0; i < forces.size(); ++i) {
    if (s.atoms[i].tag == kTagFixedBulk) continue;
    worst = std::max(worst, forces[i].norm());
  }
  return worst;
}

bool finite(const EnergyForces& ef) {
  if (!std::isfinite(ef.energy)) return false;
  for (const auto& f : ef.forces)
    if (!std::isfinite(f.x) || !std::isfinite(f.y) || !std::isfinite(f.z))
      return false;
  return true;
}

}  // namespace

RelaxationResult relax(const Structure& start, Calculator& calc,
                       const FireParams& p, bool record_trajectory) {
  if (p.fmax <= 0.0 || p.dt_init <= 0.0 || p.dt_max <= 0.0 ||
      p.max_step_length <= 0.0 || p.max_steps < 0)
    throw Error(ErrorKind::precondition, "FIRE parameters must be positive");

  RelaxationResult result;
  result.final = start;
  Structure& s = result.final;
  const std::size_t n = s.atoms.size();

  std::vector<Vec3> v(n);
  double dt = p.dt_init;
  double alpha = p.alpha_start;
  int n_pos = 0;

  for (int step = 0;; ++step) {
    EnergyForces ef;
    try {
      ef = calc.evaluate(s);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::calculator || e.kind() == ErrorKind::transport ||
          e.kind() == ErrorKind::timeout || e.kind() == ErrorKind::missing_parameter)
        throw;
      result.status = RelaxStatus::failed;
      result.diagnostic = e.what();
      result.steps = step;
      return result;
    }
    if (ef.forces.size() != n) {
      result.status = RelaxStatus::failed;
      result.diagnostic = "calculator force count mismatch";
      result.steps = step;
      return result;
    }
    if (!finite(ef)) {
      result.status = RelaxStatus::failed;
      result.diagnostic = "non-finite energy or forces at step " + std::to_string(step);
      result.steps = step;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (s.atoms[i].tag == kTagFixedBulk) {
        ef.forces[i] = Vec3{};
        v[i] = Vec3{};
      }

    if (record_trajectory) {
      std::vector<Vec3> pos(n);
      for (std::size_t i = 0; i < n; ++i) pos[i] = s.atoms[i].position;
      result.trajectory.emplace_back(std::move(pos), ef.energy);
    }

    result.energy = ef.energy;
    result.max_force = max_free_force(s, ef.forces);
    result.steps = step;
    if (result.max_force <= p.fmax) {
      result.status = RelaxStatus::converged;
      return result;
    }
    if (step >= p.max_steps) {
      result.status = RelaxStatus::max_steps;
      return result;
    }

    double power = 0.0;
    for (std::size_t i = 0; i < n; ++i) power += ef.forces[i].dot(v[i]);
    if (power > 0.0) {
      ++n_pos;
      if (n_pos > p.n_min) {
        dt = std::min(dt * p.f_inc, p.dt_max);
        alpha *= p.f_alpha;
      }
    } else {
      n_pos = 0;
      dt *= p.f_dec;
      alpha = p.alpha_start;
      for (auto& vi : v) vi = Vec3{};
    }

    double vnorm2 = 0.0, fnorm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] += ef.forces[i] * dt;
      vnorm2 += v[i].norm2();
      fnorm2 += ef.forces[i].norm2();
    }
    if (fnorm2 > 0.0) {
      double mix = std::sqrt(vnorm2 / fnorm2);
      for (std::size_t i = 0; i < n; ++i)
        v[i] = v[i] * (1.0 - alpha) + ef.forces[i] * (alpha * mix);
    }

    double longest = 0.0;
    for (std::size_t i = 0; i < n; ++i) longest = std::max(longest, (v[i] * dt).norm());
    double scale = longest > p.max_step_length ? p.max_step_length / longest : 1.0;
    for (std::size_t i = 0; i < n; ++i) s.atoms[i].position += v[i] * (dt * scale);
  }
}

AnomalyFlags detect_anomalies(const Structure& initial, const Structure& final,
                              const AnomalyParams& p) {
  if (initial.atoms.size() != final.atoms.size())
    throw Error(ErrorKind::precondition,
                "initial and final structures differ in atom count");
  for (std::size_t i = 0; i < initial.atoms.size(); ++i)
    if (initial.atoms[i].symbol != final.atoms[i].symbol)
      throw Error(ErrorKind::precondition,
                  "initial and final structures differ at atom " + std::to_string(i));

  AnomalyFlags flags;
  std::vector<std::size_t> ads, surface;
  for (std::size_t i = 0; i < initial.atoms.size(); ++i) {
    if (initial.atoms[i].tag == kTagAdsorbate)
      ads.push_back(i);
    else
      surface.push_back(i);
  }

  for (std::size_t a = 0; a < ads.size(); ++a) {
    for (std::size_t b = a + 1; b < ads.size(); ++b) {
      std::size_t i = ads[a], j = ads[b];
      double r0 = min_image_distance(initial, i, j);
      double bond = p.bond_factor * (covalent_radius(initial.atoms[i].z) +
                                     covalent_radius(initial.atoms[j].z));
      if (r0 > bond) continue;
      double r1 = min_image_distance(final, i, j);
      double ratio = r1 / r0;
      flags.max_stretch_ratio = std::max(flags.max_stretch_ratio, ratio);
      if (ratio > p.stretch_ratio) flags.dissociated = true;
    }
  }

  if (!ads.empty() && !surface.empty()) {
    double closest = std::numeric_limits<double>::max();
    for (std::size_t i : ads)
      for (std::size_t j : surface)
        closest = std::min(closest, min_image_distance(final, i, j));
    flags.min_surface_distance = closest;
    if (closest > p.desorb_distance) flags.desorbed = true;
  }

  for (std::size_t i : surface) {
    if (initial.atoms[i].tag != kTagFreeSurface) continue;
    Vec3 d = min_image_vec(initial.lattice, initial.atoms[i].position,
                           final.atoms[i].position);
    double moved = d.norm();
    flags.max_surface_displacement = std::max(flags.max_surface_displacement, moved);
    if (moved > p.reconstruct_displacement) flags.reconstructed = true;
  }
  return flags;
}

AdsorptionRecord adsorption_energy(const std::vector<RelaxationResult>& results,
                                   double e_slab, double e_gas) {
  if (results.empty())
    throw Error(ErrorKind::precondition, "no relaxation results to reduce");

  AdsorptionRecord record;
  bool found = false;
  std::ostringstream reasons;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RelaxationResult& r = results[i];
    double de = r.energy - e_slab - e_gas;
    record.delta_e.push_back(de);
    if (r.anomalies.any()) ++record.n_anomalous;
    if (r.status != RelaxStatus::converged || r.anomalies.any()) {
      reasons << "  configuration " << i << ": " << to_string(r.status);
      if (r.anomalies.dissociated) reasons << ", dissociated";
      if (r.anomalies.desorbed) reasons << ", desorbed";
      if (r.anomalies.reconstructed) reasons << ", reconstructed";
      if (!r.diagnostic.empty()) reasons << " (" << r.diagnostic << ")";
      reasons << "\n";
      continue;
    }
    ++record.n_valid;
    if (!found || de < record.delta_e_ads) {
      found = true;
      record.delta_e_ads = de;
      record.argmin = i;
    }
  }
  if (!found)
    throw Error(ErrorKind::all_filtered,
                "every configuration was filtered:\n" + reasons.str());
  return record;
}

bool ReferenceCache::get(const std::string& key, ReferenceEnergies* out) const {
  auto it = store_.find(key);
  if (it == store_.end()) return false;
  *out = it->second;
  return true;
}

void ReferenceCache::put(const std::string& key, const ReferenceEnergies& value) {
  store_[key] = value;
}

ReferenceEnergies reference_energies(const Structure& slab, const AdsorbateSpec& ads,
                                     Calculator& calc, const FireParams& p,
                                     ReferenceCache* cache,
                                     const std::string& cache_key) {
  ReferenceEnergies ref;
  if (cache && !cache_key.empty() && cache->get(cache_key, &ref)) return ref;

  RelaxationResult slab_result = relax(slab, calc, p);
  if (slab_result.status != RelaxStatus::converged)
    throw Error(ErrorKind::calculator,
                std::string("bare-slab relaxation did not converge (") +
                    to_string(slab_result.status) + ")");
  ref.e_slab = slab_result.energy;

  Structure gas;
  gas.lattice.cell = Mat3::identity();
  for (int i = 0; i < 3; ++i) gas.lattice.cell.m[i][i] = 20.0;
  gas.lattice.pbc = {false, false, false};
  for (std::size_t i = 0; i < ads.size(); ++i) {
    Vec3 at = ads.geometry[i] + Vec3{10.0, 10.0, 10.0};
    gas.atoms.push_back(make_atom(ads.symbols[i], at, kTagAdsorbate));
  }
  RelaxationResult gas_result = relax(gas, calc, p);
  if (gas_result.status != RelaxStatus::converged)
    throw Error(ErrorKind::calculator,
                std::string("gas-phase reference relaxation did not converge (") +
                    to_string(gas_result.status) + ")");
  ref.e_gas = gas_result.energy;

  if (cache && !cache_key.empty()) cache->put(cache_key, ref);
  return ref;
}

}  // namespace adsorb
