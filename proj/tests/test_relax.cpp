#include <doctest.h>

#include <cmath>
#include <vector>

#include "adsorb/adsorbate.hpp"
#include "adsorb/calculator.hpp"
#include "adsorb/errors.hpp"
#include "adsorb/relax.hpp"
#include "adsorb/structure.hpp"
#include "helpers.hpp"

using namespace adsorb;
using testutil::catch_error;
using testutil::open_box_dimer;
using testutil::pt111_slab;
using testutil::uniform_params;

namespace {

class CountingCalc : public Calculator {
 public:
  explicit CountingCalc(Calculator& inner) : inner_(inner) {}
  EnergyForces evaluate(const Structure& s) override {
    ++calls;
    return inner_.evaluate(s);
  }
  std::string describe() const override { return inner_.describe(); }
  int calls = 0;

 private:
  Calculator& inner_;
};

class ThrowingCalc : public Calculator {
 public:
  explicit ThrowingCalc(ErrorKind kind) : kind_(kind) {}
  EnergyForces evaluate(const Structure&) override {
    throw Error(kind_, "synthetic calculator fault");
  }
  std::string describe() const override { return "throwing"; }

 private:
  ErrorKind kind_;
};

// Bare slab plus an O-H pair 2 A above the first top-layer atom, the hydrogen
// offset horizontally by the given O-H distance.
Structure slab_with_oh(double oh_distance) {
  Structure s = pt111_slab();
  double top = 0.0;
  for (const auto& a : s.atoms) top = std::max(top, a.position.z);
  Vec3 anchor;
  for (const auto& a : s.atoms)
    if (a.position.z == top) {
      anchor = a.position;
      break;
    }
  Vec3 o = anchor + Vec3{0.0, 0.0, 2.0};
  s.atoms.push_back(make_atom("O", o, kTagAdsorbate));
  s.atoms.push_back(make_atom("H", o + Vec3{oh_distance, 0.0, 0.0}, kTagAdsorbate));
  return s;
}

RelaxationResult synthetic(RelaxStatus status, double energy, bool desorbed = false) {
  RelaxationResult r;
  r.status = status;
  r.energy = energy;
  r.anomalies.desorbed = desorbed;
  return r;
}

}  // namespace

TEST_CASE("dimer descends to the pair minimum") {
  double eps = 0.01, sigma = 3.0;
  CalcParams params = uniform_params("Cu", eps, sigma, 30.0, false);
  LjCalculator calc(params);
  FireParams fire;
  fire.fmax = 1e-8;
  fire.max_steps = 10000;

  Structure start = open_box_dimer("Cu", 1.3 * sigma);
  RelaxationResult r = relax(start, calc, fire);
  CHECK(r.status == RelaxStatus::converged);
  CHECK(r.max_force <= 1e-8);

  double d = (r.final.atoms[1].position - r.final.atoms[0].position).norm();
  CHECK(d == doctest::Approx(std::pow(2.0, 1.0 / 6.0) * sigma).epsilon(1e-6));
  CHECK(r.energy == doctest::Approx(-eps).epsilon(1e-9));
}

TEST_CASE("tag zero atoms never move") {
  CalcParams params = uniform_params("Cu", 0.01, 3.0, 30.0, false);
  LjCalculator calc(params);
  FireParams fire;
  fire.fmax = 1e-8;
  fire.max_steps = 10000;

  Structure start = open_box_dimer("Cu", 3.9);
  start.atoms[0].tag = kTagFixedBulk;
  RelaxationResult r = relax(start, calc, fire);
  CHECK(r.status == RelaxStatus::converged);
  CHECK(r.final.atoms[0].position.x == start.atoms[0].position.x);
  CHECK(r.final.atoms[0].position.y == start.atoms[0].position.y);
  CHECK(r.final.atoms[0].position.z == start.atoms[0].position.z);
  CHECK(r.final.atoms[1].position.x != start.atoms[1].position.x);
  double d = (r.final.atoms[1].position - r.final.atoms[0].position).norm();
  CHECK(d == doctest::Approx(std::pow(2.0, 1.0 / 6.0) * 3.0).epsilon(1e-6));
}

TEST_CASE("step budget and parameter guards") {
  CalcParams params = uniform_params("Cu", 0.01, 3.0, 30.0, false);
  LjCalculator calc(params);
  Structure start = open_box_dimer("Cu", 3.9);

  FireParams tight;
  tight.fmax = 1e-300;
  tight.max_steps = 3;
  RelaxationResult r = relax(start, calc, tight, true);
  CHECK(r.status == RelaxStatus::max_steps);
  CHECK(r.steps == 3);
  CHECK(r.trajectory.size() == 4);
  CHECK(std::string(to_string(r.status)) == "max-steps");

  FireParams bad;
  bad.fmax = 0.0;
  CHECK(catch_error([&] { relax(start, calc, bad); }).kind == ErrorKind::precondition);
}

TEST_CASE("trajectory records one frame per evaluation") {
  CalcParams params = uniform_params("Cu", 0.01, 3.0, 30.0, false);
  LjCalculator calc(params);
  FireParams fire;
  fire.fmax = 1e-6;
  fire.max_steps = 10000;

  Structure start = open_box_dimer("Cu", 3.9);
  RelaxationResult r = relax(start, calc, fire, true);
  REQUIRE(r.status == RelaxStatus::converged);
  REQUIRE(r.trajectory.size() == static_cast<std::size_t>(r.steps) + 1);

  CHECK(r.trajectory.front().first[0].x == start.atoms[0].position.x);
  CHECK(r.trajectory.front().first[1].x == start.atoms[1].position.x);
  CHECK(r.trajectory.back().second == r.energy);
  CHECK(r.trajectory.front().second > r.trajectory.back().second);

  RelaxationResult quiet = relax(start, calc, fire, false);
  CHECK(quiet.trajectory.empty());
  CHECK(quiet.energy == r.energy);
}

TEST_CASE("calculator faults during descent") {
  Structure start = open_box_dimer("Cu", 3.9);
  FireParams fire;

  SUBCASE("soft faults mark the result failed") {
    ThrowingCalc calc(ErrorKind::degenerate_geometry);
    RelaxationResult r = relax(start, calc, fire);
    CHECK(r.status == RelaxStatus::failed);
    CHECK(r.diagnostic.find("synthetic calculator fault") != std::string::npos);
  }
  SUBCASE("infrastructure faults propagate") {
    for (ErrorKind kind : {ErrorKind::calculator, ErrorKind::transport,
                           ErrorKind::timeout, ErrorKind::missing_parameter}) {
      ThrowingCalc calc(kind);
      CHECK(catch_error([&] { relax(start, calc, fire); }).kind == kind);
    }
  }
}

TEST_CASE("anomaly detection") {
  Structure initial = slab_with_oh(0.97);

  SUBCASE("identity relaxation is clean") {
    AnomalyFlags flags = detect_anomalies(initial, initial);
    CHECK_FALSE(flags.any());
    CHECK(flags.max_stretch_ratio == doctest::Approx(1.0));
    CHECK(flags.min_surface_distance == doctest::Approx(2.0));
    CHECK(flags.max_surface_displacement == 0.0);
  }

  SUBCASE("lifting the adsorbate far off the surface reads as desorbed") {
    Structure final = initial;
    for (auto& a : final.atoms)
      if (a.tag == kTagAdsorbate) a.position.z += 10.0;
    AnomalyFlags flags = detect_anomalies(initial, final);
    CHECK(flags.desorbed);
    CHECK(flags.min_surface_distance == doctest::Approx(12.0));
    CHECK_FALSE(flags.dissociated);
    CHECK_FALSE(flags.reconstructed);
  }

  SUBCASE("stretching the O-H bond past the ratio reads as dissociated") {
    // The hydrogen leaves along z: the in-plane cell is narrow enough that a
    // 3 A horizontal separation would wrap to a shorter periodic image.
    Structure final = initial;
    Vec3 oxygen = final.atoms[final.atoms.size() - 2].position;
    final.atoms.back().position = oxygen + Vec3{0.0, 0.0, 3.0};
    AnomalyFlags flags = detect_anomalies(initial, final);
    CHECK(flags.dissociated);
    CHECK(flags.max_stretch_ratio == doctest::Approx(3.0 / 0.97));
    CHECK_FALSE(flags.desorbed);  // the oxygen still sits 2 A off the surface
  }

  SUBCASE("a drifting free surface atom reads as reconstructed") {
    Structure final = initial;
    for (auto& a : final.atoms)
      if (a.tag == kTagFreeSurface) {
        a.position.x += 1.5;
        break;
      }
    AnomalyFlags flags = detect_anomalies(initial, final);
    CHECK(flags.reconstructed);
    CHECK(flags.max_surface_displacement == doctest::Approx(1.5));
  }

  SUBCASE("frozen atoms do not count toward reconstruction") {
    Structure final = initial;
    for (auto& a : final.atoms)
      if (a.tag == kTagFixedBulk) {
        a.position.x += 1.5;
        break;
      }
    AnomalyFlags flags = detect_anomalies(initial, final);
    CHECK_FALSE(flags.reconstructed);
    CHECK(flags.max_surface_displacement == 0.0);
  }

  SUBCASE("mismatched structures are rejected") {
    Structure final = initial;
    final.atoms.pop_back();
    CHECK(catch_error([&] { detect_anomalies(initial, final); }).kind ==
          ErrorKind::precondition);

    Structure renamed = initial;
    renamed.atoms.back().symbol = "N";
    CHECK(catch_error([&] { detect_anomalies(initial, renamed); }).kind ==
          ErrorKind::precondition);
  }

  SUBCASE("thresholds come from the parameter block") {
    Structure final = initial;
    for (auto& a : final.atoms)
      if (a.tag == kTagAdsorbate) a.position.z += 1.2;
    AnomalyParams strict;
    strict.desorb_distance = 3.0;
    CHECK(detect_anomalies(initial, final, strict).desorbed);
    CHECK_FALSE(detect_anomalies(initial, final).desorbed);
  }
}

TEST_CASE("adsorption energy reduction") {
  SUBCASE("anomalous and unconverged runs are excluded from the minimum") {
    std::vector<RelaxationResult> results;
    results.push_back(synthetic(RelaxStatus::converged, -1.0));
    results.push_back(synthetic(RelaxStatus::converged, -5.0, true));
    results.push_back(synthetic(RelaxStatus::max_steps, -7.0));
    results.push_back(synthetic(RelaxStatus::converged, -3.0));
    results.push_back(synthetic(RelaxStatus::converged, -3.0));

    AdsorptionRecord rec = adsorption_energy(results, 0.5, 0.25);
    REQUIRE(rec.delta_e.size() == 5);
    CHECK(rec.delta_e[0] == doctest::Approx(-1.75));
    CHECK(rec.delta_e[2] == doctest::Approx(-7.75));
    CHECK(rec.delta_e_ads == doctest::Approx(-3.75));
    CHECK(rec.argmin == 3);  // tie with index 4 keeps the earlier one
    CHECK(rec.n_valid == 3);
    CHECK(rec.n_anomalous == 1);
  }

  SUBCASE("everything filtered raises with the per-configuration reasons") {
    std::vector<RelaxationResult> results;
    results.push_back(synthetic(RelaxStatus::max_steps, -7.0));
    results.push_back(synthetic(RelaxStatus::converged, -5.0, true));
    auto c = catch_error([&] { adsorption_energy(results, 0.0, 0.0); });
    CHECK(c.kind == ErrorKind::all_filtered);
    CHECK(c.message.find("every configuration was filtered") != std::string::npos);
    CHECK(c.message.find("configuration 0: max-steps") != std::string::npos);
    CHECK(c.message.find("desorbed") != std::string::npos);
  }

  SUBCASE("an empty result list is a caller error") {
    CHECK(catch_error([&] { adsorption_energy({}, 0.0, 0.0); }).kind ==
          ErrorKind::precondition);
  }
}

TEST_CASE("reference energies and the cache") {
  LjCalculator inner(default_calc_params());
  CountingCalc calc(inner);
  FireParams fire;
  Structure slab = pt111_slab();
  AdsorbateSpec h = adsorbate_from_registry("H");

  ReferenceCache cache;
  ReferenceEnergies first = reference_energies(slab, h, calc, fire, &cache, "k");
  CHECK(calc.calls > 0);
  // A lone atom has no pairs, so the gas reference is exactly zero.
  CHECK(first.e_gas == 0.0);
  CHECK(first.e_slab < 0.0);

  int calls_before = calc.calls;
  ReferenceEnergies second = reference_energies(slab, h, calc, fire, &cache, "k");
  CHECK(calc.calls == calls_before);
  CHECK(second.e_slab == first.e_slab);
  CHECK(second.e_gas == first.e_gas);

  // An empty key disables caching even when a cache is supplied.
  reference_energies(slab, h, calc, fire, &cache, "");
  CHECK(calc.calls > calls_before);

  ReferenceEnergies probe;
  CHECK_FALSE(cache.get("absent", &probe));
  cache.put("absent", {1.0, 2.0});
  REQUIRE(cache.get("absent", &probe));
  CHECK(probe.e_slab == 1.0);
  CHECK(probe.e_gas == 2.0);
}

TEST_CASE("diatomic gas reference relaxes the molecule") {
  LjCalculator calc(default_calc_params());
  FireParams fire;
  Structure slab = pt111_slab();
  AdsorbateSpec oh = adsorbate_from_registry("OH");

  ReferenceEnergies ref = reference_energies(slab, oh, calc, fire);
  double eps_mix = std::sqrt(default_calc_params().elements.at("O").epsilon *
                             default_calc_params().elements.at("H").epsilon);
  CHECK(ref.e_gas < 0.0);
  CHECK(ref.e_gas > -eps_mix);  // the cutoff shift trims the well slightly
}
