#include "adsorb/placement.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "adsorb/element.hpp"
#include "adsorb/errors.hpp"
#include "adsorb/rng.hpp"

namespace adsorb {
namespace {

constexpr double kTau = 6.283185307179586;

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive_stream(seed, {a, b}).next_u64();
}

bool collides(const Structure& slab, const std::vector<Vec3>& ads_positions,
              double clearance) {
  for (const auto& atom : slab.atoms)
    for (const auto& p : ads_positions) {
      Vec3 d = min_image_vec(slab.lattice, atom.position, p);
      if (d.norm() < clearance) return true;
    }
  return false;
}

Configuration assemble(const Structure& slab, const AdsorbateSpec& ads,
                       const std::vector<Vec3>& positions, const Site& site,
                       std::string strategy, std::uint64_t seed, int variant) {
  Configuration c;
  c.structure = slab;
  for (std::size_t i = 0; i < ads.size(); ++i)
    c.structure.atoms.push_back(make_atom(ads.symbols[i], positions[i], kTagAdsorbate));
  c.n_slab_atoms = slab.atoms.size();
  c.provenance = {std::move(strategy), site, seed, variant};
  validate_structure(c.structure);
  return c;
}

std::vector<Vec3> rotate_all(const std::vector<Vec3>& points, const Mat3& r) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(r.mul(p));
  return out;
}

Vec3 weighted_center(const AdsorbateSpec& ads, const std::vector<Vec3>& positions,
                     const std::vector<std::size_t>& indices, bool mass_weighted) {
  Vec3 sum;
  double total = 0.0;
  for (std::size_t i : indices) {
    double w = mass_weighted ? atomic_mass(ads.atomic_numbers[i]) : 1.0;
    sum += positions[i] * w;
    total += w;
  }
  return sum / total;
}

Mat3 quaternion_rotation(double u1, double u2, double u3) {
  double x = std::sqrt(1.0 - u1) * std::sin(kTau * u2);
  double y = std::sqrt(1.0 - u1) * std::cos(kTau * u2);
  double z = std::sqrt(u1) * std::sin(kTau * u3);
  double w = std::sqrt(u1) * std::cos(kTau * u3);
  Mat3 r;
  r.m[0] = {1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)};
  r.m[1] = {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)};
  r.m[2] = {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)};
  return r;
}

}  // namespace

Configuration place_heuristic(const Structure& slab, const AdsorbateSpec& ads,
                              const Site& site, std::size_t binding_index,
                              std::uint64_t seed, const PlacementParams& params) {
  if (binding_index >= ads.size())
    throw Error(ErrorKind::precondition,
                "binding index " + std::to_string(binding_index) +
                    " out of range for adsorbate '" + ads.key + "'");
  SplitMix64 rng{seed};
  double theta = rng.uniform(0.0, kTau);
  std::vector<Vec3> rotated = rotate_all(ads.geometry, rotation_about({0, 0, 1}, theta));
  Vec3 target = site.position + Vec3{0, 0, params.height};

  for (int attempt = 0; attempt < 10; ++attempt) {
    Vec3 jitter{rng.uniform(-params.jitter, params.jitter),
                rng.uniform(-params.jitter, params.jitter), 0.0};
    Vec3 shift = target + jitter - rotated[binding_index];
    std::vector<Vec3> positions;
    positions.reserve(rotated.size());
    for (const auto& p : rotated) positions.push_back(p + shift);
    if (!collides(slab, positions, params.min_clearance))
      return assemble(slab, ads, positions, site, "heuristic", seed, 0);
  }
  throw Error(ErrorKind::placement_failure,
              "adsorbate '" + ads.key + "' collides with the slab at every jitter");
}

Configuration place_random(const Structure& slab, const AdsorbateSpec& ads,
                           const Site& site, std::uint64_t seed,
                           const PlacementParams& params) {
  SplitMix64 rng{seed};
  Vec3 target = site.position + Vec3{0, 0, params.height};
  std::vector<std::size_t> all(ads.size());
  for (std::size_t i = 0; i < ads.size(); ++i) all[i] = i;

  for (int attempt = 0; attempt < 10; ++attempt) {
    Mat3 r = quaternion_rotation(rng.uniform01(), rng.uniform01(), rng.uniform01());
    std::vector<Vec3> positions = rotate_all(ads.geometry, r);
    Vec3 com = weighted_center(ads, positions, all, true);
    for (auto& p : positions) p += target - com;
    if (!collides(slab, positions, params.min_clearance))
      return assemble(slab, ads, positions, site, "random", seed, 0);
  }
  throw Error(ErrorKind::placement_failure,
              "adsorbate '" + ads.key + "' collides with the slab for every rotation");
}

Configuration place_agent(const Structure& slab, const AdsorbateSpec& ads,
                          const Site& site, const BindingIndexArray& binding,
                          Orientation orientation, int variant,
                          const PlacementParams& params) {
  if (binding.empty())
    throw Error(ErrorKind::precondition, "agent placement needs binding indices");
  std::set<std::size_t> unique_binding(binding.begin(), binding.end());
  if (unique_binding.size() != binding.size())
    throw Error(ErrorKind::precondition, "binding indices must be unique");
  for (std::size_t i : binding)
    if (i >= ads.size())
      throw Error(ErrorKind::precondition,
                  "binding index " + std::to_string(i) + " out of range for '" +
                      ads.key + "'");
  if (orientation == Orientation::side_on && binding.size() < 2)
    throw Error(ErrorKind::precondition,
                "side-on placement needs at least two binding atoms");

  std::vector<std::size_t> nonbinding;
  for (std::size_t i = 0; i < ads.size(); ++i)
    if (!unique_binding.count(i)) nonbinding.push_back(i);

  std::vector<Vec3> pos = ads.geometry;
  std::vector<std::size_t> bind_list(binding.begin(), binding.end());

  if (orientation == Orientation::end_on) {
    if (!nonbinding.empty()) {
      Vec3 axis = weighted_center(ads, pos, nonbinding, params.mass_weighted) -
                  weighted_center(ads, pos, bind_list, params.mass_weighted);
      if (axis.norm() > 1e-9)
        pos = rotate_all(pos, rotation_between(axis.normalized(), {0, 0, 1}));
    }
  } else {
    Vec3 baxis = pos[binding.back()] - pos[binding.front()];
    if (baxis.norm() < 1e-9)
      throw Error(ErrorKind::degenerate_geometry,
                  "binding atoms coincide; no side-on axis");
    pos = rotate_all(pos, rotation_between(baxis.normalized(), {1, 0, 0}));
    if (!nonbinding.empty()) {
      Vec3 away = weighted_center(ads, pos, nonbinding, params.mass_weighted) -
                  weighted_center(ads, pos, bind_list, params.mass_weighted);
      // Only the component perpendicular to the binding axis can be steered
      // upward without tilting that axis out of the surface plane.
      if (std::hypot(away.y, away.z) > 1e-9)
        pos = rotate_all(pos, rotation_about({1, 0, 0}, std::atan2(away.y, away.z)));
    }
    int n_var = std::max(1, params.n_var);
    double azimuth = static_cast<double>(variant) * kTau / static_cast<double>(n_var);
    pos = rotate_all(pos, rotation_about({0, 0, 1}, azimuth));
  }

  Vec3 center = weighted_center(ads, pos, bind_list, params.mass_weighted);
  Vec3 shift = site.position + Vec3{0, 0, params.height} - center;
  for (auto& p : pos) p += shift;

  if (collides(slab, pos, params.min_clearance))
    throw Error(ErrorKind::placement_failure,
                "agent placement of '" + ads.key + "' collides with the slab at " +
                    to_string(site.kind) + " site");
  return assemble(slab, ads, pos, site, "agent", 0, variant);
}

std::vector<Site> match_sites(const std::vector<Site>& sites, const Solution& solution,
                              const Lattice& lattice, double margin) {
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const std::vector<std::string> want = sorted(solution.surface_binding_atoms);

  std::vector<bool> in_base(sites.size(), false);
  bool any_exact = false;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].kind == solution.site_type &&
        sorted(sites[i].parent_elements) == want) {
      in_base[i] = true;
      any_exact = true;
    }
  }
  if (!any_exact)
    for (std::size_t i = 0; i < sites.size(); ++i)
      if (sites[i].kind == solution.site_type) in_base[i] = true;

  std::vector<bool> admitted = in_base;
  if (margin > 0.0) {
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (admitted[i]) continue;
      for (std::size_t j = 0; j < sites.size(); ++j) {
        if (!in_base[j]) continue;
        Vec3 d = min_image_vec(lattice, sites[i].position, sites[j].position);
        if (d.norm() <= margin) {
          admitted[i] = true;
          break;
        }
      }
    }
  }

  std::vector<Site> out;
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (admitted[i]) out.push_back(sites[i]);
  if (out.empty())
    throw Error(ErrorKind::no_matching_site,
                std::string("no ") + to_string(solution.site_type) +
                    " site matches the solution on this surface");
  return out;
}

std::vector<Configuration> generate_configurations(const Structure& slab,
                                                   const AdsorbateSpec& ads,
                                                   const Solution& solution,
                                                   const BindingIndexArray& binding,
                                                   std::uint64_t seed,
                                                   const PlacementParams& params) {
  std::vector<Site> sites = enumerate_heuristic_sites(slab);
  std::vector<Site> matched = match_sites(sites, solution, slab.lattice,
                                          params.match_margin);

  std::vector<Configuration> configs;
  int n_var = std::max(1, params.n_var);
  for (int variant = 0; variant < n_var; ++variant) {
    for (const auto& site : matched) {
      if (params.n_max > 0 && configs.size() >= params.n_max) break;
      Configuration c = place_agent(slab, ads, site, binding, solution.orientation,
                                    variant, params);
      c.provenance.seed = seed;
      bool duplicate = false;
      for (const auto& kept : configs) {
        bool same = true;
        for (std::size_t k = kept.n_slab_atoms; k < kept.structure.atoms.size(); ++k) {
          Vec3 d = kept.structure.atoms[k].position - c.structure.atoms[k].position;
          if (std::abs(d.x) > 1e-7 || std::abs(d.y) > 1e-7 || std::abs(d.z) > 1e-7) {
            same = false;
            break;
          }
        }
        if (same) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) configs.push_back(std::move(c));
    }
    if (configs.size() >= params.n_max && params.n_max > 0) break;
  }
  for (std::size_t i = 0; i < configs.size(); ++i) configs[i].id = i;
  return configs;
}

std::vector<Configuration> generate_heuristic(const Structure& slab,
                                              const AdsorbateSpec& ads,
                                              std::size_t binding_index,
                                              std::uint64_t seed,
                                              const PlacementParams& params) {
  std::vector<Site> sites = enumerate_heuristic_sites(slab);
  std::vector<Configuration> configs;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    Configuration c = place_heuristic(slab, ads, sites[i], binding_index,
                                      child_seed(seed, 1, i), params);
    c.id = configs.size();
    configs.push_back(std::move(c));
  }
  return configs;
}

std::vector<Configuration> generate_random(const Structure& slab,
                                           const AdsorbateSpec& ads, std::size_t count,
                                           std::uint64_t seed,
                                           const PlacementParams& params) {
  std::vector<Site> sites = sample_random_sites(slab, count, child_seed(seed, 2, 0));
  std::vector<Configuration> configs;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    Configuration c = place_random(slab, ads, sites[i], child_seed(seed, 2, i + 1),
                                   params);
    c.id = configs.size();
    configs.push_back(std::move(c));
  }
  return configs;
}

}  // namespace adsorb
