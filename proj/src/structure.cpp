#include "adsorb/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adsorb/element.hpp"
#include "adsorb/errors.hpp"

namespace adsorb {

Vec3 Lattice::fractional(const Vec3& cartesian) const {
  // Solve f * cell = r with rows-as-vectors convention.
  return cell.transposed().inverse().mul(cartesian);
}

Vec3 Lattice::cartesian(const Vec3& fractional) const {
  return cell.transposed().mul(fractional);
}

Atom make_atom(const std::string& symbol, const Vec3& position, int tag) {
  Atom a;
  a.symbol = symbol;
  a.z = atomic_number(symbol);
  a.position = position;
  a.tag = tag;
  return a;
}

Vec3 min_image_vec(const Lattice& lattice, const Vec3& from, const Vec3& to) {
  Vec3 d = to - from;
  Vec3 best = d;
  double best2 = d.norm2();
  int ia = lattice.pbc[0] ? 1 : 0;
  int ib = lattice.pbc[1] ? 1 : 0;
  int ic = lattice.pbc[2] ? 1 : 0;
  for (int na = -ia; na <= ia; ++na) {
    for (int nb = -ib; nb <= ib; ++nb) {
      for (int nc = -ic; nc <= ic; ++nc) {
        Vec3 shifted = d + lattice.a() * na + lattice.b() * nb + lattice.c() * nc;
        double r2 = shifted.norm2();
        if (r2 < best2) {
          best2 = r2;
          best = shifted;
        }
      }
    }
  }
  return best;
}

double min_image_distance(const Structure& s, std::size_t i, std::size_t j) {
  if (i >= s.atoms.size() || j >= s.atoms.size())
    throw Error(ErrorKind::precondition, "atom index out of range");
  if (i == j) throw Error(ErrorKind::precondition, "min_image_distance needs i != j");
  return min_image_vec(s.lattice, s.atoms[i].position, s.atoms[j].position).norm();
}

void validate_structure(const Structure& s) {
  if (s.atoms.empty()) throw Error(ErrorKind::precondition, "structure has no atoms");
  if (s.lattice.volume() <= 1e-9)
    throw Error(ErrorKind::precondition, "degenerate or left-handed cell (det <= 1e-9)");
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    const Atom& a = s.atoms[i];
    if (!std::isfinite(a.position.x) || !std::isfinite(a.position.y) ||
        !std::isfinite(a.position.z))
      throw Error(ErrorKind::precondition,
                  "non-finite position at atom " + std::to_string(i));
    if (a.z != atomic_number(a.symbol))
      throw Error(ErrorKind::precondition,
                  "symbol/atomic-number mismatch at atom " + std::to_string(i));
  }
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < s.atoms.size(); ++j) {
      if (min_image_distance(s, i, j) < 0.1)
        throw Error(ErrorKind::precondition,
                    "atoms " + std::to_string(i) + " and " + std::to_string(j) +
                        " closer than 0.1 A");
    }
  }
}

Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  Vec3 f = from.normalized();
  Vec3 t = to.normalized();
  double c = f.dot(t);
  if (c > 1.0 - 1e-12) return Mat3::identity();
  if (c < -1.0 + 1e-12) {
    // Antiparallel: rotate pi about any axis orthogonal to `from`.
    Vec3 ortho = std::abs(f.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 axis = f.cross(ortho).normalized();
    return rotation_about(axis, M_PI);
  }
  Vec3 axis = f.cross(t).normalized();
  return rotation_about(axis, std::acos(std::clamp(c, -1.0, 1.0)));
}

Mat3 rotation_about(const Vec3& axis, double angle) {
  Vec3 u = axis.normalized();
  double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Mat3 r;
  r.m[0] = {c + u.x * u.x * t, u.x * u.y * t - u.z * s, u.x * u.z * t + u.y * s};
  r.m[1] = {u.y * u.x * t + u.z * s, c + u.y * u.y * t, u.y * u.z * t - u.x * s};
  r.m[2] = {u.z * u.x * t - u.y * s, u.z * u.y * t + u.x * s, c + u.z * u.z * t};
  return r;
}

}  // namespace adsorb
