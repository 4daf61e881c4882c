#include "adsorb/slab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adsorb/element.hpp"
#include "adsorb/errors.hpp"

namespace adsorb {

namespace {

using IVec = std::array<long, 3>;

// In-plane vectors u,v and the layer-to-layer stacking vector w of each
// supported cut, in doubled cubic coordinates so every site index stays an
// exact integer. u and v span one primitive elemental surface cell.
struct CutBasis {
  IVec u2, v2, w2;
};

IVec scale(const IVec& v, long s) { return {v[0] * s, v[1] * s, v[2] * s}; }
IVec add(const IVec& a, const IVec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

Vec3 to_cart(const IVec& c2, double a) {
  return {c2[0] * a / 2.0, c2[1] * a / 2.0, c2[2] * a / 2.0};
}

CutBasis cut_basis(BulkKind kind, const std::array<int, 3>& miller) {
  bool cubic_fcc = kind == BulkKind::fcc || kind == BulkKind::l12;
  if (cubic_fcc) {
    if (miller == std::array<int, 3>{1, 1, 1}) return {{1, -1, 0}, {1, 0, -1}, {1, 0, 1}};
    if (miller == std::array<int, 3>{1, 0, 0}) return {{0, 1, 1}, {0, 1, -1}, {1, 1, 0}};
    if (miller == std::array<int, 3>{1, 1, 0}) return {{1, -1, 0}, {0, 0, 2}, {1, 0, 1}};
  } else {
    if (miller == std::array<int, 3>{1, 0, 0}) return {{0, 2, 0}, {0, 0, 2}, {1, 1, 1}};
    if (miller == std::array<int, 3>{1, 1, 0}) return {{1, -1, 1}, {0, 0, 2}, {1, 1, 1}};
    if (miller == std::array<int, 3>{1, 1, 1}) return {{2, -2, 0}, {2, 0, -2}, {1, 1, -1}};
  }
  throw Error(ErrorKind::unsupported_input,
              "unsupported miller (" + std::to_string(miller[0]) + "," +
                  std::to_string(miller[1]) + "," + std::to_string(miller[2]) +
                  "); supported: (1,1,1), (1,0,0), (1,1,0)");
}

bool all_even(const IVec& c2) {
  return c2[0] % 2 == 0 && c2[1] % 2 == 0 && c2[2] % 2 == 0;
}

// Layer classes repeat with the period of parity(w2) in (Z/2)^3 modulo the
// subgroup generated by parity(u2) and parity(v2); for the supported L1_2
// cuts this is 1 for (111) and 2 for (100)/(110).
int termination_cycle(BulkKind kind, const std::array<int, 3>& miller) {
  if (kind != BulkKind::l12) return 1;
  if (miller == std::array<int, 3>{1, 1, 1}) return 1;
  return 2;
}

}  // namespace

std::string BulkSpec::formula() const {
  if (kind == BulkKind::l12) return element_a + "3" + element_b;
  return element_a;
}

std::array<int, 3> normalize_miller(const std::array<int, 3>& miller) {
  std::array<int, 3> m;
  for (int i = 0; i < 3; ++i) m[static_cast<std::size_t>(i)] = std::abs(miller[static_cast<std::size_t>(i)]);
  if (m == std::array<int, 3>{0, 0, 0})
    throw Error(ErrorKind::unsupported_input, "miller index (0,0,0)");
  int g = std::gcd(std::gcd(m[0], m[1]), m[2]);
  for (int& c : m) c /= g;
  std::sort(m.begin(), m.end(), std::greater<int>());
  return m;
}

double interlayer_spacing(BulkKind kind, const std::array<int, 3>& miller, double a) {
  auto m = normalize_miller(miller);
  bool cubic_fcc = kind == BulkKind::fcc || kind == BulkKind::l12;
  if (cubic_fcc) {
    if (m == std::array<int, 3>{1, 1, 1}) return a / std::sqrt(3.0);
    if (m == std::array<int, 3>{1, 0, 0}) return a / 2.0;
    if (m == std::array<int, 3>{1, 1, 0}) return a / (2.0 * std::sqrt(2.0));
  } else {
    if (m == std::array<int, 3>{1, 0, 0}) return a / 2.0;
    if (m == std::array<int, 3>{1, 1, 0}) return a / std::sqrt(2.0);
    if (m == std::array<int, 3>{1, 1, 1}) return a / (2.0 * std::sqrt(3.0));
  }
  throw Error(ErrorKind::unsupported_input, "unsupported miller for spacing");
}

Structure build_slab(const BulkSpec& bulk, const SlabMetadata& meta, int nx, int ny) {
  if (bulk.a <= 0.0) throw Error(ErrorKind::precondition, "lattice constant must be positive");
  if (meta.layers < 1) throw Error(ErrorKind::precondition, "layers must be >= 1");
  if (nx < 1 || ny < 1) throw Error(ErrorKind::precondition, "supercell counts must be >= 1");
  if (meta.vacuum < 8.0)
    throw Error(ErrorKind::precondition, "vacuum must be >= 8 Angstrom");
  if (meta.shift < 0.0 || meta.shift >= 1.0)
    throw Error(ErrorKind::precondition, "shift must lie in [0,1)");
  if (bulk.kind == BulkKind::l12 && bulk.element_b.empty())
    throw Error(ErrorKind::precondition, "L1_2 bulk needs two elements");

  auto miller = normalize_miller(meta.miller);
  CutBasis basis = cut_basis(bulk.kind, miller);

  if (bulk.kind == BulkKind::l12) {
    bool ny_free = miller == std::array<int, 3>{1, 1, 0};
    if (nx % 2 != 0 || (!ny_free && ny % 2 != 0))
      throw Error(ErrorKind::unsupported_input,
                  "L1_2 decoration needs an even supercell along the "
                  "half-lattice in-plane vectors (nx" +
                      std::string(ny_free ? "" : " and ny") + " must be even)");
  }

  double a = bulk.a;
  Vec3 u = to_cart(basis.u2, a);
  Vec3 v = to_cart(basis.v2, a);
  Vec3 w = to_cart(basis.w2, a);

  Vec3 normal = u.cross(v).normalized();
  if (normal.dot(w) < 0.0) {
    basis.w2 = scale(basis.w2, -1);
    w = -w;
  }
  double d = w.dot(normal);

  // Slab frame: x along u, z along the surface normal.
  Vec3 ex = u.normalized();
  Vec3 ez = normal;
  Vec3 ey = ez.cross(ex);

  auto to_slab_frame = [&](const Vec3& r) {
    return Vec3{r.dot(ex), r.dot(ey), r.dot(ez)};
  };

  Vec3 a1 = to_slab_frame(u) * nx;
  Vec3 a2 = to_slab_frame(v) * ny;
  double height = (meta.layers - 1) * d + meta.vacuum;

  Structure s;
  s.lattice.cell.set_row(0, {a1.x, a1.y, 0.0});
  s.lattice.cell.set_row(1, {a2.x, a2.y, 0.0});
  s.lattice.cell.set_row(2, {0.0, 0.0, height});
  s.lattice.pbc = {true, true, false};

  int cycle = termination_cycle(bulk.kind, miller);
  int target_top = static_cast<int>(std::lround(meta.shift * cycle)) % cycle;
  int phase = ((target_top - (meta.layers - 1)) % cycle + cycle) % cycle;

  // 2x2 in-plane fractional solve for folding.
  double det = a1.x * a2.y - a1.y * a2.x;
  int fixed_layers = (meta.layers + 1) / 2;

  for (int layer = 0; layer < meta.layers; ++layer) {
    IVec origin2 = scale(basis.w2, phase + layer);
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        IVec c2 = add(origin2, add(scale(basis.u2, i), scale(basis.v2, j)));
        const std::string& symbol =
            (bulk.kind == BulkKind::l12 && all_even(c2)) ? bulk.element_b : bulk.element_a;

        Vec3 r = to_slab_frame(to_cart(c2, a));
        r.z -= phase * d;
        double fx = (r.x * a2.y - r.y * a2.x) / det;
        double fy = (a1.x * r.y - a1.y * r.x) / det;
        fx -= std::floor(fx + 1e-9);
        fy -= std::floor(fy + 1e-9);
        Vec3 folded{fx * a1.x + fy * a2.x, fx * a1.y + fy * a2.y, r.z};

        int tag = layer < fixed_layers ? kTagFixedBulk : kTagFreeSurface;
        s.atoms.push_back(make_atom(symbol, folded, tag));
      }
    }
  }

  validate_structure(s);
  return s;
}

}  // namespace adsorb
