#include "adsorb/sites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <utility>

#include "adsorb/errors.hpp"

namespace adsorb {

const char* to_string(SiteKind k) {
  switch (k) {
    case SiteKind::ontop: return "ontop";
    case SiteKind::bridge: return "bridge";
    case SiteKind::hollow: return "hollow";
    case SiteKind::random: return "random";
  }
  return "?";
}

SiteKind site_kind_from_string(const std::string& s) {
  if (s == "ontop") return SiteKind::ontop;
  if (s == "bridge") return SiteKind::bridge;
  if (s == "hollow") return SiteKind::hollow;
  if (s == "random") return SiteKind::random;
  throw Error(ErrorKind::parse, "unknown site kind '" + s + "'");
}

namespace {

struct P2 {
  double x = 0.0, y = 0.0;
};

struct AugPoint {
  P2 p;
  std::size_t atom = 0;
  int di = 0, dj = 0;
};

struct Tri {
  std::array<int, 3> v{};  // counterclockwise
};

double cross2(const P2& o, const P2& a, const P2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Sign of the in-circle predicate for counterclockwise (a,b,c): +1 when d is
// strictly inside the circumcircle, -1 strictly outside, 0 cocircular within
// a scale-normalized tolerance.
int incircle(const P2& a, const P2& b, const P2& c, const P2& d) {
  double adx = a.x - d.x, ady = a.y - d.y;
  double bdx = b.x - d.x, bdy = b.y - d.y;
  double cdx = c.x - d.x, cdy = c.y - d.y;
  double ad2 = adx * adx + ady * ady;
  double bd2 = bdx * bdx + bdy * bdy;
  double cd2 = cdx * cdx + cdy * cdy;
  double det = adx * (bdy * cd2 - bd2 * cdy) - ady * (bdx * cd2 - bd2 * cdx) +
               ad2 * (bdx * cdy - bdy * cdx);
  double mag = std::abs(adx) * (std::abs(bdy) * cd2 + bd2 * std::abs(cdy)) +
               std::abs(ady) * (std::abs(bdx) * cd2 + bd2 * std::abs(cdx)) +
               ad2 * (std::abs(bdx) * std::abs(cdy) + std::abs(bdy) * std::abs(cdx));
  if (std::abs(det) <= 1e-9 * mag) return 0;
  return det > 0.0 ? 1 : -1;
}

struct Delaunay {
  std::vector<AugPoint> pts;  // augmented points, then 3 hull anchors
  std::vector<Tri> tris;      // final triangles, all of real points

  const P2& at(int i) const { return pts[static_cast<std::size_t>(i)].p; }
};

Delaunay bowyer_watson(std::vector<AugPoint> aug) {
  Delaunay d;
  d.pts = std::move(aug);
  const int n = static_cast<int>(d.pts.size());

  double xmin = d.pts[0].p.x, xmax = xmin, ymin = d.pts[0].p.y, ymax = ymin;
  for (const auto& q : d.pts) {
    xmin = std::min(xmin, q.p.x);
    xmax = std::max(xmax, q.p.x);
    ymin = std::min(ymin, q.p.y);
    ymax = std::max(ymax, q.p.y);
  }
  double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
  double r = std::max({xmax - xmin, ymax - ymin, 1.0}) * 16.0;
  d.pts.push_back({{cx - 2.0 * r, cy - r}, 0, 0, 0});
  d.pts.push_back({{cx + 2.0 * r, cy - r}, 0, 0, 0});
  d.pts.push_back({{cx, cy + 2.0 * r}, 0, 0, 0});

  std::vector<Tri> tris;
  tris.push_back({{n, n + 1, n + 2}});

  for (int p = 0; p < n; ++p) {
    std::vector<std::size_t> bad;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (incircle(d.at(tris[t].v[0]), d.at(tris[t].v[1]), d.at(tris[t].v[2]),
                   d.at(p)) > 0)
        bad.push_back(t);
    }
    std::map<std::pair<int, int>, int> edge_count;
    for (std::size_t t : bad) {
      for (int e = 0; e < 3; ++e) {
        int u = tris[t].v[static_cast<std::size_t>(e)];
        int v = tris[t].v[static_cast<std::size_t>((e + 1) % 3)];
        edge_count[{std::min(u, v), std::max(u, v)}] += 1;
      }
    }
    for (auto it = bad.rbegin(); it != bad.rend(); ++it)
      tris.erase(tris.begin() + static_cast<std::ptrdiff_t>(*it));
    for (const auto& [edge, count] : edge_count) {
      if (count != 1) continue;
      Tri t{{edge.first, edge.second, p}};
      if (cross2(d.at(t.v[0]), d.at(t.v[1]), d.at(t.v[2])) < 0.0)
        std::swap(t.v[0], t.v[1]);
      tris.push_back(t);
    }
  }

  for (const auto& t : tris) {
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    d.tris.push_back(t);
  }
  return d;
}

struct Frame {
  Vec3 a1, a2;               // in-plane cell vectors
  double inv[2][2] = {{0}};  // Cartesian xy to fractional
  double area = 0.0;

  std::pair<double, double> frac(double x, double y) const {
    return {inv[0][0] * x + inv[0][1] * y, inv[1][0] * x + inv[1][1] * y};
  }
  Vec3 fold_xy(Vec3 p) const {
    auto [fx, fy] = frac(p.x, p.y);
    double n1 = std::floor(fx + 1e-9), n2 = std::floor(fy + 1e-9);
    return p - n1 * a1 - n2 * a2;
  }
  double min_image_xy(const Vec3& p, const Vec3& q) const {
    double best = std::numeric_limits<double>::max();
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j) {
        double dx = p.x - q.x + i * a1.x + j * a2.x;
        double dy = p.y - q.y + i * a1.y + j * a2.y;
        best = std::min(best, dx * dx + dy * dy);
      }
    return std::sqrt(best);
  }
};

Frame make_frame(const Structure& slab) {
  Frame f;
  f.a1 = slab.lattice.cell.row(0);
  f.a2 = slab.lattice.cell.row(1);
  double det = f.a1.x * f.a2.y - f.a1.y * f.a2.x;
  if (std::abs(det) < 1e-9)
    throw Error(ErrorKind::degenerate_geometry,
                "in-plane cell vectors are collinear");
  f.inv[0][0] = f.a2.y / det;
  f.inv[0][1] = -f.a2.x / det;
  f.inv[1][0] = -f.a1.y / det;
  f.inv[1][1] = f.a1.x / det;
  f.area = std::abs(det);
  return f;
}

// Tile-independent identity of a triangle or edge: vertices sorted by
// (atom, di, dj), offsets rebased to the first vertex.
using ClassKey = std::vector<std::tuple<std::size_t, int, int>>;

ClassKey make_key(std::vector<std::tuple<std::size_t, int, int>> verts) {
  std::sort(verts.begin(), verts.end());
  int di0 = std::get<1>(verts[0]), dj0 = std::get<2>(verts[0]);
  for (auto& v : verts) {
    std::get<1>(v) -= di0;
    std::get<2>(v) -= dj0;
  }
  return verts;
}

}  // namespace

std::vector<std::size_t> surface_atoms(const Structure& slab, double layer_window) {
  double zmax = -std::numeric_limits<double>::max();
  bool any = false;
  for (const auto& a : slab.atoms) {
    if (a.tag != kTagFixedBulk && a.tag != kTagFreeSurface) continue;
    zmax = std::max(zmax, a.position.z);
    any = true;
  }
  if (!any)
    throw Error(ErrorKind::no_surface, "structure has no substrate atoms");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < slab.atoms.size(); ++i) {
    const auto& a = slab.atoms[i];
    if (a.tag != kTagFixedBulk && a.tag != kTagFreeSurface) continue;
    if (a.position.z >= zmax - layer_window) out.push_back(i);
  }
  if (out.empty())
    throw Error(ErrorKind::no_surface, "no atoms in the top layer window");
  return out;
}

Triangulation triangulate_surface(const Structure& slab, double layer_window) {
  if (!slab.lattice.pbc[0] || !slab.lattice.pbc[1])
    throw Error(ErrorKind::precondition,
                "surface triangulation needs in-plane periodicity");
  const auto surf = surface_atoms(slab, layer_window);
  const Frame frame = make_frame(slab);

  std::vector<AugPoint> aug;
  aug.reserve(surf.size() * 9);
  for (std::size_t s : surf) {
    const Vec3 p = slab.atoms[s].position;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        Vec3 q = p + di * frame.a1 + dj * frame.a2;
        aug.push_back({{q.x, q.y}, s, di, dj});
      }
  }
  Delaunay d = bowyer_watson(std::move(aug));

  Triangulation out;
  out.vertices = surf;
  out.cell_area = frame.area;
  double zsum = 0.0;
  for (std::size_t s : surf) zsum += slab.atoms[s].position.z;
  out.z_ref = zsum / static_cast<double>(surf.size());

  std::map<ClassKey, SurfaceTriangle> classes;
  for (const auto& t : d.tris) {
    const AugPoint& p0 = d.pts[static_cast<std::size_t>(t.v[0])];
    const AugPoint& p1 = d.pts[static_cast<std::size_t>(t.v[1])];
    const AugPoint& p2 = d.pts[static_cast<std::size_t>(t.v[2])];
    double cx = (p0.p.x + p1.p.x + p2.p.x) / 3.0;
    double cy = (p0.p.y + p1.p.y + p2.p.y) / 3.0;
    auto [fx, fy] = frame.frac(cx, cy);
    if (std::floor(fx + 1e-9) != 0.0 || std::floor(fy + 1e-9) != 0.0) continue;

    ClassKey key = make_key(
        {{p0.atom, p0.di, p0.dj}, {p1.atom, p1.di, p1.dj}, {p2.atom, p2.di, p2.dj}});
    if (classes.count(key)) continue;

    SurfaceTriangle st;
    const AugPoint* ps[3] = {&p0, &p1, &p2};
    for (int k = 0; k < 3; ++k) {
      st.vertices[static_cast<std::size_t>(k)] = {ps[k]->atom, ps[k]->di, ps[k]->dj};
      st.corners[static_cast<std::size_t>(k)] = {ps[k]->p.x, ps[k]->p.y, out.z_ref};
    }
    st.area = 0.5 * std::abs(cross2(p0.p, p1.p, p2.p));
    if (st.area <= 1e-6)
      throw Error(ErrorKind::degenerate_geometry, "degenerate surface triangle");
    classes.emplace(std::move(key), std::move(st));
  }

  double area_sum = 0.0;
  for (auto& [key, st] : classes) {
    area_sum += st.area;
    out.triangles.push_back(st);
  }
  if (std::abs(area_sum - frame.area) > 1e-6 * frame.area)
    throw Error(ErrorKind::degenerate_geometry,
                "surface triangulation does not tile the cell");
  return out;
}

std::vector<Site> enumerate_heuristic_sites(const Structure& slab,
                                            double layer_window) {
  const auto surf = surface_atoms(slab, layer_window);
  const Frame frame = make_frame(slab);

  std::vector<AugPoint> aug;
  for (std::size_t s : surf) {
    const Vec3 p = slab.atoms[s].position;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        aug.push_back({{p.x + di * frame.a1.x + dj * frame.a2.x,
                        p.y + di * frame.a1.y + dj * frame.a2.y},
                       s, di, dj});
  }
  Delaunay d = bowyer_watson(std::move(aug));

  double zsum = 0.0;
  for (std::size_t s : surf) zsum += slab.atoms[s].position.z;
  const double z_ref = zsum / static_cast<double>(surf.size());

  std::map<std::pair<int, int>, std::vector<std::size_t>> edge_tris;
  for (std::size_t t = 0; t < d.tris.size(); ++t) {
    for (int e = 0; e < 3; ++e) {
      int u = d.tris[t].v[static_cast<std::size_t>(e)];
      int v = d.tris[t].v[static_cast<std::size_t>((e + 1) % 3)];
      edge_tris[{std::min(u, v), std::max(u, v)}].push_back(t);
    }
  }

  auto opposite = [&](const Tri& t, int u, int v) {
    for (int k = 0; k < 3; ++k)
      if (t.v[static_cast<std::size_t>(k)] != u && t.v[static_cast<std::size_t>(k)] != v)
        return t.v[static_cast<std::size_t>(k)];
    return t.v[0];
  };

  // A shared edge survives as a bridge only when the two adjacent triangles
  // are not cocircular; a cocircular pair means the edge is one of two
  // interchangeable diagonals of a square and marks no saddle point.
  auto edge_is_strict = [&](int u, int v) {
    const auto& adj = edge_tris[{std::min(u, v), std::max(u, v)}];
    if (adj.size() != 2) return true;
    const Tri& t1 = d.tris[adj[0]];
    const Tri& t2 = d.tris[adj[1]];
    int w = opposite(t2, u, v);
    return incircle(d.at(t1.v[0]), d.at(t1.v[1]), d.at(t1.v[2]), d.at(w)) != 0;
  };

  std::vector<Site> sites;
  for (std::size_t s : surf) {
    Site site;
    site.position = {slab.atoms[s].position.x, slab.atoms[s].position.y, z_ref};
    site.kind = SiteKind::ontop;
    site.parents = {s};
    site.parent_elements = {slab.atoms[s].symbol};
    sites.push_back(std::move(site));
  }

  std::map<ClassKey, Site> bridges;
  std::map<ClassKey, Site> hollows;
  for (const auto& t : d.tris) {
    const AugPoint* ps[3] = {&d.pts[static_cast<std::size_t>(t.v[0])],
                             &d.pts[static_cast<std::size_t>(t.v[1])],
                             &d.pts[static_cast<std::size_t>(t.v[2])]};
    for (int e = 0; e < 3; ++e) {
      const AugPoint* u = ps[e];
      const AugPoint* v = ps[(e + 1) % 3];
      double mx = 0.5 * (u->p.x + v->p.x), my = 0.5 * (u->p.y + v->p.y);
      auto [fx, fy] = frame.frac(mx, my);
      if (std::floor(fx + 1e-9) != 0.0 || std::floor(fy + 1e-9) != 0.0) continue;
      ClassKey key = make_key({{u->atom, u->di, u->dj}, {v->atom, v->di, v->dj}});
      if (bridges.count(key)) continue;
      if (!edge_is_strict(t.v[static_cast<std::size_t>(e)],
                          t.v[static_cast<std::size_t>((e + 1) % 3)]))
        continue;
      Site site;
      site.position = frame.fold_xy({mx, my, z_ref});
      site.kind = SiteKind::bridge;
      site.parents = {u->atom, v->atom};
      std::sort(site.parents.begin(), site.parents.end());
      for (std::size_t a : site.parents)
        site.parent_elements.push_back(slab.atoms[a].symbol);
      bridges.emplace(std::move(key), std::move(site));
    }

    double cx = (ps[0]->p.x + ps[1]->p.x + ps[2]->p.x) / 3.0;
    double cy = (ps[0]->p.y + ps[1]->p.y + ps[2]->p.y) / 3.0;
    auto [fx, fy] = frame.frac(cx, cy);
    if (std::floor(fx + 1e-9) != 0.0 || std::floor(fy + 1e-9) != 0.0) continue;
    ClassKey key = make_key({{ps[0]->atom, ps[0]->di, ps[0]->dj},
                             {ps[1]->atom, ps[1]->di, ps[1]->dj},
                             {ps[2]->atom, ps[2]->di, ps[2]->dj}});
    if (hollows.count(key)) continue;
    Site site;
    site.position = frame.fold_xy({cx, cy, z_ref});
    site.kind = SiteKind::hollow;
    site.parents = {ps[0]->atom, ps[1]->atom, ps[2]->atom};
    std::sort(site.parents.begin(), site.parents.end());
    for (std::size_t a : site.parents)
      site.parent_elements.push_back(slab.atoms[a].symbol);
    hollows.emplace(std::move(key), std::move(site));
  }

  for (auto& [key, site] : bridges) sites.push_back(std::move(site));

  std::vector<Site> hollow_list;
  for (auto& [key, site] : hollows) hollow_list.push_back(std::move(site));
  std::vector<bool> absorbed(hollow_list.size(), false);
  for (std::size_t i = 0; i < hollow_list.size(); ++i) {
    if (absorbed[i]) continue;
    for (std::size_t j = i + 1; j < hollow_list.size(); ++j) {
      if (absorbed[j]) continue;
      if (frame.min_image_xy(hollow_list[i].position, hollow_list[j].position) >= 0.3)
        continue;
      Vec3 q = hollow_list[j].position;
      auto [fx, fy] = frame.frac(q.x - hollow_list[i].position.x,
                                 q.y - hollow_list[i].position.y);
      q -= std::round(fx) * frame.a1 + std::round(fy) * frame.a2;
      hollow_list[i].position = frame.fold_xy((hollow_list[i].position + q) * 0.5);
      for (std::size_t a : hollow_list[j].parents)
        hollow_list[i].parents.push_back(a);
      std::sort(hollow_list[i].parents.begin(), hollow_list[i].parents.end());
      hollow_list[i].parents.erase(
          std::unique(hollow_list[i].parents.begin(), hollow_list[i].parents.end()),
          hollow_list[i].parents.end());
      hollow_list[i].parent_elements.clear();
      for (std::size_t a : hollow_list[i].parents)
        hollow_list[i].parent_elements.push_back(slab.atoms[a].symbol);
      absorbed[j] = true;
    }
  }
  for (std::size_t i = 0; i < hollow_list.size(); ++i)
    if (!absorbed[i]) sites.push_back(std::move(hollow_list[i]));

  std::vector<Site> unique_sites;
  for (auto& s : sites) {
    bool dup = false;
    for (const auto& kept : unique_sites) {
      if (frame.min_image_xy(s.position, kept.position) < 0.05) {
        dup = true;
        break;
      }
    }
    if (!dup) unique_sites.push_back(std::move(s));
  }
  return unique_sites;
}

std::vector<Vec3> sample_in_triangles(const std::vector<std::array<Vec3, 3>>& triangles,
                                      std::size_t n, SplitMix64& rng,
                                      std::vector<std::size_t>* picked) {
  if (triangles.empty())
    throw Error(ErrorKind::precondition, "no triangles to sample from");
  std::vector<double> cumulative;
  cumulative.reserve(triangles.size());
  double total = 0.0;
  for (const auto& t : triangles) {
    Vec3 u = t[1] - t[0], v = t[2] - t[0];
    total += 0.5 * u.cross(v).norm();
    cumulative.push_back(total);
  }
  if (total <= 0.0)
    throw Error(ErrorKind::degenerate_geometry, "zero total triangle area");

  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    double u = rng.uniform01() * total;
    std::size_t idx = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) -
        cumulative.begin());
    if (idx >= triangles.size()) idx = triangles.size() - 1;
    // P = (1 - sqrt(r1)) A + sqrt(r1) (1 - r2) B + sqrt(r1) r2 C is uniform
    // over the triangle.
    double r1 = rng.uniform01();
    double r2 = rng.uniform01();
    double s = std::sqrt(r1);
    const auto& t = triangles[idx];
    out.push_back(t[0] * (1.0 - s) + t[1] * (s * (1.0 - r2)) + t[2] * (s * r2));
    if (picked) picked->push_back(idx);
  }
  return out;
}

std::vector<Site> sample_random_sites(const Structure& slab, std::size_t n,
                                      std::uint64_t seed, double layer_window) {
  if (n == 0)
    throw Error(ErrorKind::precondition, "sample count must be positive");
  Triangulation tri = triangulate_surface(slab, layer_window);

  std::vector<std::array<Vec3, 3>> corners;
  corners.reserve(tri.triangles.size());
  for (const auto& t : tri.triangles) corners.push_back(t.corners);

  SplitMix64 rng{seed};
  std::vector<std::size_t> picked;
  std::vector<Vec3> points = sample_in_triangles(corners, n, rng, &picked);

  Frame frame = make_frame(slab);
  std::vector<Site> sites;
  sites.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Site s;
    s.position = frame.fold_xy({points[k].x, points[k].y, tri.z_ref});
    s.kind = SiteKind::random;
    const auto& t = tri.triangles[picked[k]];
    s.parents = {t.vertices[0].atom, t.vertices[1].atom, t.vertices[2].atom};
    std::sort(s.parents.begin(), s.parents.end());
    for (std::size_t a : s.parents)
      s.parent_elements.push_back(slab.atoms[a].symbol);
    sites.push_back(std::move(s));
  }
  return sites;
}

}  // namespace adsorb
