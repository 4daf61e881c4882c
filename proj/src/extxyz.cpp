#include "adsorb/extxyz.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "adsorb/element.hpp"
#include "adsorb/errors.hpp"

namespace adsorb {

namespace {

[[noreturn]] void fail(const std::string& what, std::size_t line) {
  throw Error(ErrorKind::parse, what + ", line " + std::to_string(line));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    fail("expected a number, got '" + tok + "'", line);
  }
  if (used != tok.size()) fail("expected a number, got '" + tok + "'", line);
  if (!std::isfinite(v)) fail("non-finite coordinate '" + tok + "'", line);
  return v;
}

long parse_long(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    fail("expected an integer, got '" + tok + "'", line);
  }
  if (used != tok.size()) fail("expected an integer, got '" + tok + "'", line);
  return v;
}

// key=value pairs; values may be double-quoted to contain whitespace.
std::map<std::string, std::string> parse_header(const std::string& line, std::size_t lineno) {
  std::map<std::string, std::string> kv;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= n) break;
    std::size_t eq = line.find('=', i);
    if (eq == std::string::npos) fail("header token without '='", lineno);
    std::string key = line.substr(i, eq - i);
    i = eq + 1;
    std::string value;
    if (i < n && line[i] == '"') {
      std::size_t close = line.find('"', i + 1);
      if (close == std::string::npos) fail("unterminated quote in header", lineno);
      value = line.substr(i + 1, close - i - 1);
      i = close + 1;
    } else {
      std::size_t end = i;
      while (end < n && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
      value = line.substr(i, end - i);
      i = end;
    }
    kv[key] = value;
  }
  return kv;
}

struct ColumnLayout {
  int species = -1;
  int pos = -1;
  int tags = -1;
  int total = 0;
};

ColumnLayout parse_properties(const std::string& props, std::size_t lineno) {
  ColumnLayout layout;
  std::vector<std::string> parts;
  std::string cur;
  for (char c : props) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  if (parts.size() % 3 != 0) fail("malformed Properties key '" + props + "'", lineno);
  int col = 0;
  for (std::size_t i = 0; i < parts.size(); i += 3) {
    const std::string& name = parts[i];
    int ncols = static_cast<int>(parse_long(parts[i + 2], lineno));
    if (name == "species") layout.species = col;
    else if (name == "pos") layout.pos = col;
    else if (name == "tags") layout.tags = col;
    col += ncols;
  }
  layout.total = col;
  if (layout.species < 0 || layout.pos < 0)
    fail("Properties key lacks species/pos fields", lineno);
  return layout;
}

bool parse_pbc_flag(const std::string& tok, std::size_t lineno) {
  if (tok == "T" || tok == "True" || tok == "true" || tok == "1") return true;
  if (tok == "F" || tok == "False" || tok == "false" || tok == "0") return false;
  fail("malformed pbc flag '" + tok + "'", lineno);
}

}  // namespace

Structure parse_extxyz(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }
  if (lines.empty()) fail("empty file", 1);

  auto count_toks = split_ws(lines[0]);
  if (count_toks.size() != 1) fail("malformed atom count '" + lines[0] + "'", 1);
  long n = parse_long(count_toks[0], 1);
  if (n < 1) fail("atom count must be >= 1", 1);
  if (lines.size() < static_cast<std::size_t>(n) + 2)
    fail("expected " + std::to_string(n) + " atom lines", lines.size());

  auto header = parse_header(lines[1], 2);
  auto lat_it = header.find("Lattice");
  if (lat_it == header.end()) fail("missing Lattice key", 2);
  auto lat_toks = split_ws(lat_it->second);
  if (lat_toks.size() != 9) fail("Lattice needs 9 numbers", 2);

  Structure s;
  for (int r = 0; r < 3; ++r)
    s.lattice.cell.set_row(r, {parse_double(lat_toks[r * 3 + 0], 2),
                               parse_double(lat_toks[r * 3 + 1], 2),
                               parse_double(lat_toks[r * 3 + 2], 2)});

  if (auto it = header.find("pbc"); it != header.end()) {
    auto flags = split_ws(it->second);
    if (flags.size() != 3) fail("pbc needs 3 flags", 2);
    for (int k = 0; k < 3; ++k) s.lattice.pbc[static_cast<std::size_t>(k)] = parse_pbc_flag(flags[static_cast<std::size_t>(k)], 2);
  }

  ColumnLayout layout;
  bool have_layout = false;
  if (auto it = header.find("Properties"); it != header.end()) {
    layout = parse_properties(it->second, 2);
    have_layout = true;
  }

  std::vector<long> adsorbate_indices;
  if (auto it = header.find("adsorbate_indices"); it != header.end()) {
    std::string v = it->second;
    for (char& c : v)
      if (c == ',') c = ' ';
    for (const auto& tok : split_ws(v)) adsorbate_indices.push_back(parse_long(tok, 2));
  }

  bool tags_seen = false;
  for (long a = 0; a < n; ++a) {
    std::size_t lineno = static_cast<std::size_t>(a) + 3;
    auto toks = split_ws(lines[lineno - 1]);
    std::string symbol;
    Vec3 pos;
    long tag = 1;
    bool has_tag = false;
    if (have_layout) {
      if (static_cast<int>(toks.size()) < layout.total)
        fail("expected " + std::to_string(layout.total) + " columns", lineno);
      symbol = toks[static_cast<std::size_t>(layout.species)];
      pos = {parse_double(toks[static_cast<std::size_t>(layout.pos)], lineno),
             parse_double(toks[static_cast<std::size_t>(layout.pos) + 1], lineno),
             parse_double(toks[static_cast<std::size_t>(layout.pos) + 2], lineno)};
      if (layout.tags >= 0) {
        tag = parse_long(toks[static_cast<std::size_t>(layout.tags)], lineno);
        has_tag = true;
      }
    } else {
      if (toks.size() != 4 && toks.size() != 5)
        fail("expected 'Symbol x y z [tag]'", lineno);
      symbol = toks[0];
      pos = {parse_double(toks[1], lineno), parse_double(toks[2], lineno),
             parse_double(toks[3], lineno)};
      if (toks.size() == 5) {
        tag = parse_long(toks[4], lineno);
        has_tag = true;
      }
    }
    if (!is_known_element(symbol)) fail("unknown element '" + symbol + "'", lineno);
    if (has_tag) {
      if (tag < 0 || tag > 2) fail("tag out of range [0,2]: " + std::to_string(tag), lineno);
      tags_seen = true;
    }
    s.atoms.push_back(make_atom(symbol, pos, static_cast<int>(tag)));
  }

  // Tag defaults when no tags column: adsorbate_indices members get 2, the
  // rest (and everything when the key is absent) get 1.
  if (!tags_seen && !adsorbate_indices.empty()) {
    for (long idx : adsorbate_indices) {
      if (idx < 0 || idx >= n)
        fail("adsorbate_indices entry out of range: " + std::to_string(idx), 2);
      s.atoms[static_cast<std::size_t>(idx)].tag = kTagAdsorbate;
    }
  }

  validate_structure(s);
  return s;
}

Structure parse_extxyz_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_extxyz(ss.str());
}

std::string write_extxyz(const Structure& s, const ExtxyzWriteOptions& opts) {
  bool tags_column = opts.always_tags;
  for (const Atom& a : s.atoms)
    if (a.tag != 1) tags_column = true;

  char buf[256];
  std::string out = std::to_string(s.atoms.size()) + "\n";

  out += "Lattice=\"";
  bool first_comp = true;
  for (int r = 0; r < 3; ++r) {
    Vec3 v = s.lattice.cell.row(r);
    for (double comp : {v.x, v.y, v.z}) {
      if (!first_comp) out += " ";
      first_comp = false;
      std::snprintf(buf, sizeof buf, "%.17g", comp);
      out += buf;
    }
  }
  out += "\" Properties=species:S:1:pos:R:3";
  if (tags_column) out += ":tags:I:1";
  std::snprintf(buf, sizeof buf, " pbc=\"%c %c %c\"", s.lattice.pbc[0] ? 'T' : 'F',
                s.lattice.pbc[1] ? 'T' : 'F', s.lattice.pbc[2] ? 'T' : 'F');
  out += buf;
  for (const auto& [k, v] : opts.extra_keys) {
    out += " " + k + "=";
    if (v.find_first_of(" \t") != std::string::npos)
      out += "\"" + v + "\"";
    else
      out += v;
  }
  out += "\n";

  for (const Atom& a : s.atoms) {
    if (tags_column)
      std::snprintf(buf, sizeof buf, "%-2s %12.6f %12.6f %12.6f %d\n", a.symbol.c_str(),
                    a.position.x, a.position.y, a.position.z, a.tag);
    else
      std::snprintf(buf, sizeof buf, "%-2s %12.6f %12.6f %12.6f\n", a.symbol.c_str(),
                    a.position.x, a.position.y, a.position.z);
    out += buf;
  }
  return out;
}

void write_extxyz_file(const std::filesystem::path& path, const Structure& s,
                       const ExtxyzWriteOptions& opts) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::parse, "cannot open '" + path.string() + "' for writing");
  out << write_extxyz(s, opts);
}

}  // namespace adsorb
