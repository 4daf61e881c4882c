#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "adsorb/structure.hpp"

namespace adsorb {

struct ExtxyzWriteOptions {
  bool always_tags = false;  // emit the tags column even when every tag is 1
  // Extra header key=value pairs (e.g. placement provenance); values are
  // quoted when they contain whitespace.
  std::map<std::string, std::string> extra_keys;
};

// Extended XYZ: line 1 atom count, line 2 key=value header carrying
// Lattice="ax ay az bx by bz cx cy cz" plus optional Properties/pbc keys,
// then one "Symbol x y z [tag]" line per atom.
Structure parse_extxyz(const std::string& text);
Structure parse_extxyz_file(const std::filesystem::path& path);

std::string write_extxyz(const Structure& s, const ExtxyzWriteOptions& opts = {});
void write_extxyz_file(const std::filesystem::path& path, const Structure& s,
                       const ExtxyzWriteOptions& opts = {});

}  // namespace adsorb
