#include "adsorb/assets.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "adsorb/errors.hpp"

#ifndef ADSORB_SOURCE_ROOT
#define ADSORB_SOURCE_ROOT ""
#endif

namespace adsorb {

std::filesystem::path asset_root() {
  if (const char* env = std::getenv("ADSORB_DATA_DIR"); env && *env) {
    return std::filesystem::path(env);
  }
  std::filesystem::path cwd = std::filesystem::current_path() / "assets";
  if (std::filesystem::is_directory(cwd)) return cwd;
  std::filesystem::path source = std::filesystem::path(ADSORB_SOURCE_ROOT) / "assets";
  if (std::filesystem::is_directory(source)) return source;
  throw Error(ErrorKind::config,
              "cannot locate the assets directory; set ADSORB_DATA_DIR or run "
              "from the project root");
}

std::filesystem::path asset_path(const std::string& relative) {
  return asset_root() / relative;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  return fnv1a64(read_text_file(path));
}

}  // namespace adsorb
