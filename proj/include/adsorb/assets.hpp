#pragma once

#include <filesystem>
#include <string>

namespace adsorb {

// Root of the shipped data tree (assets/ with adsorbates, prompts, LJ
// parameters). Resolution order: ADSORB_DATA_DIR environment variable, an
// assets/ directory under the current working directory, then the source
// tree this binary was built from.
std::filesystem::path asset_root();

std::filesystem::path asset_path(const std::string& relative);

std::string read_text_file(const std::filesystem::path& path);

// FNV-1a 64-bit over raw bytes; stable across platforms, used for fixture
// fingerprints in reports.
std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

}  // namespace adsorb
