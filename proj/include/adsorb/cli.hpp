#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "adsorb/chat.hpp"
#include "adsorb/errors.hpp"
#include "adsorb/eval.hpp"
#include "adsorb/placement.hpp"
#include "adsorb/relax.hpp"
#include "adsorb/sites.hpp"
#include "adsorb/solution.hpp"

namespace adsorb {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  Query query;
  std::string bulk_kind;  // fcc | bcc | l12; empty picks by element count
  double lattice_a = 4.0;
  int nx = 2, ny = 2;
  int layers = 3;
  double vacuum = 15.0;
  std::string strategy = "agent";  // agent | heuristic | random | all
  std::string calculator = "builtin";
  double calc_timeout_s = 300.0;
  std::string llm_spec;  // mock:<dir> or a chat endpoint URL
  LlmConfig llm;
  PlacementParams placement;
  FireParams fire;
  AnomalyParams anomaly;
  std::size_t random_count = 50;
  std::size_t binding_index = 0;  // heuristic binding atom, registry order
  std::uint64_t seed = 0;
  int parallelism = 1;  // relaxation workers; 0 means hardware concurrency
  std::string out_dir = "run-out";
  std::string fallback = "error";  // error | heuristic, applied on agent failure
  bool no_timestamps = false;
};

struct RunSummary {
  std::string strategy;  // strategy actually used after any fallback
  double delta_e_ads = 0.0;
  std::size_t argmin = 0;
  std::size_t n_init = 0;
  std::size_t n_valid = 0;
  std::size_t n_anomalous = 0;
  std::string report_path;
};

struct EvaluateConfig {
  std::string records_path;
  EvalParams eval;
};

struct EnumerateConfig {
  std::string slab_path;
  double layer_window = kDefaultLayerWindow;
};

struct RelaxConfig {
  std::string in_path;
  std::string out_path;  // optional relaxed-structure destination
  std::string calculator = "builtin";
  double calc_timeout_s = 300.0;
  FireParams fire;
};

struct BuildSlabConfig {
  std::string catalyst;
  std::string bulk_kind;
  double lattice_a = 4.0;
  std::array<int, 3> miller{1, 1, 1};
  int nx = 2, ny = 2;
  int layers = 3;
  double vacuum = 15.0;
  std::string out_path = "slab.extxyz";
};

// Full pipeline: slab, placements, parallel relaxation, anomaly filter,
// adsorption energy, then report.json / best.extxyz / transcript.json under
// out_dir. Errors propagate; the binary maps all-filtered to exit 2 and
// agent failure without fallback to exit 3.
RunSummary cmd_run(const RunConfig& config, std::ostream& out,
                   ReferenceCache* cache = nullptr);

// Metrics over a records fixture, format sniffed from the header
// (agent_mean -> per-system means, agent_e -> per-run table, JSON array ->
// solution triples). Prints a text block followed by a JSON document.
void cmd_evaluate(const EvaluateConfig& config, std::ostream& out);

void cmd_enumerate(const EnumerateConfig& config, std::ostream& out);

void cmd_relax(const RelaxConfig& config, std::ostream& out);

void cmd_build_slab(const BuildSlabConfig& config, std::ostream& out);

int exit_code_for(ErrorKind kind);

}  // namespace adsorb
