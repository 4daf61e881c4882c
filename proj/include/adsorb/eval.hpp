#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

namespace adsorb {

struct TrialRecord {
  int system_id = 0;
  std::string method;  // agent | algorithm
  int run = 0;
  double e_min = 0.0;
  int n_init = 0;
};

enum class SrMode { strict, lenient };

struct EvalParams {
  double epsilon = 0.1;  // eV
  SrMode sr_mode = SrMode::lenient;
};

// Percent of agent (system, run) pairs whose energy matches the per-system
// mean algorithm energy: strict |E_a - E_alg| <= eps, lenient E_a <= E_alg + eps.
double success_ratio(const std::vector<TrialRecord>& records, const EvalParams& p);

// Percent of agent pairs with E_a <= E_alg - eps (inclusive).
double ledr(const std::vector<TrialRecord>& records, const EvalParams& p);

struct RsrEntry {
  int system_id = 0;
  int run = 0;
  double percent = 0.0;
};

struct RsrReport {
  std::vector<RsrEntry> per_run;
  std::map<int, double> per_system_mean;
  double grand_mean = 0.0;
  double min_percent = 0.0;
  double max_percent = 0.0;
};

// Per-pair N_init,agent / N_init,algorithm x 100 plus aggregates.
RsrReport rsr(const std::vector<TrialRecord>& records);

// True iff every unordered pair of the three lists is equal as a set, or
// differs in length by one with the shorter a subset of the longer.
bool check_consistency(const std::array<std::vector<std::string>, 3>& arrays);

struct SolutionTriple {
  int system_id = 0;
  std::array<std::vector<std::string>, 3> surface;
  std::array<std::vector<std::string>, 3> adsorbate;
};

struct ConsistencyReport {
  double total = 0.0;          // surface AND adsorbate consistent
  double surface_only = 0.0;
  double adsorbate_only = 0.0;
  int n_consistent = 0;
};

ConsistencyReport consistency_ratio(const std::vector<SolutionTriple>& triples);

struct Table1Row {
  int system_id = 0;
  std::string adsorbate, catalyst;
  double agent_mean = 0, agent_std = 0, algo_mean = 0, algo_std = 0;
  double agent_ninit_mean = 0;
  int algo_ninit = 0;
};

struct TableS1Row {
  int system_id = 0;
  int run = 0;
  double agent_e = 0;
  int agent_ninit = 0;
  double algo_mean = 0, algo_std = 0;
  int algo_ninit = 0;
};

std::vector<Table1Row> load_table1(const std::string& path);
std::vector<TableS1Row> load_table_s1(const std::string& path);
std::vector<SolutionTriple> load_solutions(const std::string& path);

std::vector<TrialRecord> records_from_table1(const std::vector<Table1Row>& rows);
std::vector<TrialRecord> records_from_table_s1(const std::vector<TableS1Row>& rows);

}  // namespace adsorb
