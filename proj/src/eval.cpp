#include "adsorb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "adsorb/assets.hpp"
#include "adsorb/errors.hpp"

namespace adsorb {
namespace {

std::map<int, double> algorithm_means(const std::vector<TrialRecord>& records) {
  std::map<int, std::pair<double, int>> sums;
  for (const auto& r : records) {
    if (r.method != "algorithm") continue;
    auto& [sum, count] = sums[r.system_id];
    sum += r.e_min;
    ++count;
  }
  std::map<int, double> means;
  for (const auto& [system, sc] : sums)
    means[system] = sc.first / static_cast<double>(sc.second);
  return means;
}

double require_algo_mean(const std::map<int, double>& means, int system_id) {
  auto it = means.find(system_id);
  if (it == means.end())
    throw Error(ErrorKind::precondition,
                "no algorithm runs for system " + std::to_string(system_id));
  return it->second;
}

std::set<std::string> as_set(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

double success_ratio(const std::vector<TrialRecord>& records, const EvalParams& p) {
  auto means = algorithm_means(records);
  int total = 0, hits = 0;
  for (const auto& r : records) {
    if (r.method != "agent") continue;
    double alg = require_algo_mean(means, r.system_id);
    ++total;
    bool ok = p.sr_mode == SrMode::strict ? std::abs(r.e_min - alg) <= p.epsilon
                                          : r.e_min <= alg + p.epsilon;
    if (ok) ++hits;
  }
  if (total == 0)
    throw Error(ErrorKind::precondition, "no agent records to evaluate");
  return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

double ledr(const std::vector<TrialRecord>& records, const EvalParams& p) {
  auto means = algorithm_means(records);
  int total = 0, hits = 0;
  for (const auto& r : records) {
    if (r.method != "agent") continue;
    double alg = require_algo_mean(means, r.system_id);
    ++total;
    if (r.e_min <= alg - p.epsilon) ++hits;
  }
  if (total == 0)
    throw Error(ErrorKind::precondition, "no agent records to evaluate");
  return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

RsrReport rsr(const std::vector<TrialRecord>& records) {
  std::map<int, int> algo_counts;
  for (const auto& r : records) {
    if (r.method != "algorithm") continue;
    if (r.n_init <= 0)
      throw Error(ErrorKind::precondition,
                  "algorithm run for system " + std::to_string(r.system_id) +
                      " has no initial configurations");
    algo_counts[r.system_id] = r.n_init;
  }

  RsrReport report;
  std::map<int, std::pair<double, int>> per_system;
  for (const auto& r : records) {
    if (r.method != "agent") continue;
    auto it = algo_counts.find(r.system_id);
    if (it == algo_counts.end())
      throw Error(ErrorKind::precondition,
                  "no algorithm count for system " + std::to_string(r.system_id));
    double percent =
        100.0 * static_cast<double>(r.n_init) / static_cast<double>(it->second);
    report.per_run.push_back({r.system_id, r.run, percent});
    auto& [sum, count] = per_system[r.system_id];
    sum += percent;
    ++count;
  }
  if (report.per_run.empty())
    throw Error(ErrorKind::precondition, "no agent records to evaluate");

  double grand = 0.0;
  report.min_percent = report.per_run.front().percent;
  report.max_percent = report.per_run.front().percent;
  for (const auto& entry : report.per_run) {
    grand += entry.percent;
    report.min_percent = std::min(report.min_percent, entry.percent);
    report.max_percent = std::max(report.max_percent, entry.percent);
  }
  report.grand_mean = grand / static_cast<double>(report.per_run.size());
  for (const auto& [system, sc] : per_system)
    report.per_system_mean[system] = sc.first / static_cast<double>(sc.second);
  return report;
}

bool check_consistency(const std::array<std::vector<std::string>, 3>& arrays) {
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const auto& xs = arrays[static_cast<std::size_t>(a)];
      const auto& ys = arrays[static_cast<std::size_t>(b)];
      std::size_t la = xs.size(), lb = ys.size();
      std::size_t diff = la > lb ? la - lb : lb - la;
      if (diff > 1) return false;
      std::set<std::string> sa = as_set(xs), sb = as_set(ys);
      if (diff == 0) {
        if (sa != sb) return false;
      } else {
        const auto& small = la < lb ? sa : sb;
        const auto& big = la < lb ? sb : sa;
        if (!std::includes(big.begin(), big.end(), small.begin(), small.end()))
          return false;
      }
    }
  }
  return true;
}

ConsistencyReport consistency_ratio(const std::vector<SolutionTriple>& triples) {
  if (triples.empty())
    throw Error(ErrorKind::precondition, "no solution triples to evaluate");
  ConsistencyReport report;
  int surface_ok = 0, ads_ok = 0;
  for (const auto& t : triples) {
    bool sc = check_consistency(t.surface);
    bool ac = check_consistency(t.adsorbate);
    if (sc) ++surface_ok;
    if (ac) ++ads_ok;
    if (sc && ac) ++report.n_consistent;
  }
  double n = static_cast<double>(triples.size());
  report.total = 100.0 * report.n_consistent / n;
  report.surface_only = 100.0 * surface_ok / n;
  report.adsorbate_only = 100.0 * ads_ok / n;
  return report;
}

namespace {

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // data row r sits on file line r + 2
};

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::schema, "cannot open records file " + path);
  Csv csv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, ',');) {
      std::size_t begin = field.find_first_not_of(" \t");
      std::size_t end = field.find_last_not_of(" \t");
      fields.push_back(begin == std::string::npos
                           ? std::string()
                           : field.substr(begin, end - begin + 1));
    }
    if (csv.header.empty())
      csv.header = fields;
    else
      csv.rows.push_back(fields);
  }
  if (csv.header.empty())
    throw Error(ErrorKind::schema, path + " is empty; expected a CSV header");
  return csv;
}

std::size_t column(const Csv& csv, const std::string& path, const std::string& name) {
  for (std::size_t i = 0; i < csv.header.size(); ++i)
    if (csv.header[i] == name) return i;
  throw Error(ErrorKind::schema, path + " is missing column '" + name + "'");
}

double parse_number(const Csv& csv, std::size_t row, std::size_t col,
                    const std::string& path) {
  if (col >= csv.rows[row].size())
    throw Error(ErrorKind::schema,
                path + " row " + std::to_string(row + 2) + ": too few fields");
  const std::string& text = csv.rows[row][col];
  try {
    std::size_t used = 0;
    double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorKind::schema, path + " row " + std::to_string(row + 2) +
                                       ": '" + text + "' is not a number");
  }
}

int parse_int(const Csv& csv, std::size_t row, std::size_t col,
              const std::string& path) {
  double v = parse_number(csv, row, col, path);
  if (v != std::floor(v))
    throw Error(ErrorKind::schema, path + " row " + std::to_string(row + 2) +
                                       ": expected an integer");
  return static_cast<int>(v);
}

}  // namespace

std::vector<Table1Row> load_table1(const std::string& path) {
  Csv csv = read_csv(path);
  std::size_t c_id = column(csv, path, "system_id");
  std::size_t c_ads = column(csv, path, "adsorbate");
  std::size_t c_cat = column(csv, path, "catalyst");
  std::size_t c_am = column(csv, path, "agent_mean");
  std::size_t c_as = column(csv, path, "agent_std");
  std::size_t c_gm = column(csv, path, "algo_mean");
  std::size_t c_gs = column(csv, path, "algo_std");
  std::size_t c_an = column(csv, path, "agent_ninit_mean");
  std::size_t c_gn = column(csv, path, "algo_ninit");
  std::vector<Table1Row> rows;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    Table1Row row;
    row.system_id = parse_int(csv, r, c_id, path);
    row.adsorbate = csv.rows[r][c_ads];
    row.catalyst = csv.rows[r][c_cat];
    row.agent_mean = parse_number(csv, r, c_am, path);
    row.agent_std = parse_number(csv, r, c_as, path);
    row.algo_mean = parse_number(csv, r, c_gm, path);
    row.algo_std = parse_number(csv, r, c_gs, path);
    row.agent_ninit_mean = parse_number(csv, r, c_an, path);
    row.algo_ninit = parse_int(csv, r, c_gn, path);
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw Error(ErrorKind::schema, path + " has a header but no data rows");
  return rows;
}

std::vector<TableS1Row> load_table_s1(const std::string& path) {
  Csv csv = read_csv(path);
  std::size_t c_id = column(csv, path, "system_id");
  std::size_t c_run = column(csv, path, "run");
  std::size_t c_ae = column(csv, path, "agent_e");
  std::size_t c_an = column(csv, path, "agent_ninit");
  std::size_t c_gm = column(csv, path, "algo_mean");
  std::size_t c_gs = column(csv, path, "algo_std");
  std::size_t c_gn = column(csv, path, "algo_ninit");
  std::vector<TableS1Row> rows;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    TableS1Row row;
    row.system_id = parse_int(csv, r, c_id, path);
    row.run = parse_int(csv, r, c_run, path);
    row.agent_e = parse_number(csv, r, c_ae, path);
    row.agent_ninit = parse_int(csv, r, c_an, path);
    row.algo_mean = parse_number(csv, r, c_gm, path);
    row.algo_std = parse_number(csv, r, c_gs, path);
    row.algo_ninit = parse_int(csv, r, c_gn, path);
    rows.push_back(row);
  }
  if (rows.empty())
    throw Error(ErrorKind::schema, path + " has a header but no data rows");
  return rows;
}

std::vector<SolutionTriple> load_solutions(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const std::exception& e) {
    throw Error(ErrorKind::schema, path + ": " + e.what());
  }
  if (!doc.is_array() || doc.empty())
    throw Error(ErrorKind::schema, path + " must be a non-empty JSON array");
  std::vector<SolutionTriple> out;
  for (const auto& entry : doc) {
    SolutionTriple t;
    t.system_id = entry.at("system_id").get<int>();
    const auto& runs = entry.at("runs");
    if (!runs.is_array() || runs.size() != 3)
      throw Error(ErrorKind::schema,
                  path + ": system " + std::to_string(t.system_id) +
                      " needs exactly 3 runs");
    for (std::size_t r = 0; r < 3; ++r) {
      for (const auto& s : runs[r].at("surface"))
        t.surface[r].push_back(s.get<std::string>());
      for (const auto& s : runs[r].at("adsorbate"))
        t.adsorbate[r].push_back(s.get<std::string>());
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TrialRecord> records_from_table1(const std::vector<Table1Row>& rows) {
  std::vector<TrialRecord> records;
  for (const auto& row : rows) {
    records.push_back({row.system_id, "agent", 1, row.agent_mean,
                       static_cast<int>(std::lround(row.agent_ninit_mean))});
    records.push_back({row.system_id, "algorithm", 1, row.algo_mean, row.algo_ninit});
  }
  return records;
}

std::vector<TrialRecord> records_from_table_s1(const std::vector<TableS1Row>& rows) {
  std::vector<TrialRecord> records;
  std::set<int> seen;
  for (const auto& row : rows) {
    records.push_back({row.system_id, "agent", row.run, row.agent_e, row.agent_ninit});
    if (seen.insert(row.system_id).second)
      records.push_back({row.system_id, "algorithm", 1, row.algo_mean, row.algo_ninit});
  }
  return records;
}

}  // namespace adsorb
