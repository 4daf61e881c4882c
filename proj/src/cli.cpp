#include "adsorb/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "adsorb/agent.hpp"
#include "adsorb/assets.hpp"
#include "adsorb/element.hpp"
#include "adsorb/external_calc.hpp"
#include "adsorb/extxyz.hpp"
#include "adsorb/slab.hpp"

namespace adsorb {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::pair<std::string, int>> parse_formula(const std::string& formula) {
  std::vector<std::pair<std::string, int>> parts;
  std::size_t i = 0;
  while (i < formula.size()) {
    if (formula[i] < 'A' || formula[i] > 'Z')
      throw Error(ErrorKind::parse,
                  "cannot read catalyst formula '" + formula + "'");
    std::string symbol(1, formula[i++]);
    while (i < formula.size() && formula[i] >= 'a' && formula[i] <= 'z')
      symbol += formula[i++];
    int count = 0;
    while (i < formula.size() && formula[i] >= '0' && formula[i] <= '9')
      count = count * 10 + (formula[i++] - '0');
    parts.emplace_back(symbol, count == 0 ? 1 : count);
  }
  if (parts.empty())
    throw Error(ErrorKind::parse, "empty catalyst formula");
  return parts;
}

BulkSpec bulk_from_formula(const std::string& formula, const std::string& kind,
                           double a) {
  auto parts = parse_formula(formula);
  for (const auto& [symbol, count] : parts)
    if (!is_known_element(symbol))
      throw Error(ErrorKind::lookup,
                  "unknown element '" + symbol + "' in catalyst formula");
  BulkSpec bulk;
  bulk.a = a;
  if (parts.size() == 1) {
    bulk.element_a = parts[0].first;
    if (kind.empty() || kind == "fcc")
      bulk.kind = BulkKind::fcc;
    else if (kind == "bcc")
      bulk.kind = BulkKind::bcc;
    else if (kind == "l12")
      throw Error(ErrorKind::config, "an L1_2 bulk needs a two-element formula");
    else
      throw Error(ErrorKind::config, "unknown bulk kind '" + kind + "'");
  } else if (parts.size() == 2) {
    if (!kind.empty() && kind != "l12")
      throw Error(ErrorKind::config,
                  "a two-element catalyst builds an L1_2 bulk; '" + kind +
                      "' takes one element");
    bulk.kind = BulkKind::l12;
    // Majority species takes the face-center sublattice; ties keep the
    // order written in the formula.
    std::size_t major = parts[0].second >= parts[1].second ? 0 : 1;
    bulk.element_a = parts[major].first;
    bulk.element_b = parts[1 - major].first;
  } else {
    throw Error(ErrorKind::unsupported_input,
                "catalyst formulas with more than two elements are not supported");
  }
  return bulk;
}

Structure load_or_build_slab(const RunConfig& c, std::string* source) {
  if (!c.query.slab_path.empty()) {
    Structure slab = parse_extxyz_file(c.query.slab_path);
    validate_structure(slab);
    *source = c.query.slab_path;
    return slab;
  }
  if (c.query.catalyst_formula.empty())
    throw Error(ErrorKind::config, "run needs --catalyst or --slab");
  BulkSpec bulk = bulk_from_formula(c.query.catalyst_formula, c.bulk_kind,
                                    c.lattice_a);
  SlabMetadata meta;
  meta.bulk_formula = bulk.formula();
  meta.miller = c.query.miller;
  meta.layers = c.layers;
  meta.vacuum = c.vacuum;
  *source = "built";
  return build_slab(bulk, meta, c.nx, c.ny);
}

LlmConfig resolve_llm(const RunConfig& c) {
  LlmConfig llm = c.llm;
  if (!c.llm_spec.empty()) {
    if (c.llm_spec.rfind("mock:", 0) == 0)
      llm.mock_dir = c.llm_spec.substr(5);
    else
      llm.base_url = c.llm_spec;
  }
  if (!llm.mock_dir.empty() && !llm.base_url.empty())
    throw Error(ErrorKind::config,
                "mock fixtures and a live chat endpoint are mutually exclusive");
  return llm;
}

std::vector<RelaxationResult> relax_all(const std::vector<Configuration>& configs,
                                        const std::string& calc_spec,
                                        const CalcParams& params, double timeout_s,
                                        const FireParams& fire, int parallelism) {
  std::vector<RelaxationResult> results(configs.size());
  if (configs.empty()) return results;
  int n_workers = parallelism > 0
                      ? parallelism
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::clamp(n_workers, 1, static_cast<int>(configs.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        auto calc = make_calculator(calc_spec, params, timeout_s);
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= configs.size()) break;
          results[i] = relax(configs[i].structure, *calc, fire);
        }
      } catch (...) {
        failures[static_cast<std::size_t>(w)] = std::current_exception();
        next = configs.size();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  return results;
}

json solution_to_json(const Solution& sol, const BindingIndexArray& binding) {
  json j;
  j["site_type"] = to_string(sol.site_type);
  j["surface_binding_atoms"] = sol.surface_binding_atoms;
  j["adsorbate_binding_atoms"] = sol.adsorbate_binding_atoms;
  j["orientation"] = to_string(sol.orientation);
  j["reasoning"] = sol.reasoning;
  j["binding_indices"] = binding;
  return j;
}

json transcript_to_json(const std::vector<ChatMessage>& transcript) {
  json arr = json::array();
  for (const auto& m : transcript)
    arr.push_back({{"role", m.role}, {"content", m.content}});
  return arr;
}

json site_to_json(const Site& site) {
  json j;
  j["kind"] = to_string(site.kind);
  j["position"] = {site.position.x, site.position.y, site.position.z};
  j["parents"] = site.parents;
  j["elements"] = site.parent_elements;
  return j;
}

json config_snapshot(const RunConfig& c) {
  json snap;
  snap["strategy"] = c.strategy;
  snap["calculator"] = c.calculator;
  snap["seed"] = c.seed;
  snap["parallelism"] = c.parallelism;
  snap["random-count"] = c.random_count;
  snap["binding-index"] = c.binding_index;
  snap["fallback"] = c.fallback;
  snap["query"] = {{"adsorbate", c.query.adsorbate_key},
                   {"catalyst", c.query.catalyst_formula},
                   {"miller", c.query.miller},
                   {"slab", c.query.slab_path}};
  snap["slab"] = {{"bulk", c.bulk_kind},
                  {"lattice-a", c.lattice_a},
                  {"size", {c.nx, c.ny}},
                  {"layers", c.layers},
                  {"vacuum", c.vacuum}};
  snap["placement"] = {{"height", c.placement.height},
                       {"jitter", c.placement.jitter},
                       {"min-clearance", c.placement.min_clearance},
                       {"n-var", c.placement.n_var},
                       {"n-max", c.placement.n_max},
                       {"match-margin", c.placement.match_margin},
                       {"mass-weighted", c.placement.mass_weighted}};
  snap["fire"] = {{"fmax", c.fire.fmax},
                  {"max-steps", c.fire.max_steps},
                  {"dt-init", c.fire.dt_init},
                  {"dt-max", c.fire.dt_max},
                  {"max-step-length", c.fire.max_step_length}};
  snap["anomaly"] = {{"bond-factor", c.anomaly.bond_factor},
                     {"stretch-ratio", c.anomaly.stretch_ratio},
                     {"desorb-distance", c.anomaly.desorb_distance},
                     {"reconstruct-displacement", c.anomaly.reconstruct_displacement}};
  snap["llm"] = {{"model", c.llm.model},
                 {"base-url", c.llm.base_url},
                 {"mock-dir", c.llm.mock_dir},
                 {"max-retries", c.llm.max_retries},
                 {"timeout-s", c.llm.timeout_s},
                 {"use-critic", c.llm.use_llm_critic},
                 {"use-indexer", c.llm.use_llm_indexer}};
  return snap;
}

// Fingerprints of every input that shapes the run: parameter tables, the
// adsorbate geometry, prompt templates, mock fixtures, and a loaded slab.
json asset_hashes(const RunConfig& c, const LlmConfig& llm) {
  json hashes;
  hashes["lj_params.json"] = hex64(fnv1a64_file(asset_path("lj_params.json")));
  fs::path ads = c.query.adsorbate_key;
  if (!fs::exists(ads))
    ads = asset_path("adsorbates/" + c.query.adsorbate_key + ".extxyz");
  hashes["adsorbate"] = hex64(fnv1a64_file(ads));
  fs::path prompts = asset_path("prompts");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(prompts))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files)
    hashes["prompts/" + f.filename().string()] = hex64(fnv1a64_file(f));
  if (!llm.mock_dir.empty()) {
    files.clear();
    for (const auto& entry : fs::directory_iterator(llm.mock_dir))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      hashes["mock/" + f.filename().string()] = hex64(fnv1a64_file(f));
  }
  if (!c.query.slab_path.empty())
    hashes["slab"] = hex64(fnv1a64_file(c.query.slab_path));
  return hashes;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::config, "cannot write " + path.string());
  out << content;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::all_filtered:
      return 2;
    case ErrorKind::agent_failure:
    case ErrorKind::planner_failure:
      return 3;
    default:
      return 1;
  }
}

RunSummary cmd_run(const RunConfig& config, std::ostream& out, ReferenceCache* cache) {
  auto t0 = std::chrono::steady_clock::now();
  if (config.strategy != "agent" && config.strategy != "heuristic" &&
      config.strategy != "random" && config.strategy != "all")
    throw Error(ErrorKind::config, "unknown strategy '" + config.strategy + "'");
  if (config.fallback != "error" && config.fallback != "heuristic")
    throw Error(ErrorKind::config, "unknown fallback policy '" + config.fallback + "'");

  std::string slab_source;
  Structure slab = load_or_build_slab(config, &slab_source);
  AdsorbateSpec ads = adsorbate_from_registry(config.query.adsorbate_key);
  CalcParams calc_params = default_calc_params();
  LlmConfig llm = resolve_llm(config);

  std::string strategy_used = config.strategy;
  Solution solution;
  BindingIndexArray binding;
  std::vector<ChatMessage> transcript;
  bool have_solution = false;

  std::vector<Configuration> configs;
  if (config.strategy == "agent") {
    auto transport = make_chat_transport(llm);
    try {
      AgentOutcome outcome = run_agent_loop(config.query, slab, ads, *transport, llm);
      solution = outcome.solution;
      binding = outcome.binding;
      transcript = outcome.transcript;
      have_solution = true;
    } catch (const Error& e) {
      bool agent_broke = e.kind() == ErrorKind::agent_failure ||
                         e.kind() == ErrorKind::planner_failure;
      if (!agent_broke || config.fallback != "heuristic") throw;
      out << "agent failed (" << e.what() << "); falling back to heuristic placement\n";
      strategy_used = "heuristic";
    }
    if (have_solution)
      configs = generate_configurations(slab, ads, solution, binding, config.seed,
                                        config.placement);
  }
  if (strategy_used == "heuristic" || strategy_used == "all")
    configs = generate_heuristic(slab, ads, config.binding_index, config.seed,
                                 config.placement);
  if (strategy_used == "random" || strategy_used == "all") {
    auto extra = generate_random(slab, ads, config.random_count, config.seed,
                                 config.placement);
    configs.insert(configs.end(), extra.begin(), extra.end());
    for (std::size_t i = 0; i < configs.size(); ++i) configs[i].id = i;
  }
  if (configs.empty())
    throw Error(ErrorKind::placement_failure, "no initial configurations generated");

  std::vector<RelaxationResult> results =
      relax_all(configs, config.calculator, calc_params, config.calc_timeout_s,
                config.fire, config.parallelism);
  for (std::size_t i = 0; i < results.size(); ++i)
    results[i].anomalies =
        detect_anomalies(configs[i].structure, results[i].final, config.anomaly);

  auto ref_calc = make_calculator(config.calculator, calc_params, config.calc_timeout_s);
  std::string cache_key = config.calculator + "|" +
                          hex64(fnv1a64(write_extxyz(slab))) + "|" + ads.key;
  ReferenceEnergies refs =
      reference_energies(slab, ads, *ref_calc, config.fire, cache, cache_key);
  AdsorptionRecord rec = adsorption_energy(results, refs.e_slab, refs.e_gas);

  json report;
  report["system"] = {{"adsorbate", ads.key},
                      {"catalyst", config.query.catalyst_formula},
                      {"miller", config.query.miller},
                      {"slab_source", slab_source},
                      {"n_slab_atoms", slab.size()},
                      {"surface", surface_summary(slab)},
                      {"calculator", config.calculator}};
  report["solution"] = have_solution ? solution_to_json(solution, binding) : json();
  report["transcript"] = transcript_to_json(transcript);
  json configurations = json::array();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& r = results[i];
    json entry;
    entry["id"] = configs[i].id;
    entry["strategy"] = configs[i].provenance.strategy;
    entry["seed"] = configs[i].provenance.seed;
    entry["variant"] = configs[i].provenance.variant;
    entry["site"] = site_to_json(configs[i].provenance.site);
    entry["status"] = to_string(r.status);
    entry["steps"] = r.steps;
    entry["energy"] = r.energy;
    entry["max_force"] = r.max_force;
    entry["delta_e"] = rec.delta_e[i];
    entry["anomalies"] = {{"dissociated", r.anomalies.dissociated},
                          {"desorbed", r.anomalies.desorbed},
                          {"reconstructed", r.anomalies.reconstructed}};
    if (!r.diagnostic.empty()) entry["diagnostic"] = r.diagnostic;
    configurations.push_back(std::move(entry));
  }
  report["configurations"] = std::move(configurations);
  report["delta_e"] = rec.delta_e;
  report["delta_e_ads"] = rec.delta_e_ads;
  report["argmin"] = rec.argmin;
  report["n_init"] = configs.size();
  report["seed"] = config.seed;
  report["references"] = {{"e_slab", refs.e_slab}, {"e_gas", refs.e_gas}};
  report["counts"] = {{"valid", rec.n_valid}, {"anomalous", rec.n_anomalous}};
  report["config"] = config_snapshot(config);
  report["assets"] = asset_hashes(config, llm);
  report["versions"] = {{"adsorb", kVersion}, {"report_format", 1}};
  if (!config.no_timestamps) {
    report["timestamp"] = utc_timestamp();
    report["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  fs::path dir = config.out_dir;
  fs::create_directories(dir);
  fs::path report_path = dir / "report.json";
  write_file(report_path, report.dump(2) + "\n");
  ExtxyzWriteOptions best_opts;
  best_opts.always_tags = true;
  best_opts.extra_keys["config_id"] = std::to_string(configs[rec.argmin].id);
  write_extxyz_file(dir / "best.extxyz", results[rec.argmin].final, best_opts);
  write_file(dir / "transcript.json", transcript_to_json(transcript).dump(2) + "\n");

  std::size_t n_failed = 0;
  for (const auto& r : results)
    if (r.status != RelaxStatus::converged) ++n_failed;
  out << "strategy: " << strategy_used << "\n";
  out << "n_init: " << configs.size() << "\n";
  out << "relaxed: " << (results.size() - n_failed) << " converged, "
      << rec.n_anomalous << " anomalous, " << n_failed << " failed\n";
  out << std::fixed << std::setprecision(6);
  out << "delta_e_ads: " << rec.delta_e_ads << " eV (configuration "
      << configs[rec.argmin].id << ")\n";
  out << "wrote " << report_path.string() << "\n";

  RunSummary summary;
  summary.strategy = strategy_used;
  summary.delta_e_ads = rec.delta_e_ads;
  summary.argmin = rec.argmin;
  summary.n_init = configs.size();
  summary.n_valid = rec.n_valid;
  summary.n_anomalous = rec.n_anomalous;
  summary.report_path = report_path.string();
  return summary;
}

void cmd_evaluate(const EvaluateConfig& config, std::ostream& out) {
  std::string text = read_text_file(config.records_path);
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos)
    throw Error(ErrorKind::schema, config.records_path + " is empty");

  json doc;
  if (text[first] == '[') {
    auto triples = load_solutions(config.records_path);
    ConsistencyReport rep = consistency_ratio(triples);
    out << "format: solutions (" << triples.size() << " systems)\n";
    out << std::fixed << std::setprecision(1);
    out << "consistency: " << rep.total << "% (" << rep.n_consistent << "/"
        << triples.size() << " systems)\n";
    out << "  surface:   " << rep.surface_only << "%\n";
    out << "  adsorbate: " << rep.adsorbate_only << "%\n";
    doc["format"] = "solutions";
    doc["records"] = config.records_path;
    doc["n_systems"] = triples.size();
    doc["consistency"] = {{"total", rep.total},
                          {"surface", rep.surface_only},
                          {"adsorbate", rep.adsorbate_only},
                          {"n_consistent", rep.n_consistent}};
    out << doc.dump(2) << "\n";
    return;
  }

  std::string header = text.substr(first, text.find('\n', first) - first);
  std::vector<TrialRecord> records;
  std::string format;
  std::size_t n_systems = 0;
  if (header.find("agent_mean") != std::string::npos) {
    auto rows = load_table1(config.records_path);
    records = records_from_table1(rows);
    n_systems = rows.size();
    format = "table1";
  } else if (header.find("agent_e") != std::string::npos) {
    auto rows = load_table_s1(config.records_path);
    records = records_from_table_s1(rows);
    std::set<int> ids;
    for (const auto& row : rows) ids.insert(row.system_id);
    n_systems = ids.size();
    format = "tableS1";
  } else {
    throw Error(ErrorKind::schema,
                config.records_path + ": unrecognized records header '" + header + "'");
  }

  EvalParams lenient = config.eval;
  lenient.sr_mode = SrMode::lenient;
  EvalParams strict = config.eval;
  strict.sr_mode = SrMode::strict;
  double sr_lenient = success_ratio(records, lenient);
  double sr_strict = success_ratio(records, strict);
  double led = ledr(records, config.eval);
  RsrReport r = rsr(records);

  out << "format: " << format << " (" << n_systems << " systems)\n";
  out << std::fixed << std::setprecision(1);
  out << "SR (lenient): " << sr_lenient << "%\n";
  out << "SR (strict):  " << sr_strict << "%\n";
  out << "LEDR: " << led << "%\n";
  out << "RSR: mean " << r.grand_mean << "% (min " << r.min_percent << "%, max "
      << r.max_percent << "%)\n";
  out << "RSR per system (mean over runs):\n";
  for (const auto& [system, mean] : r.per_system_mean)
    out << "  " << std::setw(3) << system << ": " << mean << "%\n";

  doc["format"] = format;
  doc["records"] = config.records_path;
  doc["n_systems"] = n_systems;
  doc["epsilon"] = config.eval.epsilon;
  doc["sr_lenient"] = sr_lenient;
  doc["sr_strict"] = sr_strict;
  doc["ledr"] = led;
  json per_run = json::array();
  for (const auto& entry : r.per_run)
    per_run.push_back({{"system_id", entry.system_id},
                       {"run", entry.run},
                       {"percent", entry.percent}});
  json per_system = json::object();
  for (const auto& [system, mean] : r.per_system_mean)
    per_system[std::to_string(system)] = mean;
  doc["rsr"] = {{"grand_mean", r.grand_mean},
                {"min", r.min_percent},
                {"max", r.max_percent},
                {"per_system_mean", std::move(per_system)},
                {"per_run", std::move(per_run)}};
  out << doc.dump(2) << "\n";
}

void cmd_enumerate(const EnumerateConfig& config, std::ostream& out) {
  Structure slab = parse_extxyz_file(config.slab_path);
  validate_structure(slab);
  Triangulation tri = triangulate_surface(slab, config.layer_window);
  std::vector<Site> sites = enumerate_heuristic_sites(slab, config.layer_window);
  std::map<std::string, int> counts{{"ontop", 0}, {"bridge", 0}, {"hollow", 0}};
  json listed = json::array();
  for (const auto& site : sites) {
    ++counts[to_string(site.kind)];
    listed.push_back(site_to_json(site));
  }
  json doc;
  doc["slab"] = config.slab_path;
  doc["surface_atoms"] = tri.vertices.size();
  doc["cell_area"] = tri.cell_area;
  doc["counts"] = counts;
  doc["sites"] = std::move(listed);
  out << doc.dump(2) << "\n";
}

void cmd_relax(const RelaxConfig& config, std::ostream& out) {
  Structure s = parse_extxyz_file(config.in_path);
  validate_structure(s);
  CalcParams params = default_calc_params();
  auto calc = make_calculator(config.calculator, params, config.calc_timeout_s);
  RelaxationResult res = relax(s, *calc, config.fire);
  out << "status: " << to_string(res.status) << "\n";
  out << "steps: " << res.steps << "\n";
  out << std::fixed << std::setprecision(6);
  out << "energy: " << res.energy << " eV\n";
  out << "max_force: " << res.max_force << " eV/A\n";
  if (!res.diagnostic.empty()) out << "diagnostic: " << res.diagnostic << "\n";
  if (!config.out_path.empty()) {
    ExtxyzWriteOptions opts;
    opts.always_tags = true;
    write_extxyz_file(config.out_path, res.final, opts);
    out << "wrote " << config.out_path << "\n";
  }
}

void cmd_build_slab(const BuildSlabConfig& config, std::ostream& out) {
  if (config.catalyst.empty())
    throw Error(ErrorKind::config, "build-slab needs --catalyst");
  BulkSpec bulk =
      bulk_from_formula(config.catalyst, config.bulk_kind, config.lattice_a);
  SlabMetadata meta;
  meta.bulk_formula = bulk.formula();
  meta.miller = config.miller;
  meta.layers = config.layers;
  meta.vacuum = config.vacuum;
  Structure slab = build_slab(bulk, meta, config.nx, config.ny);
  ExtxyzWriteOptions opts;
  opts.always_tags = true;
  write_extxyz_file(config.out_path, slab, opts);
  out << "wrote " << config.out_path << " (" << slab.size() << " atoms, "
      << bulk.formula() << "(" << config.miller[0] << config.miller[1]
      << config.miller[2] << ") " << config.nx << "x" << config.ny << "x"
      << config.layers << ")\n";
}

}  // namespace adsorb
