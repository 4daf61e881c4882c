#include <doctest.h>

#include <adsorb/adsorbate.hpp>
#include <adsorb/agent.hpp>
#include <adsorb/calculator.hpp>
#include <adsorb/chat.hpp>
#include <adsorb/cli.hpp>
#include <adsorb/eval.hpp>
#include <adsorb/external_calc.hpp>
#include <adsorb/relax.hpp>
#include <adsorb/rng.hpp>
#include <adsorb/sites.hpp>
#include <adsorb/solution.hpp>
#include <adsorb/structure.hpp>

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers.hpp"

using namespace adsorb;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[acceptance] criterion %d: %s (%s)\n", criterion,
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string mocks_dir(const std::string& name) {
  return (testutil::repo_root() / "fixtures" / "mocks" / name).string();
}

std::vector<TrialRecord> benchmark_records() {
  return records_from_table1(load_table1(testutil::fixture_path("table1.csv")));
}

std::vector<TrialRecord> per_run_records() {
  return records_from_table_s1(load_table_s1(testutil::fixture_path("tableS1.csv")));
}

Structure jittered_box(std::uint64_t seed, std::size_t n, double box, double spacing) {
  SplitMix64 rng{seed};
  Structure s;
  s.lattice.cell = Mat3::identity();
  for (int i = 0; i < 3; ++i) s.lattice.cell.m[i][i] = box;
  s.lattice.pbc = {true, true, true};
  const char* symbols[] = {"H", "O", "Cu", "Pt"};
  std::size_t k = 0;
  for (int ix = 0; ix < 3 && k < n; ++ix)
    for (int iy = 0; iy < 3 && k < n; ++iy)
      for (int iz = 0; iz < 3 && k < n; ++iz, ++k) {
        Vec3 p{ix * spacing + rng.uniform(-0.4, 0.4),
               iy * spacing + rng.uniform(-0.4, 0.4),
               iz * spacing + rng.uniform(-0.4, 0.4)};
        s.atoms.push_back(make_atom(symbols[k % 4], p));
      }
  return s;
}

// Slab plus an O-H adsorbate standing on the highest surface atom; the O-H
// axis points along z so later displacements stay clear of in-plane images.
Structure slab_with_upright_oh() {
  Structure s = testutil::pt111_slab();
  std::size_t top = 0;
  for (std::size_t i = 1; i < s.atoms.size(); ++i)
    if (s.atoms[i].position.z > s.atoms[top].position.z) top = i;
  Vec3 o_pos = s.atoms[top].position + Vec3{0.0, 0.0, 2.0};
  s.atoms.push_back(make_atom("O", o_pos, kTagAdsorbate));
  s.atoms.push_back(make_atom("H", o_pos + Vec3{0.0, 0.0, 0.97}, kTagAdsorbate));
  return s;
}

std::string serialize_outcome(const AgentOutcome& outcome) {
  json doc;
  doc["site_type"] = to_string(outcome.solution.site_type);
  doc["surface_binding_atoms"] = outcome.solution.surface_binding_atoms;
  doc["adsorbate_binding_atoms"] = outcome.solution.adsorbate_binding_atoms;
  doc["orientation"] = to_string(outcome.solution.orientation);
  doc["binding"] = outcome.binding;
  json transcript = json::array();
  for (const auto& m : outcome.transcript)
    transcript.push_back({{"role", m.role}, {"content", m.content}});
  doc["transcript"] = std::move(transcript);
  return doc.dump();
}

}  // namespace

TEST_CASE("criterion 1: lower energy discovery over the benchmark table") {
  auto t0 = Clock::now();
  double led = ledr(benchmark_records(), EvalParams{});
  double elapsed = seconds_since(t0);

  std::ostringstream detail;
  detail << std::fixed << std::setprecision(1) << "LEDR " << led << "% in "
         << std::setprecision(3) << elapsed << " s";
  bool pass = led == 35.0 && elapsed < 1.0;
  report(1, pass, detail.str());

  CHECK(led == 35.0);
  CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 2: relaxation savings over the per run table") {
  auto t0 = Clock::now();
  RsrReport r = rsr(per_run_records());
  double elapsed = seconds_since(t0);

  const RsrEntry* lowest = &r.per_run.front();
  const RsrEntry* highest = &r.per_run.front();
  for (const auto& entry : r.per_run) {
    if (entry.percent < lowest->percent) lowest = &entry;
    if (entry.percent > highest->percent) highest = &entry;
  }

  bool min_ok = r.min_percent == doctest::Approx(100.0 * 4.0 / 59.0).epsilon(1e-12) &&
                lowest->system_id == 1 && lowest->run == 2;
  bool max_ok = r.max_percent == doctest::Approx(100.0 * 42.0 / 66.0).epsilon(1e-12) &&
                highest->system_id == 15 && highest->run == 1;
  bool mean_ok = std::abs(r.grand_mean - 26.9) <= 0.5;
  bool time_ok = elapsed < 1.0;

  std::ostringstream detail;
  detail << std::fixed << std::setprecision(1) << "min " << r.min_percent
         << "% max " << r.max_percent << "%; recomputed grand mean "
         << std::setprecision(6) << r.grand_mean
         << "% vs published band 26.9 +/- 0.5";
  report(2, min_ok && max_ok && mean_ok && time_ok, detail.str());

  CHECK(r.min_percent == doctest::Approx(100.0 * 4.0 / 59.0).epsilon(1e-12));
  CHECK(lowest->system_id == 1);
  CHECK(lowest->run == 2);
  CHECK(r.max_percent == doctest::Approx(100.0 * 42.0 / 66.0).epsilon(1e-12));
  CHECK(highest->system_id == 15);
  CHECK(highest->run == 1);
  // The per-run table reproduces every published per-system entry, yet its
  // grand mean lands at 28.1%, outside the published 26.9 +/- 0.5 band. The
  // recomputed value is kept here so the discrepancy stays visible.
  CHECK(std::abs(r.grand_mean - 26.9) <= 0.5);
  CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 3: success ratios over the benchmark table") {
  auto records = benchmark_records();
  EvalParams lenient;
  lenient.sr_mode = SrMode::lenient;
  EvalParams strict;
  strict.sr_mode = SrMode::strict;

  double sr_lenient = success_ratio(records, lenient);
  double sr_strict = success_ratio(records, strict);

  std::set<int> failing;
  for (int system = 1; system <= 20; ++system) {
    std::vector<TrialRecord> subset;
    for (const auto& rec : records)
      if (rec.system_id == system) subset.push_back(rec);
    if (success_ratio(subset, lenient) < 100.0) failing.insert(system);
  }

  bool pass = sr_lenient == 85.0 && sr_strict == 50.0 &&
              failing == std::set<int>{1, 15, 16};
  std::ostringstream detail;
  detail << std::fixed << std::setprecision(1) << "lenient " << sr_lenient
         << "% strict " << sr_strict << "%, lenient misses systems";
  for (int system : failing) detail << " " << system;
  report(3, pass, detail.str());

  CHECK(sr_lenient == 85.0);
  CHECK(sr_strict == 50.0);
  CHECK(failing == std::set<int>{1, 15, 16});
}

TEST_CASE("criterion 4: consistency rule and ratio over the solution fixtures") {
  bool equal_sets = check_consistency({{{"Pt", "Pt", "Cu"},
                                        {"Cu", "Pt", "Pt"},
                                        {"Pt", "Cu", "Pt"}}});
  bool different_sets = check_consistency({{{"Pt", "Pt", "Pt"},
                                            {"Pt", "Pt", "Cu"},
                                            {"Pt", "Pt", "Pt"}}});
  bool off_by_one = check_consistency({{{"Mo", "Mo", "Pd"},
                                        {"Mo", "Pd"},
                                        {"Mo", "Mo", "Pd"}}});
  bool length_gap = check_consistency({{{"Pt", "Pt", "Pt"},
                                        {"Pt"},
                                        {"Pt", "Pt", "Pt"}}});

  auto triples = load_solutions(testutil::fixture_path("solutions.json"));
  ConsistencyReport rep = consistency_ratio(triples);

  bool pass = equal_sets && !different_sets && off_by_one && !length_gap &&
              rep.total == 85.0 && rep.n_consistent == 17;
  std::ostringstream detail;
  detail << std::fixed << std::setprecision(1) << "rule cases "
         << (equal_sets && !different_sets && off_by_one && !length_gap ? "ok" : "broken")
         << ", ratio " << rep.total << "% (" << rep.n_consistent << "/"
         << triples.size() << ")";
  report(4, pass, detail.str());

  CHECK(equal_sets);
  CHECK(!different_sets);
  CHECK(off_by_one);
  CHECK(!length_gap);
  CHECK(rep.total == 85.0);
  CHECK(rep.n_consistent == 17);
}

TEST_CASE("criterion 5: guided run matches the exhaustive heuristic cheaply") {
  auto t0 = Clock::now();
  testutil::TempDir tmp("accept-run");

  RunConfig base;
  base.query.adsorbate_key = "H";
  base.query.catalyst_formula = "Pt";
  base.seed = 7;
  base.parallelism = 1;
  base.no_timestamps = true;
  base.placement.match_margin = 0.5;
  base.fire.fmax = 1e-4;
  base.fire.max_steps = 5000;

  RunConfig heuristic = base;
  heuristic.strategy = "heuristic";
  heuristic.out_dir = (tmp.path / "heuristic").string();
  RunConfig agent = base;
  agent.strategy = "agent";
  agent.llm_spec = "mock:" + mocks_dir("pt111-h");
  agent.out_dir = (tmp.path / "agent").string();

  ReferenceCache cache;
  std::ostringstream sink;
  RunSummary exhaustive = cmd_run(heuristic, sink, &cache);
  RunSummary guided = cmd_run(agent, sink, &cache);

  double elapsed = seconds_since(t0);
  double diff = std::abs(guided.delta_e_ads - exhaustive.delta_e_ads);
  double fraction = static_cast<double>(guided.n_init) /
                    static_cast<double>(exhaustive.n_init);

  bool pass = exhaustive.n_init == 24 && guided.n_init == 8 && fraction <= 0.4 &&
              diff <= 1e-6 && elapsed < 30.0;
  std::ostringstream detail;
  detail << std::scientific << std::setprecision(2) << "delta gap " << diff
         << " eV, " << guided.n_init << "/" << exhaustive.n_init
         << " configurations, " << std::fixed << std::setprecision(1) << elapsed
         << " s";
  report(5, pass, detail.str());

  CHECK(exhaustive.n_init == 24);
  CHECK(guided.n_init == 8);
  CHECK(fraction <= 0.4);
  CHECK(diff <= 1e-6);
  CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 6: dimer minimum and finite difference forces") {
  CalcParams table = default_calc_params();
  double sigma = table.elements.at("H").sigma;
  double eps = table.elements.at("H").epsilon;

  Structure dimer = testutil::open_box_dimer("H", 1.3 * sigma);
  LjCalculator calc(table);
  FireParams fire;
  fire.fmax = 1e-6;
  fire.max_steps = 100000;
  RelaxationResult res = relax(dimer, calc, fire);

  double d = (res.final.atoms[1].position - res.final.atoms[0].position).norm();
  double d_err = std::abs(d - std::pow(2.0, 1.0 / 6.0) * sigma);
  double e_err = std::abs(res.energy - (-eps));

  double worst_fd = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Structure box = jittered_box(seed, 20, 12.0, 4.0);
    worst_fd = std::max(worst_fd, numerical_force_check(box, table, 1e-5));
  }

  bool pass = res.status == RelaxStatus::converged && d_err <= 1e-3 &&
              e_err <= 1e-4 && worst_fd <= 1e-5;
  std::ostringstream detail;
  detail << std::scientific << std::setprecision(2) << "distance error " << d_err
         << " A, energy error " << e_err << " eV, worst FD gap " << worst_fd
         << " eV/A over 10 seeds";
  report(6, pass, detail.str());

  CHECK(res.status == RelaxStatus::converged);
  CHECK(d_err <= 1e-3);
  CHECK(e_err <= 1e-4);
  CHECK(worst_fd <= 1e-5);
}

TEST_CASE("criterion 7: area weighted sampling over a two triangle surface") {
  std::vector<std::array<Vec3, 3>> triangles = {
      {Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}},
      {Vec3{2, 0, 0}, Vec3{4, 0, 0}, Vec3{2, 2, 0}},
  };
  const std::size_t n = 10000;
  SplitMix64 rng{20240817};
  std::vector<std::size_t> picked;
  std::vector<Vec3> points = sample_in_triangles(triangles, n, rng, &picked);

  std::array<std::size_t, 2> counts{0, 0};
  std::size_t inside = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++counts[picked[i]];
    const auto& tri = triangles[picked[i]];
    Vec3 v0 = tri[1] - tri[0];
    Vec3 v1 = tri[2] - tri[0];
    Vec3 v2 = points[i] - tri[0];
    double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
    double d20 = v2.dot(v0), d21 = v2.dot(v1);
    double denom = d00 * d11 - d01 * d01;
    double v = (d11 * d20 - d01 * d21) / denom;
    double w = (d00 * d21 - d01 * d20) / denom;
    if (v >= -1e-9 && w >= -1e-9 && v + w <= 1.0 + 1e-9 &&
        std::abs(points[i].z) < 1e-12)
      ++inside;
  }

  // Areas 0.5 and 2.0 give expected counts 2000 and 8000; one degree of
  // freedom, so chi-square below 6.635 keeps p above 0.01.
  std::array<double, 2> expected{n * 0.2, n * 0.8};
  double chi2 = 0.0;
  for (int t = 0; t < 2; ++t) {
    double delta = static_cast<double>(counts[t]) - expected[t];
    chi2 += delta * delta / expected[t];
  }

  bool pass = points.size() == n && inside == n && chi2 < 6.635;
  std::ostringstream detail;
  detail << "counts " << counts[0] << "/" << counts[1] << ", chi-square "
         << std::fixed << std::setprecision(3) << chi2 << ", " << inside << "/"
         << n << " inside their triangle";
  report(7, pass, detail.str());

  CHECK(points.size() == n);
  CHECK(inside == n);
  CHECK(chi2 < 6.635);
}

TEST_CASE("criterion 8: agent loop reproducibility and coherence") {
  Structure slab = testutil::pt111_slab();
  AdsorbateSpec ads = adsorbate_from_registry("H");
  Query query;
  query.adsorbate_key = "H";
  query.catalyst_formula = "Pt";
  LlmConfig llm;
  llm.mock_dir = mocks_dir("pt111-h");

  MockChat first(llm.mock_dir);
  MockChat second(llm.mock_dir);
  AgentOutcome outcome_a = run_agent_loop(query, slab, ads, first, llm);
  AgentOutcome outcome_b = run_agent_loop(query, slab, ads, second, llm);
  std::string bytes_a = serialize_outcome(outcome_a);
  std::string bytes_b = serialize_outcome(outcome_b);

  CritiqueVerdict verdict = critique(outcome_a.solution, surface_element_set(slab),
                                     ads, nullptr, llm, false);

  LlmConfig retry_llm = llm;
  retry_llm.mock_dir = mocks_dir("reject-then-accept");
  MockChat retry(retry_llm.mock_dir);
  AgentOutcome recovered = run_agent_loop(query, slab, ads, retry, retry_llm);

  bool pass = bytes_a == bytes_b && verdict.accepted &&
              verdict.violations.empty() && retry.total_calls() == 2 &&
              !recovered.binding.empty();
  std::ostringstream detail;
  detail << (bytes_a == bytes_b ? "identical bytes across two runs"
                                : "runs diverged")
         << ", rules " << (verdict.accepted ? "satisfied" : "violated")
         << ", recovery used " << retry.total_calls() << " planner calls";
  report(8, pass, detail.str());

  CHECK(bytes_a == bytes_b);
  CHECK(verdict.accepted);
  CHECK(verdict.violations.empty());
  CHECK(retry.total_calls() == 2);
  CHECK(to_string(recovered.solution.site_type) == std::string("hollow"));
}

TEST_CASE("criterion 9: external transports behave like local ones and fail loudly") {
  CalcParams table = default_calc_params();
  Structure start = testutil::pt111_slab();
  start.atoms.push_back(make_atom(
      "H", start.atoms[8].position + Vec3{0.3, 0.2, 2.0}, kTagAdsorbate));

  LjCalculator local(table);
  RelaxationResult in_process = relax(start, local, FireParams{}, true);
  auto remote_calc = make_calculator(
      "subprocess:" + std::string(ADSORB_LJ_STUB_PATH), table, 60.0);
  RelaxationResult remote = relax(start, *remote_calc, FireParams{}, true);

  double worst_step = 1.0;
  bool traj_ok = in_process.trajectory.size() == remote.trajectory.size() &&
                 in_process.status == remote.status;
  if (traj_ok) {
    worst_step = 0.0;
    for (std::size_t i = 0; i < in_process.trajectory.size(); ++i)
      worst_step = std::max(worst_step,
                            std::abs(in_process.trajectory[i].second -
                                     remote.trajectory[i].second));
  }

  httplib::Server server;
  server.Post("/denied/chat/completions",
              [](const httplib::Request&, httplib::Response& res) {
                res.status = 401;
                res.set_content("{}", "application/json");
              });
  server.Post("/slow/chat/completions",
              [](const httplib::Request&, httplib::Response& res) {
                std::this_thread::sleep_for(std::chrono::milliseconds(900));
                res.set_content("{}", "application/json");
              });
  server.Post("/junk/chat/completions",
              [](const httplib::Request&, httplib::Response& res) {
                res.set_content("not json at all", "application/json");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  std::string base = "http://127.0.0.1:" + std::to_string(port);
  std::vector<ChatMessage> ping{{"user", "ping"}};
  auto probe = [&](const std::string& prefix, double timeout_s) {
    LlmConfig llm;
    llm.base_url = base + prefix;
    llm.api_key = "test-key";
    llm.max_retries = 1;
    llm.timeout_s = timeout_s;
    llm.backoff_s = 0.01;
    return testutil::catch_error([&] {
      HttpChatClient client(llm);
      client.chat(ping);
    });
  };
  auto denied = probe("/denied", 5.0);
  auto slow = probe("/slow", 0.2);
  auto junk = probe("/junk", 5.0);
  server.stop();
  worker.join();

  bool chat_ok = denied.kind == ErrorKind::auth && slow.kind == ErrorKind::timeout &&
                 junk.kind == ErrorKind::schema;
  bool pass = traj_ok && worst_step <= 1e-10 && chat_ok;
  std::ostringstream detail;
  detail << std::scientific << std::setprecision(2) << "worst per step gap "
         << worst_step << " eV over " << in_process.trajectory.size()
         << " frames; chat errors "
         << to_string(denied.kind) << "/" << to_string(slow.kind) << "/"
         << to_string(junk.kind);
  report(9, pass, detail.str());

  CHECK(traj_ok);
  CHECK(worst_step <= 1e-10);
  CHECK(denied.kind == ErrorKind::auth);
  CHECK(slow.kind == ErrorKind::timeout);
  CHECK(junk.kind == ErrorKind::schema);
}

TEST_CASE("criterion 10: anomaly screens separate clean desorbed and dissociated") {
  Structure initial = slab_with_upright_oh();
  AnomalyParams params;

  AnomalyFlags clean = detect_anomalies(initial, initial, params);

  Structure translated = initial;
  for (std::size_t i = translated.size() - 2; i < translated.size(); ++i)
    translated.atoms[i].position += Vec3{0.0, 0.0, 10.0};
  AnomalyFlags desorbed = detect_anomalies(initial, translated, params);

  Structure stretched = initial;
  std::size_t o_index = stretched.size() - 2;
  stretched.atoms.back().position =
      stretched.atoms[o_index].position + Vec3{0.0, 0.0, 3.0};
  AnomalyFlags dissociated = detect_anomalies(initial, stretched, params);

  bool clean_ok = !clean.dissociated && !clean.desorbed && !clean.reconstructed;
  bool desorb_ok = desorbed.desorbed && !desorbed.dissociated;
  bool dissoc_ok = dissociated.dissociated && !dissociated.desorbed;
  bool pass = clean_ok && desorb_ok && dissoc_ok;

  std::ostringstream detail;
  detail << "identity " << (clean_ok ? "clean" : "flagged") << ", +10 A "
         << (desorbed.desorbed ? "desorbed" : "missed") << ", O-H 0.97->3.0 A "
         << (dissociated.dissociated ? "dissociated" : "missed");
  report(10, pass, detail.str());

  CHECK(clean_ok);
  CHECK(desorb_ok);
  CHECK(dissoc_ok);
}
