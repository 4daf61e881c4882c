#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "adsorb/adsorbate.hpp"
#include "adsorb/agent.hpp"
#include "adsorb/chat.hpp"
#include "adsorb/errors.hpp"
#include "adsorb/slab.hpp"
#include "adsorb/solution.hpp"
#include "helpers.hpp"

using namespace adsorb;
using testutil::catch_error;
using testutil::pt111_slab;
using testutil::TempDir;
using testutil::write_file;

namespace {

Solution hollow_h_solution() {
  Solution sol;
  sol.site_type = SiteKind::hollow;
  sol.surface_binding_atoms = {"Pt", "Pt", "Pt"};
  sol.adsorbate_binding_atoms = {"H"};
  sol.orientation = Orientation::end_on;
  return sol;
}

Query h_on_pt() {
  Query q;
  q.adsorbate_key = "H";
  q.catalyst_formula = "Pt";
  return q;
}

Structure mo3pd_slab() {
  BulkSpec bulk;
  bulk.kind = BulkKind::l12;
  bulk.element_a = "Mo";
  bulk.element_b = "Pd";
  bulk.a = 4.0;
  SlabMetadata meta;
  meta.bulk_formula = bulk.formula();
  return build_slab(bulk, meta, 2, 2);
}

std::string mocks_dir(const std::string& name) {
  return (testutil::repo_root() / "fixtures" / "mocks" / name).string();
}

}  // namespace

TEST_CASE("template rendering") {
  CHECK(render_template("a {{x}} b {{y}}", {{"x", "1"}, {"y", "2"}}) == "a 1 b 2");
  CHECK(render_template("no placeholders", {}) == "no placeholders");

  auto missing = catch_error([] { render_template("{{gone}}", {}); });
  CHECK(missing.kind == ErrorKind::config);
  CHECK(missing.message.find("gone") != std::string::npos);

  CHECK(catch_error([] { render_template("{{open", {}); }).kind == ErrorKind::config);
}

TEST_CASE("solution parsing") {
  SUBCASE("plain block with synonyms and sloppy symbol case") {
    Solution sol = parse_solution_block(
        "Reasoning first.\n"
        "{\"site_type\": \"fcc hollow\", \"surface_binding_atoms\": [\"pt\", \"PT\", \"Pt\"], "
        "\"adsorbate_binding_atoms\": [\"h\"], \"orientation\": \"monodentate\", "
        "\"reasoning\": \"threefold\"}");
    CHECK(sol.site_type == SiteKind::hollow);
    CHECK(sol.surface_binding_atoms == std::vector<std::string>{"Pt", "Pt", "Pt"});
    CHECK(sol.adsorbate_binding_atoms == std::vector<std::string>{"H"});
    CHECK(sol.orientation == Orientation::end_on);
    CHECK(sol.reasoning == "threefold");
  }

  SUBCASE("orientation and site spellings") {
    auto parse_with = [](const std::string& site, const std::string& orient) {
      return parse_solution_block(
          "{\"site_type\": \"" + site + "\", \"surface_binding_atoms\": [\"Cu\"], "
          "\"adsorbate_binding_atoms\": [\"O\", \"H\"], \"orientation\": \"" + orient +
          "\"}");
    };
    CHECK(parse_with("on-top", "bidentate").site_type == SiteKind::ontop);
    CHECK(parse_with("atop", "side_on").orientation == Orientation::side_on);
    CHECK(parse_with("Bridge", "Side On").site_type == SiteKind::bridge);
    CHECK(parse_with("hcp hollow", "end_on").orientation == Orientation::end_on);
  }

  SUBCASE("the last parseable object wins") {
    Solution sol = parse_solution_block(
        "{\"site_type\": \"ontop\", \"surface_binding_atoms\": [\"Cu\"], "
        "\"adsorbate_binding_atoms\": [\"H\"], \"orientation\": \"end-on\"}\n"
        "Second thoughts:\n"
        "{\"site_type\": \"bridge\", \"surface_binding_atoms\": [\"Cu\", \"Cu\"], "
        "\"adsorbate_binding_atoms\": [\"H\"], \"orientation\": \"end-on\"}");
    CHECK(sol.site_type == SiteKind::bridge);
  }

  SUBCASE("an unparseable trailing span falls back to an earlier object") {
    Solution sol = parse_solution_block(
        "{\"site_type\": \"ontop\", \"surface_binding_atoms\": [\"Cu\"], "
        "\"adsorbate_binding_atoms\": [\"H\"], \"orientation\": \"end-on\"}\n"
        "{pseudo code, not json}");
    CHECK(sol.site_type == SiteKind::ontop);
  }

  SUBCASE("rejections") {
    CHECK(catch_error([] { parse_solution_block("just prose"); }).kind ==
          ErrorKind::parse);
    CHECK(catch_error([] {
            parse_solution_block("{\"site_type\": \"saddle\", "
                                 "\"surface_binding_atoms\": [\"Cu\"], "
                                 "\"adsorbate_binding_atoms\": [\"H\"], "
                                 "\"orientation\": \"end-on\"}");
          }).kind == ErrorKind::parse);
    auto missing = catch_error([] {
      parse_solution_block("{\"site_type\": \"ontop\", "
                           "\"adsorbate_binding_atoms\": [\"H\"], "
                           "\"orientation\": \"end-on\"}");
    });
    CHECK(missing.kind == ErrorKind::parse);
    CHECK(missing.message.find("surface_binding_atoms") != std::string::npos);
    CHECK(catch_error([] {
            parse_solution_block("{\"site_type\": \"ontop\", "
                                 "\"surface_binding_atoms\": [], "
                                 "\"adsorbate_binding_atoms\": [\"H\"], "
                                 "\"orientation\": \"end-on\"}");
          }).kind == ErrorKind::parse);
    auto unknown = catch_error([] {
      parse_solution_block("{\"site_type\": \"ontop\", "
                           "\"surface_binding_atoms\": [\"Xx\"], "
                           "\"adsorbate_binding_atoms\": [\"H\"], "
                           "\"orientation\": \"end-on\"}");
    });
    CHECK(unknown.kind == ErrorKind::parse);
    CHECK(unknown.message.find("Xx") != std::string::npos);
  }
}

TEST_CASE("rule based critique") {
  AdsorbateSpec h = adsorbate_from_registry("H");
  AdsorbateSpec nnh = adsorbate_from_registry("NNH");
  std::set<std::string> surface{"Pt"};
  LlmConfig config;

  auto run = [&](const Solution& sol, const AdsorbateSpec& ads) {
    return critique(sol, surface, ads, nullptr, config, false);
  };

  SUBCASE("a coherent proposal is accepted") {
    CritiqueVerdict v = run(hollow_h_solution(), h);
    CHECK(v.accepted);
    CHECK(v.violations.empty());
  }

  SUBCASE("site arity") {
    Solution sol = hollow_h_solution();
    sol.site_type = SiteKind::ontop;  // still lists three surface atoms
    CritiqueVerdict v = run(sol, h);
    CHECK_FALSE(v.accepted);
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0].rule == "R1");

    sol.site_type = SiteKind::bridge;
    CHECK_FALSE(run(sol, h).accepted);
    sol.surface_binding_atoms = {"Pt", "Pt"};
    CHECK(run(sol, h).accepted);

    sol.site_type = SiteKind::hollow;
    sol.surface_binding_atoms = {"Pt", "Pt", "Pt", "Pt"};
    CHECK(run(sol, h).accepted);  // fourfold hollows are legal
    sol.surface_binding_atoms = {"Pt", "Pt"};
    CHECK_FALSE(run(sol, h).accepted);
  }

  SUBCASE("orientation arity") {
    Solution sol;
    sol.site_type = SiteKind::bridge;
    sol.surface_binding_atoms = {"Pt", "Pt"};
    sol.adsorbate_binding_atoms = {"N", "N"};
    sol.orientation = Orientation::end_on;
    CritiqueVerdict v = run(sol, nnh);
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0].rule == "R2");

    sol.orientation = Orientation::side_on;
    CHECK(run(sol, nnh).accepted);
    sol.adsorbate_binding_atoms = {"N"};
    CHECK(run(sol, nnh).violations[0].rule == "R2");
  }

  SUBCASE("element membership") {
    Solution sol = hollow_h_solution();
    sol.surface_binding_atoms = {"Pt", "Pt", "Cu"};
    CritiqueVerdict v = run(sol, h);
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0].rule == "R3");
    CHECK(v.violations[0].message.find("Cu") != std::string::npos);

    sol = hollow_h_solution();
    sol.adsorbate_binding_atoms = {"O"};
    v = run(sol, h);
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0].rule == "R4");
  }

  SUBCASE("violations accumulate") {
    Solution sol;
    sol.site_type = SiteKind::ontop;
    sol.surface_binding_atoms = {"Cu", "Cu"};
    sol.adsorbate_binding_atoms = {"H"};
    sol.orientation = Orientation::end_on;
    CritiqueVerdict v = run(sol, h);
    REQUIRE(v.violations.size() == 3);  // arity plus two membership hits
    CHECK(v.violations[0].rule == "R1");
    CHECK(v.violations[1].rule == "R3");
  }
}

TEST_CASE("advisory critic replies") {
  AdsorbateSpec h = adsorbate_from_registry("H");
  std::set<std::string> surface{"Pt"};
  LlmConfig config;

  SUBCASE("a line starting with incoherent becomes a violation") {
    TempDir dir("critic");
    write_file(dir.path / "critic.json",
               "{\"match\": {\"system\": \"site_type:\"},\n"
               " \"responses\": [\"Incoherent: hydrogen has no lone pair to donate."
               "\\nThe rest of the pairing looks fine.\"]}\n");
    MockChat mock(dir.str());
    CritiqueVerdict v = critique(hollow_h_solution(), surface, h, &mock, config, true);
    CHECK_FALSE(v.accepted);
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0].rule == "LLM");
    CHECK(v.violations[0].message.find("lone pair") != std::string::npos);
    CHECK(mock.total_calls() == 1);
  }

  SUBCASE("an approving reply leaves the verdict accepted") {
    TempDir dir("critic");
    write_file(dir.path / "critic.json",
               "{\"match\": {\"system\": \"site_type:\"},\n"
               " \"responses\": [\"The proposal is chemically sensible.\"]}\n");
    MockChat mock(dir.str());
    CritiqueVerdict v = critique(hollow_h_solution(), surface, h, &mock, config, true);
    CHECK(v.accepted);
  }
}

TEST_CASE("binding index derivation") {
  LlmConfig config;

  SUBCASE("lowest unused matching index in registry order") {
    AdsorbateSpec oh = adsorbate_from_registry("OH");
    Solution sol;
    sol.adsorbate_binding_atoms = {"O"};
    CHECK(derive_binding_indices(sol, oh, nullptr, config, false) ==
          BindingIndexArray{0});
    sol.adsorbate_binding_atoms = {"H"};
    CHECK(derive_binding_indices(sol, oh, nullptr, config, false) ==
          BindingIndexArray{1});

    AdsorbateSpec ethanol = adsorbate_from_registry("CH2CH2OH");
    sol.adsorbate_binding_atoms = {"C", "C"};
    CHECK(derive_binding_indices(sol, ethanol, nullptr, config, false) ==
          (BindingIndexArray{0, 3}));
  }

  SUBCASE("exhausting an element is a derivation error") {
    AdsorbateSpec h = adsorbate_from_registry("H");
    Solution sol;
    sol.adsorbate_binding_atoms = {"H", "H"};
    auto c = catch_error([&] { derive_binding_indices(sol, h, nullptr, config, false); });
    CHECK(c.kind == ErrorKind::derivation);
    CHECK(c.message.find("no unassigned H atom") != std::string::npos);
  }

  SUBCASE("a valid indexer proposal overrides the deterministic order") {
    AdsorbateSpec nnh = adsorbate_from_registry("NNH");
    Solution sol;
    sol.adsorbate_binding_atoms = {"N", "N"};
    TempDir dir("indexer");
    write_file(dir.path / "indexer.json",
               "{\"match\": {\"system\": \"atomic_numbers:\"},\n"
               " \"responses\": [\"Bind through the inner nitrogen first: [1, 0]\"]}\n");
    MockChat mock(dir.str());
    CHECK(derive_binding_indices(sol, nnh, &mock, config, true) ==
          (BindingIndexArray{1, 0}));
    CHECK(mock.total_calls() == 1);
  }

  SUBCASE("an invalid indexer proposal falls back to the deterministic order") {
    AdsorbateSpec oh = adsorbate_from_registry("OH");
    Solution sol;
    sol.adsorbate_binding_atoms = {"O"};
    TempDir dir("indexer");
    write_file(dir.path / "indexer.json",
               "{\"match\": {\"system\": \"atomic_numbers:\"},\n"
               " \"responses\": [\"[5]\"]}\n");
    MockChat mock(dir.str());
    CHECK(derive_binding_indices(sol, oh, &mock, config, true) == BindingIndexArray{0});
  }
}

TEST_CASE("surface summaries") {
  CHECK(surface_summary(pt111_slab()) == "Pt:4");
  CHECK(surface_element_set(pt111_slab()) == std::set<std::string>{"Pt"});

  Structure alloy = mo3pd_slab();
  CHECK(surface_summary(alloy) == "Mo:3 Pd:1");
  CHECK(surface_element_set(alloy) == (std::set<std::string>{"Mo", "Pd"}));
}

TEST_CASE("planner rounds") {
  LlmConfig config;

  SUBCASE("an unparseable reply triggers corrective feedback") {
    MockChat mock(mocks_dir("parse-retry"));
    std::vector<ChatMessage> transcript;
    Solution sol = plan_solution(h_on_pt(), "Pt:4", mock, config, &transcript);
    CHECK(sol.site_type == SiteKind::hollow);
    CHECK(mock.total_calls() == 2);
    REQUIRE(transcript.size() == 5);
    CHECK(transcript[0].role == "system");
    CHECK(transcript[1].role == "user");
    CHECK(transcript[1].content.find("adsorbate: H") != std::string::npos);
    CHECK(transcript[2].role == "assistant");
    CHECK(transcript[3].role == "user");
    CHECK(transcript[3].content.find("Could not use that reply") != std::string::npos);
    CHECK(transcript[4].role == "assistant");
  }

  SUBCASE("persistent prose exhausts the retry budget") {
    TempDir dir("prose");
    write_file(dir.path / "planner.json",
               "{\"match\": {\"system\": \"adsorbate:\"},\n"
               " \"responses\": [\"I would favour the hollow, broadly speaking.\"]}\n");
    MockChat mock(dir.str());
    config.max_retries = 2;
    std::vector<ChatMessage> transcript;
    auto c = catch_error(
        [&] { plan_solution(h_on_pt(), "Pt:4", mock, config, &transcript); });
    CHECK(c.kind == ErrorKind::planner_failure);
    CHECK(c.message.find("planner produced no parseable solution") != std::string::npos);
    CHECK(mock.total_calls() == 2);
    CHECK(transcript.size() == 6);  // system, user, then reply/corrective twice
  }

  SUBCASE("prior violations are fed back into the prompt") {
    MockChat mock(mocks_dir("pt111-h"));
    std::vector<ChatMessage> transcript;
    std::vector<Violation> feedback{{"R1", "an ontop site binds exactly one surface atom"}};
    plan_solution(h_on_pt(), "Pt:4", mock, config, &transcript, feedback);
    REQUIRE(transcript.size() == 3);
    CHECK(transcript[1].content.find("Your previous proposal was rejected:") !=
          std::string::npos);
    CHECK(transcript[1].content.find("R1") != std::string::npos);
  }
}

TEST_CASE("full agent loop") {
  LlmConfig config;
  AdsorbateSpec h = adsorbate_from_registry("H");
  Structure slab = pt111_slab();

  SUBCASE("a coherent first proposal needs one planner call") {
    MockChat mock(mocks_dir("pt111-h"));
    AgentOutcome outcome = run_agent_loop(h_on_pt(), slab, h, mock, config);
    CHECK(outcome.solution.site_type == SiteKind::hollow);
    CHECK(outcome.solution.surface_binding_atoms ==
          std::vector<std::string>{"Pt", "Pt", "Pt"});
    CHECK(outcome.binding == BindingIndexArray{0});
    CHECK(mock.total_calls() == 1);
    CHECK(outcome.transcript.size() == 3);
  }

  SUBCASE("a rejected proposal is retried with critic feedback") {
    MockChat mock(mocks_dir("reject-then-accept"));
    AgentOutcome outcome = run_agent_loop(h_on_pt(), slab, h, mock, config);
    CHECK(outcome.solution.site_type == SiteKind::hollow);
    CHECK(mock.total_calls() == 2);
    bool noted = false;
    for (const auto& m : outcome.transcript)
      if (m.role == "system" &&
          m.content.find("critic rejected the proposal:") != std::string::npos &&
          m.content.find("[R1]") != std::string::npos)
        noted = true;
    CHECK(noted);
  }

  SUBCASE("an incurably incoherent planner exhausts the cycle budget") {
    MockChat mock(mocks_dir("always-incoherent"));
    config.max_retries = 2;
    auto c = catch_error([&] { run_agent_loop(h_on_pt(), slab, h, mock, config); });
    CHECK(c.kind == ErrorKind::agent_failure);
    CHECK(c.message.find("no coherent solution after 2 planner/critic cycles") !=
          std::string::npos);
    CHECK(mock.total_calls() == 2);
  }
}

TEST_CASE("mock transport bookkeeping") {
  SUBCASE("responses are consumed in order and the last repeats") {
    MockChat mock(mocks_dir("parse-retry"));
    std::vector<ChatMessage> probe{{"user", "adsorbate: H\ncatalyst: Pt\nmiller"}};
    std::string first = mock.chat(probe);
    std::string second = mock.chat(probe);
    std::string third = mock.chat(probe);
    CHECK(first != second);
    CHECK(second == third);
    CHECK(mock.total_calls() == 3);
  }

  SUBCASE("an unmatched conversation is a transport error") {
    MockChat mock(mocks_dir("pt111-h"));
    auto c = catch_error([&] { mock.chat({{"user", "unrelated"}}); });
    CHECK(c.kind == ErrorKind::transport);
    CHECK(c.message.find("no mock fixture matches") != std::string::npos);
  }

  SUBCASE("a missing fixture directory is a config error") {
    CHECK(catch_error([] { MockChat m("/nonexistent/mocks"); }).kind ==
          ErrorKind::config);
  }
}
