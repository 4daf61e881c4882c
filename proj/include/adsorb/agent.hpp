#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adsorb/adsorbate.hpp"
#include "adsorb/chat.hpp"
#include "adsorb/solution.hpp"
#include "adsorb/structure.hpp"

namespace adsorb {

// Fills {{key}} placeholders; an unresolved placeholder is a config error.
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& vars);

// Extracts the last balanced JSON object from free text and reads the four
// required keys, normalizing case and synonyms ("on-top" -> ontop,
// "fcc hollow" -> hollow, "monodentate" -> end-on, "bidentate" -> side-on).
Solution parse_solution_block(const std::string& text);

struct Violation {
  std::string rule;  // R1..R4 or LLM
  std::string message;
};

struct CritiqueVerdict {
  bool accepted = false;
  std::vector<Violation> violations;
};

// Rule-based coherence check, always applied:
//   R1 site arity: ontop 1, bridge 2, hollow 3 or 4 surface binding atoms
//   R2 orientation arity: end-on exactly 1, side-on at least 2 adsorbate atoms
//   R3 surface binding atoms drawn from the surface elements
//   R4 adsorbate binding atoms drawn from the adsorbate elements
// An optional LLM review can add advisory violations but cannot overturn a
// rule-based rejection.
CritiqueVerdict critique(const Solution& sol, const std::set<std::string>& surface_elements,
                         const AdsorbateSpec& ads, ChatTransport* transport,
                         const LlmConfig& config, bool use_llm);

// Maps each requested element to the lowest unused matching atom index in
// registry order. An LLM proposal is used only when it passes the same
// element-match validation.
BindingIndexArray derive_binding_indices(const Solution& sol, const AdsorbateSpec& ads,
                                         ChatTransport* transport,
                                         const LlmConfig& config, bool use_llm);

// One planner round plus parse retries with corrective feedback.
Solution plan_solution(const Query& q, const std::string& slab_summary,
                       ChatTransport& transport, const LlmConfig& config,
                       std::vector<ChatMessage>* transcript,
                       const std::vector<Violation>& prior_violations = {});

struct AgentOutcome {
  Solution solution;
  BindingIndexArray binding;
  std::vector<ChatMessage> transcript;
};

// Planner/critic cycles followed by binding-index derivation. Rejections are
// fed back into a fresh planner round; max_retries cycles, then agent-failure.
AgentOutcome run_agent_loop(const Query& q, const Structure& slab,
                            const AdsorbateSpec& ads, ChatTransport& transport,
                            const LlmConfig& config);

// Element histogram of the top layer, e.g. "Pt:3 Cu:1".
std::string surface_summary(const Structure& slab);
std::set<std::string> surface_element_set(const Structure& slab);

}  // namespace adsorb
