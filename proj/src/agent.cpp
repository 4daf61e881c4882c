#include "adsorb/agent.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "adsorb/assets.hpp"
#include "adsorb/element.hpp"
#include "adsorb/errors.hpp"
#include "adsorb/sites.hpp"

namespace adsorb {

const char* to_string(Orientation o) {
  return o == Orientation::end_on ? "end-on" : "side-on";
}

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find("{{", pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    std::size_t close = text.find("}}", open + 2);
    if (close == std::string::npos)
      throw Error(ErrorKind::config, "unterminated {{placeholder}} in template");
    out.append(text, pos, open - pos);
    std::string key = text.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it == vars.end())
      throw Error(ErrorKind::config, "template placeholder '" + key + "' has no value");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string capitalize_symbol(std::string s) {
  if (s.empty()) return s;
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  for (std::size_t i = 1; i < s.size(); ++i)
    s[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
  return s;
}

// Maximal balanced {...} spans, quote-aware. Nested objects stay inside
// their enclosing span.
std::vector<std::string> top_level_json_spans(const std::string& text) {
  std::vector<std::string> spans;
  int depth = 0;
  bool in_string = false, escaped = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"' && depth > 0) {
      in_string = true;
    } else if (c == '{') {
      if (depth == 0) start = i;
      ++depth;
    } else if (c == '}') {
      if (depth > 0 && --depth == 0) spans.push_back(text.substr(start, i - start + 1));
    }
  }
  return spans;
}

SiteKind normalize_site(const std::string& raw) {
  std::string v = lower(raw);
  if (v.find("hollow") != std::string::npos) return SiteKind::hollow;
  if (v.find("bridge") != std::string::npos) return SiteKind::bridge;
  if (v.find("top") != std::string::npos || v == "atop") return SiteKind::ontop;
  throw Error(ErrorKind::parse, "site_type '" + raw + "' not recognized");
}

Orientation normalize_orientation(const std::string& raw) {
  std::string v = lower(raw);
  std::replace(v.begin(), v.end(), '_', '-');
  std::replace(v.begin(), v.end(), ' ', '-');
  if (v == "end-on" || v == "endon" || v == "monodentate") return Orientation::end_on;
  if (v == "side-on" || v == "sideon" || v == "bidentate") return Orientation::side_on;
  throw Error(ErrorKind::parse, "orientation '" + raw + "' not recognized");
}

std::vector<std::string> read_symbol_list(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key))
    throw Error(ErrorKind::parse, std::string("solution JSON missing key '") + key + "'");
  const auto& arr = doc[key];
  if (!arr.is_array() || arr.empty())
    throw Error(ErrorKind::parse,
                std::string("solution key '") + key + "' must be a non-empty list");
  std::vector<std::string> out;
  for (const auto& item : arr) {
    if (!item.is_string())
      throw Error(ErrorKind::parse,
                  std::string("solution key '") + key + "' must hold element symbols");
    std::string symbol = capitalize_symbol(item.get<std::string>());
    if (!is_known_element(symbol))
      throw Error(ErrorKind::parse,
                  "unknown element '" + item.get<std::string>() + "' in '" + key + "'");
    out.push_back(symbol);
  }
  return out;
}

}  // namespace

Solution parse_solution_block(const std::string& text) {
  std::vector<std::string> spans = top_level_json_spans(text);
  nlohmann::json doc;
  bool parsed = false;
  for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
    try {
      doc = nlohmann::json::parse(*it);
    } catch (const std::exception&) {
      continue;
    }
    if (doc.is_object()) {
      parsed = true;
      break;
    }
  }
  if (!parsed)
    throw Error(ErrorKind::parse, "reply contains no JSON object");

  for (const char* key : {"site_type", "orientation"})
    if (!doc.contains(key) || !doc[key].is_string())
      throw Error(ErrorKind::parse,
                  std::string("solution JSON missing string key '") + key + "'");

  Solution sol;
  sol.site_type = normalize_site(doc["site_type"].get<std::string>());
  sol.orientation = normalize_orientation(doc["orientation"].get<std::string>());
  sol.surface_binding_atoms = read_symbol_list(doc, "surface_binding_atoms");
  sol.adsorbate_binding_atoms = read_symbol_list(doc, "adsorbate_binding_atoms");
  if (doc.contains("reasoning") && doc["reasoning"].is_string())
    sol.reasoning = doc["reasoning"].get<std::string>();
  return sol;
}

CritiqueVerdict critique(const Solution& sol, const std::set<std::string>& surface_elements,
                         const AdsorbateSpec& ads, ChatTransport* transport,
                         const LlmConfig& config, bool use_llm) {
  CritiqueVerdict verdict;
  auto flag = [&](const char* rule, std::string message) {
    verdict.violations.push_back({rule, std::move(message)});
  };

  std::size_t n_surface = sol.surface_binding_atoms.size();
  switch (sol.site_type) {
    case SiteKind::ontop:
      if (n_surface != 1)
        flag("R1", "an ontop site binds exactly one surface atom, got " +
                       std::to_string(n_surface));
      break;
    case SiteKind::bridge:
      if (n_surface != 2)
        flag("R1", "a bridge site binds exactly two surface atoms, got " +
                       std::to_string(n_surface));
      break;
    case SiteKind::hollow:
      if (n_surface != 3 && n_surface != 4)
        flag("R1", "a hollow site binds three or four surface atoms, got " +
                       std::to_string(n_surface));
      break;
    case SiteKind::random:
      flag("R1", "site_type must be ontop, bridge, or hollow");
      break;
  }

  std::size_t n_ads = sol.adsorbate_binding_atoms.size();
  if (sol.orientation == Orientation::end_on && n_ads != 1)
    flag("R2", "an end-on adsorbate binds through exactly one atom, got " +
                   std::to_string(n_ads));
  if (sol.orientation == Orientation::side_on && n_ads < 2)
    flag("R2", "a side-on adsorbate binds through at least two atoms, got " +
                   std::to_string(n_ads));

  for (const auto& symbol : sol.surface_binding_atoms)
    if (!surface_elements.count(symbol))
      flag("R3", "element " + symbol + " is not present on the surface");

  std::set<std::string> ads_elements(ads.symbols.begin(), ads.symbols.end());
  for (const auto& symbol : sol.adsorbate_binding_atoms)
    if (!ads_elements.count(symbol))
      flag("R4", "element " + symbol + " is not part of the adsorbate");

  if (use_llm && transport) {
    std::string knowledge = read_text_file(asset_path("prompts/knowledge-prompt.txt"));
    std::string system = render_template(
        read_text_file(asset_path("prompts/critic-system.txt")),
        {{"knowledge_prompt", knowledge}});
    std::ostringstream user;
    user << "site_type: " << to_string(sol.site_type) << "\norientation: "
         << to_string(sol.orientation) << "\nsurface_binding_atoms:";
    for (const auto& s : sol.surface_binding_atoms) user << ' ' << s;
    user << "\nadsorbate_binding_atoms:";
    for (const auto& s : sol.adsorbate_binding_atoms) user << ' ' << s;
    std::string reply = transport->chat({{"system", system}, {"user", user.str()}});
    std::istringstream lines(reply);
    for (std::string line; std::getline(lines, line);) {
      if (lower(line).rfind("incoherent", 0) == 0)
        verdict.violations.push_back({"LLM", line});
    }
  }

  verdict.accepted = verdict.violations.empty();
  return verdict;
}

BindingIndexArray derive_binding_indices(const Solution& sol, const AdsorbateSpec& ads,
                                         ChatTransport* transport,
                                         const LlmConfig& config, bool use_llm) {
  auto matches = [&](const BindingIndexArray& indices) {
    if (indices.size() != sol.adsorbate_binding_atoms.size()) return false;
    std::set<std::size_t> seen;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      std::size_t i = indices[k];
      if (i >= ads.size() || !seen.insert(i).second) return false;
      if (ads.symbols[i] != sol.adsorbate_binding_atoms[k]) return false;
    }
    return true;
  };

  BindingIndexArray deterministic;
  std::vector<bool> used(ads.size(), false);
  for (const auto& symbol : sol.adsorbate_binding_atoms) {
    bool found = false;
    for (std::size_t i = 0; i < ads.size(); ++i) {
      if (used[i] || ads.symbols[i] != symbol) continue;
      deterministic.push_back(i);
      used[i] = true;
      found = true;
      break;
    }
    if (!found)
      throw Error(ErrorKind::derivation,
                  "adsorbate '" + ads.key + "' has no unassigned " + symbol + " atom");
  }

  if (use_llm && transport) {
    std::string system = read_text_file(asset_path("prompts/indexer-system.txt"));
    std::ostringstream user;
    user << "atomic_numbers: [";
    for (std::size_t i = 0; i < ads.atomic_numbers.size(); ++i)
      user << (i ? ", " : "") << ads.atomic_numbers[i];
    user << "]\nbinding_elements: [";
    for (std::size_t i = 0; i < sol.adsorbate_binding_atoms.size(); ++i)
      user << (i ? ", " : "") << '"' << sol.adsorbate_binding_atoms[i] << '"';
    user << "]";
    std::string reply = transport->chat({{"system", system}, {"user", user.str()}});
    std::size_t open = reply.rfind('[');
    std::size_t close = reply.find(']', open == std::string::npos ? 0 : open);
    if (open != std::string::npos && close != std::string::npos) {
      try {
        auto arr = nlohmann::json::parse(reply.substr(open, close - open + 1));
        BindingIndexArray proposed;
        for (const auto& v : arr)
          proposed.push_back(v.get<std::size_t>());
        if (matches(proposed)) return proposed;
      } catch (const std::exception&) {
      }
    }
  }
  return deterministic;
}

std::string surface_summary(const Structure& slab) {
  std::map<std::string, int> histogram;
  for (std::size_t i : surface_atoms(slab)) ++histogram[slab.atoms[i].symbol];
  std::ostringstream out;
  bool first = true;
  for (const auto& [symbol, count] : histogram) {
    if (!first) out << ' ';
    out << symbol << ':' << count;
    first = false;
  }
  return out.str();
}

std::set<std::string> surface_element_set(const Structure& slab) {
  std::set<std::string> out;
  for (std::size_t i : surface_atoms(slab)) out.insert(slab.atoms[i].symbol);
  return out;
}

Solution plan_solution(const Query& q, const std::string& slab_summary,
                       ChatTransport& transport, const LlmConfig& config,
                       std::vector<ChatMessage>* transcript,
                       const std::vector<Violation>& prior_violations) {
  std::string questions = read_text_file(asset_path("prompts/reasoning-questions.txt"));
  std::string system = render_template(
      read_text_file(asset_path("prompts/planner-system.txt")),
      {{"reasoning_questions", questions}});

  std::ostringstream user;
  user << "adsorbate: " << q.adsorbate_key << "\ncatalyst: " << q.catalyst_formula
       << "\nmiller: (" << q.miller[0] << "," << q.miller[1] << "," << q.miller[2]
       << ")\nsurface atoms: " << slab_summary;
  if (!prior_violations.empty()) {
    user << "\n\nYour previous proposal was rejected:";
    for (const auto& v : prior_violations)
      user << "\n- " << v.rule << ": " << v.message;
    user << "\nPropose a corrected configuration.";
  }

  std::vector<ChatMessage> messages{{"system", system}, {"user", user.str()}};
  int attempts = std::max(1, config.max_retries);
  Error last_error(ErrorKind::parse, "no attempt made");
  for (int attempt = 0; attempt < attempts; ++attempt) {
    std::string reply = transport.chat(messages);
    messages.push_back({"assistant", reply});
    try {
      Solution sol = parse_solution_block(reply);
      if (transcript)
        transcript->insert(transcript->end(), messages.begin(), messages.end());
      return sol;
    } catch (const Error& e) {
      last_error = e;
      messages.push_back(
          {"user", std::string("Could not use that reply (") + e.what() +
                       "). Reply again with a single JSON object holding the keys "
                       "site_type, surface_binding_atoms, adsorbate_binding_atoms, "
                       "orientation."});
    }
  }
  if (transcript)
    transcript->insert(transcript->end(), messages.begin(), messages.end());
  throw Error(ErrorKind::planner_failure,
              std::string("planner produced no parseable solution: ") +
                  last_error.what());
}

AgentOutcome run_agent_loop(const Query& q, const Structure& slab,
                            const AdsorbateSpec& ads, ChatTransport& transport,
                            const LlmConfig& config) {
  AgentOutcome outcome;
  std::string summary = surface_summary(slab);
  std::set<std::string> surface = surface_element_set(slab);

  std::vector<Violation> feedback;
  int cycles = std::max(1, config.max_retries);
  for (int cycle = 0; cycle < cycles; ++cycle) {
    Solution sol = plan_solution(q, summary, transport, config, &outcome.transcript,
                                 feedback);
    CritiqueVerdict verdict = critique(sol, surface, ads, &transport, config,
                                       config.use_llm_critic);
    if (verdict.accepted) {
      outcome.solution = sol;
      outcome.binding = derive_binding_indices(sol, ads, &transport, config,
                                               config.use_llm_indexer);
      return outcome;
    }
    feedback = verdict.violations;
    std::ostringstream note;
    note << "critic rejected the proposal:";
    for (const auto& v : feedback) note << " [" << v.rule << "] " << v.message << ";";
    outcome.transcript.push_back({"system", note.str()});
  }
  throw Error(ErrorKind::agent_failure,
              "no coherent solution after " + std::to_string(cycles) +
                  " planner/critic cycles");
}

}  // namespace adsorb
