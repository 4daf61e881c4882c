#include <array>
#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "adsorb/calculator.hpp"
#include "adsorb/element.hpp"
#include "adsorb/errors.hpp"

namespace {

using nlohmann::json;

// The wire schema carries no periodicity, so the boundary conditions are a
// process-level setting; the default matches the slab convention.
std::array<bool, 3> parse_pbc(const std::string& text) {
  if (text.size() != 3)
    throw adsorb::Error(adsorb::ErrorKind::config,
                        "--pbc takes three letters, e.g. TTF");
  std::array<bool, 3> pbc{};
  for (int i = 0; i < 3; ++i) {
    char c = text[static_cast<std::size_t>(i)];
    if (c == 'T' || c == 't')
      pbc[static_cast<std::size_t>(i)] = true;
    else if (c == 'F' || c == 'f')
      pbc[static_cast<std::size_t>(i)] = false;
    else
      throw adsorb::Error(adsorb::ErrorKind::config,
                          "--pbc takes three letters, e.g. TTF");
  }
  return pbc;
}

adsorb::Structure structure_from_wire(const json& req,
                                      const std::array<bool, 3>& pbc) {
  adsorb::Structure s;
  const auto& cell = req.at("cell");
  if (!cell.is_array() || cell.size() != 9)
    throw adsorb::Error(adsorb::ErrorKind::schema, "cell must hold 9 numbers");
  for (int r = 0; r < 3; ++r)
    s.lattice.cell.set_row(r, {cell[3 * r].get<double>(),
                               cell[3 * r + 1].get<double>(),
                               cell[3 * r + 2].get<double>()});
  s.lattice.pbc = pbc;
  const auto& symbols = req.at("symbols");
  const auto& positions = req.at("positions");
  if (!symbols.is_array() || !positions.is_array() ||
      symbols.size() != positions.size())
    throw adsorb::Error(adsorb::ErrorKind::schema,
                        "symbols and positions must be arrays of equal length");
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto& p = positions[i];
    if (!p.is_array() || p.size() != 3)
      throw adsorb::Error(adsorb::ErrorKind::schema,
                          "positions entries must hold 3 numbers");
    adsorb::Atom atom = adsorb::make_atom(
        symbols[i].get<std::string>(),
        {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    if (req.contains("tags")) atom.tag = req.at("tags").at(i).get<int>();
    s.atoms.push_back(std::move(atom));
  }
  return s;
}

std::string handle_request(const std::string& body, const adsorb::CalcParams& params,
                           const std::array<bool, 3>& pbc) {
  json req;
  try {
    req = json::parse(body);
  } catch (const std::exception& e) {
    throw adsorb::Error(adsorb::ErrorKind::schema, e.what());
  }
  adsorb::Structure s = structure_from_wire(req, pbc);
  adsorb::EnergyForces ef = adsorb::lj_energy_forces(s, params);
  json res;
  res["energy"] = ef.energy;
  json forces = json::array();
  for (const auto& f : ef.forces) forces.push_back({f.x, f.y, f.z});
  res["forces"] = std::move(forces);
  return res.dump();
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);

  CLI::App app{"Lennard-Jones calculator speaking the external-calculator wire schema"};
  int port = 0;
  std::string pbc_text = "TTF";
  app.add_option("--serve", port, "listen on this HTTP port instead of stdio");
  app.add_option("--pbc", pbc_text, "periodic axes as T/F letters (default TTF)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    std::array<bool, 3> pbc = parse_pbc(pbc_text);
    adsorb::CalcParams params = adsorb::default_calc_params();

    if (port > 0) {
      httplib::Server server;
      server.Post("/calculate", [&](const httplib::Request& req,
                                    httplib::Response& res) {
        try {
          res.set_content(handle_request(req.body, params, pbc), "application/json");
        } catch (const adsorb::Error& e) {
          res.status = 400;
          res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
      });
      std::cerr << "listening on 127.0.0.1:" << port << "\n";
      if (!server.listen("127.0.0.1", port)) {
        std::cerr << "error: cannot listen on port " << port << "\n";
        return 1;
      }
      return 0;
    }

    std::string line;
    while (std::getline(std::cin, line)) {
      if (line.empty()) continue;
      try {
        std::cout << handle_request(line, params, pbc) << "\n" << std::flush;
      } catch (const adsorb::Error& e) {
        std::cout << json{{"error", e.what()}}.dump() << "\n" << std::flush;
      }
    }
    return 0;
  } catch (const adsorb::Error& e) {
    std::cerr << "error (" << adsorb::to_string(e.kind()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
