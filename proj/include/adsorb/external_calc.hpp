#pragma once

#include <memory>
#include <string>

#include "adsorb/calculator.hpp"

namespace adsorb {

// Wire schema shared by both transports:
//   request  {"cell": [9 floats], "symbols": [...], "positions": [[x,y,z]...],
//             "tags": [...]}
//   response {"energy": float, "forces": [[fx,fy,fz]...]}
std::string structure_to_wire(const Structure& s);
EnergyForces energy_forces_from_wire(const std::string& body, std::size_t n_atoms);

// POSTs each request to {base_url}/calculate. One client per worker; no
// retries, transport failures surface immediately.
class HttpCalculator : public Calculator {
 public:
  explicit HttpCalculator(std::string base_url, double timeout_s = 300.0);
  EnergyForces evaluate(const Structure& s) override;
  std::string describe() const override { return "http:" + base_url_; }

 private:
  std::string base_url_;
  double timeout_s_;
};

// Long-lived child process speaking one JSON document per line on
// stdin/stdout. The child is started lazily on first use and closed on
// destruction by end-of-input.
class SubprocessCalculator : public Calculator {
 public:
  explicit SubprocessCalculator(std::string command, double timeout_s = 300.0);
  ~SubprocessCalculator() override;
  SubprocessCalculator(const SubprocessCalculator&) = delete;
  SubprocessCalculator& operator=(const SubprocessCalculator&) = delete;

  EnergyForces evaluate(const Structure& s) override;
  std::string describe() const override { return "subprocess:" + command_; }

 private:
  void ensure_started();
  void shutdown();

  std::string command_;
  double timeout_s_;
  int child_pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
};

// spec is "builtin", an http(s) URL, or "subprocess:<command line>".
std::unique_ptr<Calculator> make_calculator(const std::string& spec,
                                            const CalcParams& builtin_params,
                                            double timeout_s = 300.0);

}  // namespace adsorb
