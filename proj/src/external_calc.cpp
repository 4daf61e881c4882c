#include "adsorb/external_calc.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "adsorb/element.hpp"
#include "adsorb/errors.hpp"

namespace adsorb {

std::string structure_to_wire(const Structure& s) {
  nlohmann::json req;
  std::vector<double> cell;
  cell.reserve(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cell.push_back(s.lattice.cell.m[i][j]);
  req["cell"] = cell;
  std::vector<std::string> symbols;
  std::vector<std::array<double, 3>> positions;
  std::vector<int> tags;
  for (const auto& a : s.atoms) {
    symbols.push_back(a.symbol);
    positions.push_back({a.position.x, a.position.y, a.position.z});
    tags.push_back(a.tag);
  }
  req["symbols"] = symbols;
  req["positions"] = positions;
  req["tags"] = tags;
  return req.dump();
}

EnergyForces energy_forces_from_wire(const std::string& body, std::size_t n_atoms) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::calculator,
                std::string("malformed calculator response: ") + e.what() +
                    "; body starts '" + body.substr(0, 120) + "'");
  }
  if (!doc.is_object() || !doc.contains("energy") || !doc.contains("forces"))
    throw Error(ErrorKind::calculator,
                "calculator response missing energy/forces; body starts '" +
                    body.substr(0, 120) + "'");
  EnergyForces out;
  out.energy = doc["energy"].get<double>();
  const auto& forces = doc["forces"];
  if (!forces.is_array() || forces.size() != n_atoms)
    throw Error(ErrorKind::calculator,
                "calculator returned " + std::to_string(forces.size()) +
                    " forces for " + std::to_string(n_atoms) + " atoms");
  for (const auto& f : forces) {
    if (!f.is_array() || f.size() != 3)
      throw Error(ErrorKind::calculator, "force entries must be [fx, fy, fz]");
    out.forces.push_back({f[0].get<double>(), f[1].get<double>(), f[2].get<double>()});
  }
  if (!std::isfinite(out.energy))
    throw Error(ErrorKind::calculator, "calculator returned non-finite energy");
  for (const auto& f : out.forces)
    if (!std::isfinite(f.x) || !std::isfinite(f.y) || !std::isfinite(f.z))
      throw Error(ErrorKind::calculator, "calculator returned non-finite forces");
  return out;
}

HttpCalculator::HttpCalculator(std::string base_url, double timeout_s)
    : base_url_(std::move(base_url)), timeout_s_(timeout_s) {
  if (base_url_.rfind("http://", 0) != 0 && base_url_.rfind("https://", 0) != 0)
    throw Error(ErrorKind::config, "calculator URL must start with http:// or https://");
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

EnergyForces HttpCalculator::evaluate(const Structure& s) {
  std::string host = base_url_;
  std::string prefix;
  std::size_t scheme = host.find("://");
  std::size_t slash = host.find('/', scheme + 3);
  if (slash != std::string::npos) {
    prefix = host.substr(slash);
    host = host.substr(0, slash);
  }
  httplib::Client client(host);
  auto seconds = static_cast<time_t>(timeout_s_);
  auto micros = static_cast<time_t>((timeout_s_ - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  auto res = client.Post(prefix + "/calculate", structure_to_wire(s), "application/json");
  if (!res) {
    std::ostringstream msg;
    msg << "calculator POST " << base_url_ << "/calculate failed: "
        << httplib::to_string(res.error());
    throw Error(res.error() == httplib::Error::ConnectionTimeout ||
                        res.error() == httplib::Error::Read
                    ? ErrorKind::timeout
                    : ErrorKind::transport,
                msg.str());
  }
  if (res->status != 200)
    throw Error(ErrorKind::calculator,
                "calculator returned HTTP " + std::to_string(res->status) +
                    "; body starts '" + res->body.substr(0, 120) + "'");
  return energy_forces_from_wire(res->body, s.atoms.size());
}

SubprocessCalculator::SubprocessCalculator(std::string command, double timeout_s)
    : command_(std::move(command)), timeout_s_(timeout_s) {
  if (command_.empty())
    throw Error(ErrorKind::config, "empty subprocess calculator command");
}

SubprocessCalculator::~SubprocessCalculator() { shutdown(); }

void SubprocessCalculator::ensure_started() {
  if (child_pid_ >= 0) return;

  std::vector<std::string> args;
  std::istringstream split(command_);
  for (std::string tok; split >> tok;) args.push_back(tok);
  if (args.empty())
    throw Error(ErrorKind::config, "empty subprocess calculator command");

  int to_child[2], from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0)
    throw Error(ErrorKind::transport, std::string("pipe failed: ") + std::strerror(errno));

  pid_t pid = fork();
  if (pid < 0)
    throw Error(ErrorKind::transport, std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  child_pid_ = pid;
  to_child_ = to_child[1];
  from_child_ = from_child[0];
}

void SubprocessCalculator::shutdown() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (child_pid_ >= 0) {
    int status = 0;
    waitpid(child_pid_, &status, 0);
    child_pid_ = -1;
  }
}

EnergyForces SubprocessCalculator::evaluate(const Structure& s) {
  ensure_started();
  std::string line = structure_to_wire(s);
  line.push_back('\n');
  std::size_t off = 0;
  while (off < line.size()) {
    ssize_t n = write(to_child_, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::transport,
                  "subprocess calculator write failed: " + std::string(std::strerror(errno)));
    }
    off += static_cast<std::size_t>(n);
  }

  for (;;) {
    std::size_t nl = read_buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string reply = read_buffer_.substr(0, nl);
      read_buffer_.erase(0, nl + 1);
      return energy_forces_from_wire(reply, s.atoms.size());
    }
    struct pollfd pfd{from_child_, POLLIN, 0};
    int ready = poll(&pfd, 1, static_cast<int>(timeout_s_ * 1000.0));
    if (ready == 0)
      throw Error(ErrorKind::timeout,
                  "subprocess calculator gave no reply within " +
                      std::to_string(timeout_s_) + " s");
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::transport,
                  "poll failed: " + std::string(std::strerror(errno)));
    }
    char buf[4096];
    ssize_t n = read(from_child_, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::transport,
                  "subprocess calculator read failed: " + std::string(std::strerror(errno)));
    }
    if (n == 0)
      throw Error(ErrorKind::transport,
                  "subprocess calculator closed its output (command '" + command_ + "')");
    read_buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

std::unique_ptr<Calculator> make_calculator(const std::string& spec,
                                            const CalcParams& builtin_params,
                                            double timeout_s) {
  if (spec.empty() || spec == "builtin")
    return std::make_unique<LjCalculator>(builtin_params);
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0)
    return std::make_unique<HttpCalculator>(spec, timeout_s);
  if (spec.rfind("subprocess:", 0) == 0)
    return std::make_unique<SubprocessCalculator>(spec.substr(11), timeout_s);
  throw Error(ErrorKind::config,
              "calculator must be 'builtin', an http(s) URL, or 'subprocess:<command>'");
}

}  // namespace adsorb
