// nonexp: command-line front end over the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "nonexp/nonexp.h"

namespace {

struct Options {
  std::string input;
  std::string config;
  std::string g;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> q;
  std::optional<double> epsilon;
  std::optional<double> lambda_step;
  std::optional<std::uint64_t> probes;
  std::string format = "json";
};

const char* const kCommands[][2] = {
    {"classify", "Classify a linear map on linf^n as extremal or decompose it"},
    {"decompose", "Emit a decomposition certificate"},
    {"pin-check", "Check boundary pinning on samples"},
    {"urysohn", "Build the Urysohn pair for (f, x0, gamma)"},
    {"pin-violate", "Build the nonexpansiveness violation witness"},
    {"oracle", "Brute-force extremality oracle for grid maps"},
    {"points", "Classify ball points (interior, exposed, ...)"},
    {"pf-probe", "Membership in P_{f,q}, ray extension and merging"},
    {"porosity", "Porosity witness and empty-ball certification"},
};

int run(const std::string& command, const Options& o) {
  nlohmann::json config = nlohmann::json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) {
      std::cerr << "nonexp: cannot open config " << o.config << "\n";
      return 1;
    }
    try {
      config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "nonexp: malformed config " << o.config << ": " << e.what() << "\n";
      return 1;
    }
  }
  config["command"] = command;
  if (!o.input.empty()) config["input"] = o.input;
  if (!o.g.empty()) config["g"] = o.g;
  if (o.seed) config["seed"] = *o.seed;
  if (o.tol) config["tol"] = *o.tol;
  if (o.q) config["q"] = *o.q;
  if (o.epsilon) config["epsilon"] = *o.epsilon;
  if (o.lambda_step) config["lambda_step"] = *o.lambda_step;
  if (o.probes) config["probes"] = *o.probes;

  char* report = nullptr;
  int exit_code = 1;
  const nxp_status st =
      nxp_run(config.dump().c_str(), o.format == "csv" ? 1 : 0, &report, &exit_code);
  if (st != NXP_OK) {
    std::cerr << "nonexp: " << nxp_last_error() << "\n";
    return 1;
  }
  std::fputs(report, stdout);
  nxp_string_free(report);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extremal nonexpansive mappings: certificates, witnesses and probes"};
  app.set_version_flag("--version", std::string(nxp_version()));
  app.require_subcommand(1);

  Options o;
  for (const auto& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--input", o.input, "Mapping JSON file");
    sub->add_option("--config", o.config, "Config JSON file; flags override its fields");
    sub->add_option("--g", o.g, "Second mapping JSON file (pf-probe, porosity, decompose)");
    sub->add_option("--seed", o.seed, "Seed for randomized commands");
    sub->add_option("--tol", o.tol, "Tolerance (default 1e-9, or NONEXP_TOL)");
    sub->add_option("--q", o.q, "Window parameter q in (0, 1/2)");
    sub->add_option("--epsilon", o.epsilon, "Neighbourhood size for the porosity witness");
    sub->add_option("--lambda-step", o.lambda_step, "Lambda grid step");
    sub->add_option("--probes", o.probes, "Number of porosity probes");
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return run(app.get_subcommands().front()->get_name(), o);
}
