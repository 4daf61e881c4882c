#include <array>
#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "adsorb/cli.hpp"

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);

  CLI::App app{"LLM-guided adsorption-energy pipeline"};
  app.set_version_flag("--version", std::string("adsorb ") + adsorb::kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config")
      ->description("INI config file with [run] etc. sections; flags override it");
  app.allow_config_extras(true);

  adsorb::RunConfig run;
  std::array<int, 2> run_size{2, 2};
  CLI::App* run_cmd = app.add_subcommand("run", "run the full pipeline");
  run_cmd->add_option("--adsorbate", run.query.adsorbate_key, "registry key or extXYZ path")
      ->required();
  run_cmd->add_option("--catalyst", run.query.catalyst_formula,
                      "catalyst formula, e.g. Pt or Cu3Ag");
  run_cmd->add_option("--miller", run.query.miller, "surface cut, e.g. 1,1,1")
      ->delimiter(',');
  run_cmd->add_option("--slab", run.query.slab_path,
                      "extXYZ slab file; skips slab construction");
  run_cmd->add_option("--bulk", run.bulk_kind, "fcc | bcc | l12");
  run_cmd->add_option("--lattice-a", run.lattice_a, "cubic lattice constant, A");
  run_cmd->add_option("--size", run_size, "surface supercell nx,ny")->delimiter(',');
  run_cmd->add_option("--layers", run.layers, "slab layers");
  run_cmd->add_option("--vacuum", run.vacuum, "vacuum above the slab, A");
  run_cmd->add_option("--strategy", run.strategy, "agent | heuristic | random | all")
      ->check(CLI::IsMember({"agent", "heuristic", "random", "all"}));
  run_cmd->add_option("--calculator", run.calculator,
                      "builtin | http(s) URL | subprocess:<command>");
  run_cmd->add_option("--calc-timeout", run.calc_timeout_s, "calculator timeout, s");
  run_cmd->add_option("--llm", run.llm_spec, "mock:<fixture dir> or chat endpoint URL");
  run_cmd->add_option("--model", run.llm.model, "chat model name");
  run_cmd->add_option("--llm-temperature", run.llm.temperature, "sampling temperature");
  run_cmd->add_option("--llm-top-p", run.llm.top_p, "nucleus sampling cutoff");
  run_cmd->add_option("--llm-retries", run.llm.max_retries,
                      "retry budget for transport, parsing, and critic cycles");
  run_cmd->add_option("--llm-timeout", run.llm.timeout_s, "chat timeout, s");
  run_cmd->add_flag("--use-llm-critic", run.llm.use_llm_critic,
                    "add an LLM review pass to the rule-based critic");
  run_cmd->add_flag("--use-llm-indexer", run.llm.use_llm_indexer,
                    "let an LLM propose binding indices before validation");
  run_cmd->add_option("--seed", run.seed, "root RNG seed");
  run_cmd->add_option("--parallelism", run.parallelism,
                      "relaxation workers; 0 uses all cores");
  run_cmd->add_option("--out-dir", run.out_dir, "output directory");
  run_cmd->add_option("--random-count", run.random_count,
                      "samples for the random strategy");
  run_cmd->add_option("--binding-index", run.binding_index,
                      "adsorbate binding atom for heuristic placement");
  run_cmd->add_option("--fallback", run.fallback, "on agent failure: error | heuristic")
      ->check(CLI::IsMember({"error", "heuristic"}));
  run_cmd->add_flag("--no-timestamps", run.no_timestamps,
                    "omit timestamp and wall time from the report");
  run_cmd->add_option("--height", run.placement.height, "binding-center height, A");
  run_cmd->add_option("--jitter", run.placement.jitter, "heuristic x-y jitter, A");
  run_cmd->add_option("--min-clearance", run.placement.min_clearance,
                      "slab-adsorbate collision threshold, A");
  run_cmd->add_option("--n-var", run.placement.n_var, "azimuthal variants per site");
  run_cmd->add_option("--n-max", run.placement.n_max, "agent configuration cap");
  run_cmd->add_option("--match-margin", run.placement.match_margin,
                      "site-matching distance margin, A");
  run_cmd->add_flag("--mass-weighted", run.placement.mass_weighted,
                    "mass-weight the binding center");
  run_cmd->add_option("--fmax", run.fire.fmax, "force convergence threshold, eV/A");
  run_cmd->add_option("--max-steps", run.fire.max_steps, "optimizer step cap");
  run_cmd->add_option("--max-step-length", run.fire.max_step_length,
                      "per-atom step cap, A");
  run_cmd->add_option("--bond-factor", run.anomaly.bond_factor,
                      "covalent-radius factor for bond detection");
  run_cmd->add_option("--stretch-ratio", run.anomaly.stretch_ratio,
                      "bond stretch counted as dissociation");
  run_cmd->add_option("--desorb-distance", run.anomaly.desorb_distance,
                      "adsorbate-surface gap counted as desorption, A");
  run_cmd->add_option("--reconstruct-displacement", run.anomaly.reconstruct_displacement,
                      "surface drift counted as reconstruction, A");

  adsorb::EvaluateConfig evaluate;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "metrics over a records fixture");
  eval_cmd->add_option("records", evaluate.records_path, "CSV table or solutions JSON")
      ->required();
  eval_cmd->add_option("--epsilon", evaluate.eval.epsilon, "energy tolerance, eV");

  adsorb::EnumerateConfig enumerate;
  CLI::App* enum_cmd = app.add_subcommand("enumerate", "list adsorption sites of a slab");
  enum_cmd->add_option("--slab", enumerate.slab_path, "extXYZ slab file")->required();
  enum_cmd->add_option("--window", enumerate.layer_window,
                       "top-layer z window, A");

  adsorb::RelaxConfig relax;
  CLI::App* relax_cmd = app.add_subcommand("relax", "relax one structure");
  relax_cmd->add_option("--in", relax.in_path, "extXYZ input")->required();
  relax_cmd->add_option("--out", relax.out_path, "write the relaxed structure here");
  relax_cmd->add_option("--calculator", relax.calculator,
                        "builtin | http(s) URL | subprocess:<command>");
  relax_cmd->add_option("--calc-timeout", relax.calc_timeout_s, "calculator timeout, s");
  relax_cmd->add_option("--fmax", relax.fire.fmax, "force convergence threshold, eV/A");
  relax_cmd->add_option("--max-steps", relax.fire.max_steps, "optimizer step cap");

  adsorb::BuildSlabConfig build;
  std::array<int, 2> build_size{2, 2};
  CLI::App* build_cmd = app.add_subcommand("build-slab", "write a slab extXYZ file");
  build_cmd->add_option("--catalyst", build.catalyst, "catalyst formula")->required();
  build_cmd->add_option("--bulk", build.bulk_kind, "fcc | bcc | l12");
  build_cmd->add_option("--lattice-a", build.lattice_a, "cubic lattice constant, A");
  build_cmd->add_option("--miller", build.miller, "surface cut, e.g. 1,1,1")
      ->delimiter(',');
  build_cmd->add_option("--size", build_size, "surface supercell nx,ny")->delimiter(',');
  build_cmd->add_option("--layers", build.layers, "slab layers");
  build_cmd->add_option("--vacuum", build.vacuum, "vacuum above the slab, A");
  build_cmd->add_option("--out", build.out_path, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) {
      run.nx = run_size[0];
      run.ny = run_size[1];
      adsorb::cmd_run(run, std::cout);
    } else if (eval_cmd->parsed()) {
      adsorb::cmd_evaluate(evaluate, std::cout);
    } else if (enum_cmd->parsed()) {
      adsorb::cmd_enumerate(enumerate, std::cout);
    } else if (relax_cmd->parsed()) {
      adsorb::cmd_relax(relax, std::cout);
    } else if (build_cmd->parsed()) {
      build.nx = build_size[0];
      build.ny = build_size[1];
      adsorb::cmd_build_slab(build, std::cout);
    }
    return 0;
  } catch (const adsorb::Error& e) {
    std::cerr << "error (" << adsorb::to_string(e.kind()) << "): " << e.what() << "\n";
    return adsorb::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
