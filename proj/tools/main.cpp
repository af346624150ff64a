#include <CLI11.hpp>

#include "fracmild/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fracmild: mild-solution solvers for fractional McKean-Vlasov, "
               "HJB-Isaacs, anticipating and forward-backward systems"};
  app.require_subcommand(1);

  fracmild::cli::Options opts;
  std::vector<CLI::App*> subs;
  for (const auto& name : fracmild::cli::known_subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opts.out_dir, "output directory for artifacts");
    sub->add_option("--seed", opts.seed, "seed for sampling audits");
    sub->add_option("--threads", opts.threads, "reserved; computations are deterministic");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);
  opts.subcommand = app.get_subcommands().front()->get_name();
  return fracmild::cli::run(opts);
}
