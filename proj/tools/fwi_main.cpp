#include <CLI11.hpp>

#include <cstdlib>

#include "fwi/cli/dispatch.hpp"

// Desk-scale waveform-inversion workbench: synthetic plume datasets, elastic
// forward modeling, physics-based FWI, a data-driven inverter, and
// physics-consistent augmentation, all behind one binary.
int main(int argc, char** argv) {
  CLI::App app{"fwi - seismic full-waveform inversion workbench"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Configuration file (section.key = value lines)")->capture_default_str();

  fwi::cli::CommandArgs args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", args.out, "Output directory")->required();
    return sub;
  };

  CLI::App* gen = add_common(app.add_subcommand("generate-data", "Generate labeled plume scenarios"));
  (void)gen;

  CLI::App* sim = add_common(app.add_subcommand("simulate", "Forward-model seismograms"));
  sim->add_option("--model", args.model, "Single velocity map (FWI1) to simulate");
  sim->add_option("--dataset", args.dataset, "Dataset manifest; fills in missing gathers");

  CLI::App* train = add_common(app.add_subcommand("train", "Train the data-driven inverter"));
  train->add_option("--dataset", args.dataset, "Labeled dataset manifest")->required();
  int epochs = -1, batch = -1;
  double lr = -1;
  long long seed = -1;
  train->add_option("--epochs", epochs, "Override train.epochs");
  train->add_option("--batch", batch, "Override train.batch_size");
  train->add_option("--lr", lr, "Override train.lr");
  app.add_option("--seed", seed, "Override global.seed");

  CLI::App* aug = add_common(app.add_subcommand("augment", "Physics-consistent data augmentation"));
  aug->add_option("--labeled", args.labeled, "Labeled dataset manifest")->required();
  aug->add_option("--unlabeled", args.unlabeled, "Unlabeled gathers manifest")->required();
  int rounds = -1;
  aug->add_option("--rounds", rounds, "Override augment.rounds");

  CLI::App* inv = add_common(app.add_subcommand("invert-physics", "Regularized physics-based FWI"));
  inv->add_option("--data", args.data, "Observed survey (FWI1)")->required();
  inv->add_option("--init", args.init, "Starting velocity map (FWI1)")->required();
  double reg_weight = -1;
  int iters = -1;
  inv->add_option("--reg-weight", reg_weight, "Override fwi.reg_weight");
  inv->add_option("--iters", iters, "Override invert.max_iterations");

  CLI::App* ev = add_common(app.add_subcommand("evaluate", "Run a generalization setup"));
  ev->add_option("--setup", args.setup, "Setup id: i, ii, iii, iv, u1, u2")->required();
  ev->add_option("--data-root", args.data_root, "Directory holding manifest.txt with partition tags")->required();
  ev->add_option("--seeds", args.seeds, "Number of seeds")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : fwi::cli::kConfigError;
  }

  try {
    args.config = fwi::cli::parse_config(config_path);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return fwi::cli::kConfigError;
  }
  if (seed >= 0) args.config.seed = static_cast<uint64_t>(seed);
  if (epochs > 0) args.config.train.epochs = epochs;
  if (batch > 0) args.config.train.batch_size = batch;
  if (lr >= 0) args.config.train.lr = lr;
  if (rounds > 0) args.config.augment_rounds = rounds;
  if (reg_weight >= 0) args.config.fwi.reg_weight = reg_weight;
  if (iters > 0) args.config.invert.max_iterations = iters;

  if (args.data_root.empty())
    if (const char* env = std::getenv("FWI_DATA_ROOT")) args.data_root = env;

  args.command = app.get_subcommands().front()->get_name();
  return fwi::cli::dispatch(args);
}
