#pragma once

#include "fwi/cli/config.hpp"

namespace fwi::cli {

// Exit codes: 0 ok, 2 config/usage, 3 data, 4 numerical instability, 5 I/O.
enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kInstability = 4, kIoError = 5 };

struct CommandArgs {
  std::string command;
  RunConfig config;
  std::string dataset;    // train / simulate batch mode
  std::string labeled;    // augment
  std::string unlabeled;  // augment
  std::string model;      // simulate single-model mode
  std::string data;       // invert-physics observed survey
  std::string init;       // invert-physics starting map
  std::string data_root;  // evaluate
  std::string out;
  std::string setup;      // evaluate setup id
  int seeds = 3;          // evaluate seed count
};

// Runs a workflow; maps every failure to the documented exit codes and
// writes <out>/run_manifest.txt on success.
int dispatch(const CommandArgs& args);

}  // namespace fwi::cli
