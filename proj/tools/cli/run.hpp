#pragma once

#include <string>
#include <vector>

#include "cli/config.hpp"
#include "cli/output.hpp"

namespace mixedop::cli {

const std::vector<std::string>& subcommands();

struct RunResult {
  Artifacts artifacts;
  bool certified = false;
};

/// Runs one subcommand in memory. Alpha grids fan out into alpha_NNN/ sub-runs computed in
/// parallel plus a grid summary. Library errors propagate.
RunResult compute(const std::string& subcommand, const RunConfig& cfg);

/// compute + commit to cfg.out_dir. Exit status: 0 certified, 1 ran but not certified,
/// 2 configuration error, 3 computation error (structured JSON error on stderr, no artifacts).
int run(const std::string& subcommand, const RunConfig& cfg);

}  // namespace mixedop::cli
