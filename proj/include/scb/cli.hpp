#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scb/scorer.hpp"

namespace scb {

/// Parses a --scorer value: linear:random:K[:SEED], linear:@FILE.json,
/// region:Y0,X0,Y1,X1[;...], region:@FILE.json or remote:URL. Synthetic
/// scorers take their input size from `height`×`width` unless the JSON
/// file names one.
ScorerPtr parse_scorer(const std::string& spec, std::size_t height, std::size_t width,
                       int timeout_ms = 30000, std::size_t remote_batch = 32);

/// Runs the command line `args` (args[0] is the program name). Returns the
/// process exit code: 0 success, 2 validation, 3 transport, 4 invariant.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Desk-scale self checks; returns true when every suite passes.
bool run_selftest(std::ostream& out);

}  // namespace scb
