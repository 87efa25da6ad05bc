#pragma once

namespace windgrid::cli {

// Full argument parsing and dispatch. Returns the process exit code:
// 0 success, 1 usage error, 2 data/format error, 3 infeasible problem,
// 4 convergence/divergence failure.
int run(int argc, char** argv);

}  // namespace windgrid::cli
