#pragma once

#include <string>

#include "gfatom/config.hpp"

// Subcommand drivers shared by the CLI binary and the test-suite.  Each
// returns a process exit code: 0 success, 1 usage/configuration error,
// 2 numerical non-convergence.

namespace gfatom {

struct CommandOptions {
    std::string out_dir = ".";
    int threads = 0;  // 0 = hardware concurrency
};

int cmd_spectrum(const RunConfig& rc, const CommandOptions& opts);
int cmd_map2d(const RunConfig& rc, const CommandOptions& opts);
int cmd_pn(const RunConfig& rc, const CommandOptions& opts);
int cmd_validate(const RunConfig& rc, const CommandOptions& opts);

}  // namespace gfatom
