#pragma once

#include "mdsenbd/errors.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mdsenbd::cli {

/// Exit status for a failure category; 0 is success.
[[nodiscard]] int exit_code(ErrorCategory category) noexcept;

/// Runs one subcommand (`simulate`, `fit`, `aic-table`, `impact`, `network`,
/// `corr`, `branching`, `synth`). `args` excludes the program name. The result
/// document goes to `out` (and to <out>/result.json with --out); a failure
/// writes one line `error: <category>: <message>` to `err`.
[[nodiscard]] int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mdsenbd::cli
