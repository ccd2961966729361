#pragma once

namespace fgs::cli {

/// Parses argv and dispatches to one of the subcommands.  Returns the
/// process exit code: 0 on success, 1 on numerical failure (a diagnostic
/// report is still written), 2 on usage errors.
int run(int argc, char** argv);

} // namespace fgs::cli
