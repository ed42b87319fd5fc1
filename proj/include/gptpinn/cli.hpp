#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gptpinn {

/// Runs one CLI subcommand. args[0] is the program name.
/// Returns 0 on success, 1 on a usage error, 2 on a runtime error.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err);
int cli_dispatch(int argc, char** argv);

}  // namespace gptpinn
