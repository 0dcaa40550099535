#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rlab {

/// Runs the command line (args exclude the program name). Exit codes:
/// 0 success, 1 runtime failure or failing check, 2 usage error.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace rlab
