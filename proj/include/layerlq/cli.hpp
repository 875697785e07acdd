#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace layerlq {

/// Entry point of the layerlq command line; `args` excludes the program name.
/// Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace layerlq
