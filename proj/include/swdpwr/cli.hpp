#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace swdpwr {

/// Entry point of the `swdpwr` command. `args` excludes the program name.
/// Exit status: 0 success, 2 invalid input, 1 internal failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace swdpwr
