#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plnav {

/// Command-line entry point. `args` excludes the program name. Returns 0 on success, 1 on
/// runtime failure and 2 on usage errors (usage text goes to `err`).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

} // namespace plnav
