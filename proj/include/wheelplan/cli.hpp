#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wheelplan {

/// Entry point of the `wheelplan` executable; `args` excludes the program name.
/// Returns 0 on success, 1 on a domain failure (error code on stderr), 2 on a
/// usage or parse error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wheelplan
