#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace moss::cli {

enum Exit : int { ok = 0, usage = 2, data = 3, runtime = 4 };

// Entry point shared by main() and the tests; args exclude the program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace moss::cli
