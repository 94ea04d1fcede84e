#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ridgekit {

/// Exit codes: 0 success, 1 usage or input error, 2 numerical failure or an
/// invalid plan.
int cli_main(int argc, char** argv);
/// Same, with arguments excluding the program name and explicit streams.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ridgekit
