#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "taylornet/config.hpp"

namespace taylornet {

enum ExitCode { kExitOk = 0, kExitVerdict = 1, kExitUsage = 2, kExitNumerical = 3 };

// Config keys accepted by a command (empty for unknown commands).
std::vector<KeySpec> command_schema(const std::string& command);
std::vector<std::string> command_names();

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace taylornet
