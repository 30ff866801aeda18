#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "robstab/linmodel.hpp"

namespace robstab {

// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitNrs = 3, kExitFailure = 4 };

// Time-constant specification accepted on the command line:
//   "5"                    every load state at 5 s
//   "6.5,5.9,5.35"         one value per load, in case order
//   "5:6.5,6:5.9,8:5.35"   one value per load, keyed by bus id
TauAssignment parse_tau_spec(const std::string& spec, const NetworkCase& c);

std::vector<std::pair<int, int>> parse_trips(const std::string& spec);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace robstab
