#ifndef SOLICIT_CLI_H_
#define SOLICIT_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace solicit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsageError = 2;

// Runs one subcommand (args exclude the program name). Returns 0 on success,
// 1 on data errors and 2 on usage errors. Every run that writes outputs also
// writes a manifest next to them.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace solicit

#endif  // SOLICIT_CLI_H_
