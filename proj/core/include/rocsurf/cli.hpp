#ifndef ROCSURF_CLI_HPP
#define ROCSURF_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace rocsurf {

// Entry point shared by the installed binary and in-process tests.
// args excludes the program name. Exit codes: 0 success, 1 validation
// error, 2 numerical failure; errors are written to err as JSON.
int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace rocsurf

#endif
