#ifndef CALICO_CLI_HPP
#define CALICO_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace calico {

/// Entry point shared by the binary and the tests. Exit codes: 0 success or
/// gate passed, 1 analysis/violation failure, 2 usage or parse failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace calico

#endif  // CALICO_CLI_HPP
