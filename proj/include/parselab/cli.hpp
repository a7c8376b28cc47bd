#pragma once

#include <string>
#include <vector>

namespace parselab::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace parselab::cli
