#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bpre::cli {

// Exit codes: 0 ok, 1 usage, 2 contract error, 3 budget error.
auto run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) -> int;

}  // namespace bpre::cli
