#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fmest::cli {

// Exit status: 0 when every requested check passes, 1 on failed checks or
// runtime errors, 2 on usage errors.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fmest::cli
