#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kal {

// Exit codes: 0 ok, 1 other failure, 2 bad config or arguments,
// 3 hypothesis violations (check), 4 numerical abort.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kal
