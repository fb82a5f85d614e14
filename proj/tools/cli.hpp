#pragma once

#include <ostream>

namespace hydroprice {

// Exit codes: 0 success, 1 bad arguments or parameters, 2 bad or missing data.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hydroprice
