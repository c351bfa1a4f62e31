#pragma once

#include <iosfwd>

#include "ddsflow/system.hpp"

namespace ddsflow::cli {

// Exit codes: 0 success, 1 domain error (report printed), 2 usage.
// The store root comes from --store or the DDSFLOW_STORE env var.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace ddsflow::cli
