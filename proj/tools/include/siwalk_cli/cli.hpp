#pragma once

#include <iosfwd>

namespace siwalk::cli {

/// Exit codes: 0 success, 1 verification or search failure (failure JSON on
/// `out`), 2 usage or input error (message on `err`).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace siwalk::cli
