/// @file cli.hpp
/// @brief Command-line front end.  Exit codes are a stable contract:
/// 0 ok, 1 condition unsatisfied, 2 input error, 3 solver failure,
/// 4 blow-up, 5 assertion failure.

#pragma once

#include <iosfwd>

namespace chemo {

enum ExitCode : int {
    exit_ok = 0,
    exit_condition_unsatisfied = 1,
    exit_input_error = 2,
    exit_solver_failure = 3,
    exit_blow_up = 4,
    exit_assertion_failure = 5,
};

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace chemo
