#pragma once

namespace anchorloc::cli {

/// Entry point shared by the anchorloc binary and the tests.
/// Exit codes: 0 success, 2 input/config error, 3 empty result.
int run(int argc, const char* const* argv);

} // namespace anchorloc::cli
