#pragma once

namespace catrag {

// Entry point shared by the binary and the CLI tests. Returns the process
// exit code: 0 success, 2 input error, 3 provider error, 4 internal error.
int cli_main(int argc, const char* const* argv);

} // namespace catrag
