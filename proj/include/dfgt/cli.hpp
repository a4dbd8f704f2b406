#pragma once

namespace dfgt {

//! Command-line frontend (gen / kde / cv / bench / verify subcommands).
//! Returns the process exit code: 0 on success, 1 when a verification
//! fails, 2 on usage or I/O errors.
int run_cli(int argc, const char* const* argv);

} // namespace dfgt
