#pragma once

namespace ynk {

// Entry point for the ynkit binary; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace ynk
