#pragma once

#include <filesystem>
#include <iosfwd>

#include "ifp/io.hpp"

namespace ifp::cli {

enum ExitCode : int {
  kOk = 0,
  kConditionFailed = 1,  ///< check: the solvability assumption does not hold
  kConfigError = 2,
  kNumericalFailure = 3,
};

/// Entry point of the `ifp` executable. Results go to `out`, JSON error objects to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs one parsed config document. Output files are written under `out_dir`.
/// Throws InputError / NumericalError; `run` maps those to exit codes.
int run_config(const io::Json& config, const std::filesystem::path& out_dir, int threads, std::ostream& out);

/// Figure settings with every field of `j` applied over the defaults.
FigureSettings figure_settings_from_json(const io::Json& j);
io::Json to_json(const FigureSettings& s);

}  // namespace ifp::cli
