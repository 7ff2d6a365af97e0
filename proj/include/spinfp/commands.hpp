#pragma once
// The three CLI commands, separated from main() so they can be unit-tested.
// Each command throws on failure; the binary maps exception types to exit
// codes (0 success, 2 config, 3 numeric, 4 I/O).

#include <iosfwd>
#include <string>

#include "spinfp/config.hpp"

namespace spinfp {

// Evaluate the configured model over the configured grid.
SpectrumTrace compute_spectrum(const RunConfig& cfg, int n_threads = 1);

// spectrum: compute and write the CSV (out_override, when nonempty, wins
// over the configured output path).  Returns the path written.
std::string cmd_spectrum(const RunConfig& cfg, const std::string& out_override,
                         int n_threads, std::ostream& log);

// analyze: read a spectrum CSV and run one analysis mode
// (fwhm | fit | peaks | field), printing a human line followed by
// machine-readable key=value lines.
void cmd_analyze(const std::string& csv_path, const std::string& mode,
                 std::ostream& out);

// sweep: vary one parameter (N | T | tau | omega | Bz), measuring the FWHM of
// each spectrum next to the cavity-analogy prediction.  Per-point analysis
// failures leave empty cells and the sweep continues.
std::string cmd_sweep(const RunConfig& cfg, const std::string& out_override,
                      int n_threads, std::ostream& log);

}  // namespace spinfp
