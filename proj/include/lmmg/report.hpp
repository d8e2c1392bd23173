#pragma once

#include <string>
#include <vector>

#include <lmmg/driver.hpp>

namespace lmmg {

/// Convergence history as CSV with header
///   N,elements,dofs,eta,res_norm,energy,minimax_steps,sigma
/// one row per generation record, LF line endings, floating point values
/// with 17 significant digits.
std::string run_csv_text(const RunLog& log);

/// Writes the CSV atomically (temporary file plus rename).
void write_run_csv(const std::string& path, const RunLog& log);

/// Reads a CSV written by write_run_csv back into records.
std::vector<GenerationRecord> read_run_csv(const std::string& path);

/// Least-squares slope of log(eta) against log(elements) over the last
/// `window` records (all of them when fewer).  Needs at least two records
/// with distinct element counts.
double indicator_slope(const std::vector<GenerationRecord>& records, int window);

/// Indicator value at a prescribed element count, interpolated linearly in
/// the log-log plane (extrapolated from the nearest pair outside the
/// covered range).  Used to compare runs whose records never land on the
/// same mesh size.
double eta_at_elements(const std::vector<GenerationRecord>& records, double target_elements);

} // namespace lmmg
