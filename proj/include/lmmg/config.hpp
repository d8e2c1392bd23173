#pragma once

#include <string>

#include <lmmg/driver.hpp>

namespace lmmg {

/// Ready-made configuration for a built-in problem.  All presets share the
/// defaults of LmmgConfig except henon_perturbed, which runs with the
/// smaller gamma = 0.125 and lambda = 0.25 its stiffer nonlinearity needs.
LmmgConfig preset_config(const std::string& name);

/// Applies one key=value setting.  Unknown keys and malformed values are
/// rejected with a message naming the key.  Supported keys:
///   problem, epsilon, gamma, lambda, theta, eps_tol, max_elements,
///   initial_divisions, refinement (adaptive|uniform), initial_guess,
///   subspace_files (comma-separated stems), checkpoint_dir,
///   inner_iteration_cap, cg_rel_tol, scaled_threshold,
///   domain (lo_x,lo_y,hi_x,hi_y)
void apply_config_key(LmmgConfig& config, const std::string& key, const std::string& value);

/// Parses key = value lines into a configuration, starting from base.
/// Blank lines and lines starting with # are skipped; errors carry the
/// line number.
LmmgConfig parse_config_text(const std::string& text, LmmgConfig base = {});

LmmgConfig parse_config_file(const std::string& path, LmmgConfig base = {});

} // namespace lmmg
