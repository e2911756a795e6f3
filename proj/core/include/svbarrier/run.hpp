#pragma once

#include <svbarrier/config.hpp>

namespace svb {

// Full batch run: prices, optional validators, CSV/JSON artifacts in
// cfg.out_dir. Returns 0 on success, 2 when any cell failed numerically
// (details in errors.csv / run_meta.json). Config errors throw before this.
int run(const RunConfig& cfg);

// Plot-ready long-format data: basis shape lattice and the solved gradient.
void emit_plot_data(const RunConfig& cfg, const BatchResult& batch,
                    const std::string& out_dir);

} // namespace svb
