#pragma once

#include <array>
#include <string>
#include <vector>

#include "tessera/bench.hpp"
#include "tessera/grid.hpp"

namespace tessera {

/// Exceedance table of an FP32 run against the FP64 reference: the share
/// of interior points whose absolute / relative deviation passes each
/// threshold. Percentages are non-increasing across thresholds.
struct ErrorTable {
    std::array<double, 3> abs_thresholds{0.1, 0.5, 1.0};
    std::array<double, 3> rel_thresholds{0.01, 0.03, 0.05};
    std::array<double, 3> abs_exceed_pct{};
    std::array<double, 3> rel_exceed_pct{};
};

ErrorTable compare_precision(const Grid& fp64, const GridF& fp32,
                             const std::array<double, 3>& abs_thresholds = {0.1, 0.5, 1.0},
                             const std::array<double, 3>& rel_thresholds = {0.01, 0.03, 0.05});
/// FP64-vs-FP64 variant (all-zero for identical fields).
ErrorTable compare_precision(const Grid& fp64, const Grid& other,
                             const std::array<double, 3>& abs_thresholds = {0.1, 0.5, 1.0},
                             const std::array<double, 3>& rel_thresholds = {0.01, 0.03, 0.05});

/// Thermal diffusion on a square plate: Gaussian hot spot over a cold
/// ambient, explicit 5-point scheme, mu = 0.23 by default. Desk scale is
/// 480x480 for 9500 steps; full scale (9600x9600, 3.8e6 steps) keeps the
/// same code path for hardware that can afford it.
struct CaseStudyConfig {
    double plate_side_mm = 15.0;
    double mu = 0.23;
    Index extent = 480;
    Index steps = 9500;
    double peak_celsius = 100.0;
    double ambient_celsius = 20.0;
    double sigma_cells = 0.0;  // 0 -> extent / 8
    std::vector<Index> checkpoints{1000, 5000, 9500};
    ExecPath path = ExecPath::tessellate;
    int threads = 1;
    Index sample_every = 25;  // center-temperature sampling stride
};

/// Parses a line-oriented `key = value` config ('#' comments). Rejects
/// unstable mu at parse time.
CaseStudyConfig parse_case_config(const std::string& path);
/// Applies full scale (9600x9600, 3.8e6 steps, checkpoint at the end).
void apply_full_scale(CaseStudyConfig& cfg);

struct CaseStudyResult {
    std::vector<Index> series_steps;
    std::vector<double> center_series;  // FP64 center temperature per sample
    std::vector<Index> checkpoint_steps;
    std::vector<ErrorTable> checkpoint_errors;
    double final_center = 0.0;
    std::vector<std::string> artifacts;  // files written
};

/// Runs the study (FP64 on the chosen path, FP32 twin on the reference
/// executor), writing heatmaps (PGM), the FP32-FP64 difference map (PPM),
/// the center-temperature series, the error table, the final grid dump
/// and a metadata file into `out_dir`.
CaseStudyResult case_study_heat(const CaseStudyConfig& cfg, const std::string& out_dir);

}  // namespace tessera
