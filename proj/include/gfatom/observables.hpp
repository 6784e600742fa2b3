#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gfatom/generator.hpp"
#include "gfatom/model.hpp"
#include "gfatom/types.hpp"

// Physical observables built on the counting-moment evolution: stationary
// emission rate, Mandel Q, and detuning/intensity scans.

namespace gfatom {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RateOptions {
    double window_factor = 20.0;   // window length in units of 1/Gamma3
    double t_max_factor = 20000.0;  // walk cutoff in units of 1/Gamma3
    int window_samples = 40;
    double dark_floor = 1e-9;  // slopes at/below converge as "dark"
    bool use_rk45 = false;  // adaptive route instead of fixed-step matexp
    double rtol = 1e-9;
    double atol = 1e-12;
};

struct RateResult {
    double rate = 0.0;  // counts per microsecond
    bool converged = false;
    double t_final = 0.0;
    double n1_final = 0.0;
    double slope_change = 0.0;  // relative change between the last windows
};

// Long-time emission rate d<N>/dt, detected as the stabilized least-squares
// slope of <N>(t) over successive windows of 20/Gamma3.  The convergence
// criterion compares consecutive window slopes at relative tolerance `tol`.
RateResult steady_emission_rate(const AtomModel& model,
                                const DriveConfig& drive, double tol = 1e-5,
                                const RateOptions& opts = {});

enum class QStatus { Ok, Unconverged, InsufficientCounts, Dark };
std::string to_string(QStatus s);

struct QOptions {
    double target_counts = 50.0;  // auto mode sizes t_eval for this <N>
    double min_counts = 10.0;     // below this the estimate is flagged
    double dark_rate = 1e-6;      // rate floor treated as dark
    double t_cap_factor = 120000.0;  // auto-mode cap in units of 1/Gamma3
    double rate_tol = 1e-5;
    bool use_rk45 = false;
    double rtol = 1e-9;
    double atol = 1e-12;
    double rate_hint = kNaN;  // skip the rate walk when already known
};

struct QResult {
    double q = kNaN;
    QStatus status = QStatus::Unconverged;
    double t_eval = 0.0;
    double n1 = 0.0;
    double delta_q = kNaN;  // |Q(1.5 t_eval) - Q(t_eval)| stability measure
    double rate = kNaN;
};

// Mandel Q = (<N(N-1)> - <N>^2) / <N> at a counting time long enough for the
// asymptote.  t_eval_us = 0 picks the time automatically: starting from the
// emission rate it extends the counting window by factors of 1.5 until Q
// drifts by less than tol * max(1, |Q|) per extension, so strongly bunched
// points are held to a relative rather than an absolute drift bound (dark
// points return a NaN sentinel, never 0).  An explicit t_eval_us evaluates
// exactly there whenever
// any counts accumulated, flagging low statistics instead of refusing, with
// the drift measured against 1.5 t_eval.
QResult mandel_q(const AtomModel& model, const DriveConfig& drive,
                 double t_eval_us = 0.0, double tol = 1e-2,
                 const QOptions& opts = {});

struct ScanAxis {
    std::string param;  // delta_p/c/s, omega_p/c/s, or beta
    std::vector<double> grid;
};

struct ScanOptions {
    int threads = 0;  // 0 = hardware concurrency
    bool compute_q = true;
    double t_eval_us = 0.0;  // 0 = auto per point
    double rate_tol = 1e-5;
    double q_tol = 1e-2;
    double dark_threshold = 1e-6;
    RateOptions rate;
};

struct ScanPoint {
    double value1 = 0.0;
    double value2 = kNaN;  // NaN on 1-D scans
    double intensity_raw = 0.0;
    double intensity_norm = 0.0;
    double q = kNaN;
    QStatus q_status = QStatus::Dark;
    double q_delta = kNaN;
    double t_eval = 0.0;
    bool rate_converged = false;
    bool dark = false;

    bool converged() const {
        return rate_converged && q_status != QStatus::Unconverged;
    }
};

struct ScanResult {
    ScanAxis axis1;
    ScanAxis axis2;  // empty grid on 1-D scans
    std::vector<ScanPoint> points;  // axis1-outer ordering
    bool normalized = false;
    bool all_dark = false;
    double max_raw = 0.0;
    AtomModel model;   // base parameters before axis substitution
    DriveConfig drive;
    ScanOptions opts;

    const ScanPoint& at(int i1, int i2 = 0) const {
        const int n2 = axis2.grid.empty() ? 1 : static_cast<int>(axis2.grid.size());
        return points[static_cast<std::size_t>(i1) * n2 + i2];
    }
    bool all_converged() const;
};

// Overwrites one drive/model parameter; `beta` also refreshes the
// cross-damping rates it controls.
void apply_axis(AtomModel& model, DriveConfig& drive, const std::string& name,
                double value);

// Scales intensities by the scan maximum; a maximum below dark_threshold
// flags the scan all-dark and zeroes the normalized column instead of
// dividing by noise.  Idempotent.
void normalize_intensity(std::vector<double>& values, double dark_threshold,
                         bool* all_dark = nullptr);

// Emission line shape along one swept parameter.
ScanResult line_shape_scan(const AtomModel& model, const DriveConfig& drive,
                           const ScanAxis& axis, const ScanOptions& opts = {});

// Intensity/Q map over two swept parameters, axis1-outer row ordering.
ScanResult detuning_map_2d(const AtomModel& model, const DriveConfig& drive,
                           const ScanAxis& axis1, const ScanAxis& axis2,
                           const ScanOptions& opts = {});

std::vector<double> linspace(double lo, double hi, int n);

struct Peak {
    double x = 0.0;
    double height = 0.0;
    int index = 0;
};

// Local maxima above min_height_frac of the global maximum, with quadratic
// sub-grid refinement (uniform grids).
std::vector<Peak> find_peaks(const std::vector<double>& x,
                             const std::vector<double>& y,
                             double min_height_frac = 0.05);

// Width of the contiguous region around the global maximum lying above
// `level`, with linear edge interpolation.  NaN when the level never crosses.
double width_at_level(const std::vector<double>& x,
                      const std::vector<double>& y, double level);

}  // namespace gfatom
