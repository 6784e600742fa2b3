#include "gfatom/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gfatom/integrate.hpp"
#include "gfatom/propagator.hpp"

namespace gfatom {

namespace {

// Least-squares slope of equally spaced samples y_i at spacing dt.
double ls_slope(const std::vector<double>& y, double dt) {
    const std::size_t n = y.size();
    const double tbar = 0.5 * dt * static_cast<double>(n - 1);
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= static_cast<double>(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double tc = static_cast<double>(i) * dt - tbar;
        num += tc * (y[i] - ybar);
        den += tc * tc;
    }
    return num / den;
}

double mandel_from_moments(double n1, double n2) {
    return (n2 - n1 * n1) / n1;
}

}  // namespace

std::string to_string(QStatus s) {
    switch (s) {
        case QStatus::Ok: return "ok";
        case QStatus::Unconverged: return "unconverged";
        case QStatus::InsufficientCounts: return "insufficient_counts";
        case QStatus::Dark: return "dark";
    }
    return "unknown";
}

RateResult steady_emission_rate(const AtomModel& model,
                                const DriveConfig& drive, double tol,
                                const RateOptions& opts) {
    const double g3 = model.big_gamma3();
    if (!(g3 > 0.0))
        throw std::invalid_argument(
            "total decay width of level |3> must be positive for rate "
            "detection");
    if (!(tol > 0.0)) throw std::invalid_argument("rate tolerance must be > 0");

    const GeneratorPair gen = assemble_generators(model, drive);
    const int samples = std::max(4, opts.window_samples);
    const double window = opts.window_factor / g3;
    const double t_max = opts.t_max_factor / g3;
    const double dt = window / samples;

    std::unique_ptr<MomentWalker> walker;
    std::unique_ptr<MomentIntegrator> rk;
    if (opts.use_rk45) {
        rk = std::make_unique<MomentIntegrator>(gen, GfState::ground(),
                                                opts.rtol, opts.atol);
    } else {
        walker = std::make_unique<MomentWalker>(gen, GfState::ground());
        walker->set_step(dt);
    }
    auto advance = [&](double t_target) -> double {
        if (walker) {
            walker->step();
            return walker->n1();
        }
        rk->step_to(t_target);
        return rk->n1();
    };

    RateResult res;
    const int n_windows =
        static_cast<int>(std::ceil(t_max / window - 1e-9));
    double last_n1 = 0.0;  // <N>(0) = 0
    double prev_slope = kNaN;
    std::vector<double> ys;
    ys.reserve(samples + 1);
    for (int k = 0; k < n_windows; ++k) {
        const double t_start = k * window;
        ys.clear();
        ys.push_back(last_n1);
        for (int j = 1; j <= samples; ++j)
            ys.push_back(advance(t_start + j * dt));
        last_n1 = ys.back();

        const double slope = ls_slope(ys, dt);
        res.rate = slope;
        res.t_final = t_start + window;
        res.n1_final = last_n1;
        if (k > 0) {
            const double num = std::abs(slope - prev_slope);
            const double den =
                std::max(std::abs(slope), std::abs(prev_slope));
            res.slope_change = den > 0.0 ? num / den : 0.0;
            // Relative stabilization, or both slopes already at the dark
            // floor where relative comparison is meaningless.
            if (num <= tol * den || den <= opts.dark_floor) {
                res.converged = true;
                break;
            }
        }
        prev_slope = slope;
    }
    return res;
}

QResult mandel_q(const AtomModel& model, const DriveConfig& drive,
                 double t_eval_us, double tol, const QOptions& opts) {
    const double g3 = model.big_gamma3();
    if (!(g3 > 0.0))
        throw std::invalid_argument(
            "total decay width of level |3> must be positive for Q "
            "evaluation");

    QResult r;
    double rate = opts.rate_hint;
    bool rate_converged = true;
    if (std::isnan(rate)) {
        RateOptions ro;
        ro.use_rk45 = opts.use_rk45;
        ro.rtol = opts.rtol;
        ro.atol = opts.atol;
        const RateResult rr =
            steady_emission_rate(model, drive, opts.rate_tol, ro);
        rate = rr.rate;
        rate_converged = rr.converged;
    }
    r.rate = rate;

    const bool auto_mode = !(t_eval_us > 0.0);
    if (auto_mode && !(rate > opts.dark_rate)) {
        r.status = QStatus::Dark;  // q stays NaN, never a fake zero
        return r;
    }

    const GeneratorPair gen = assemble_generators(model, drive);
    MomentWalker walker(gen, GfState::ground());
    std::unique_ptr<MomentIntegrator> rk;
    if (opts.use_rk45)
        rk = std::make_unique<MomentIntegrator>(gen, GfState::ground(),
                                                opts.rtol, opts.atol);
    auto moments_at = [&](double t, double& n1, double& n2) {
        if (rk) {
            rk->step_to(t);
            n1 = rk->n1();
            n2 = rk->n2();
        } else {
            walker.jump_to(t);
            n1 = walker.n1();
            n2 = walker.n2();
        }
    };

    if (auto_mode) {
        // Extend the counting window geometrically until Q settles; the
        // variance asymptote is approached like 1/t, so each 1.5x step
        // shrinks the remaining drift by a fixed factor.
        const double cap = opts.t_cap_factor / g3;
        double t = std::min(std::max(100.0 / g3, opts.target_counts / rate),
                            cap / 1.5);
        double n1_cur;
        double n2_cur;
        moments_at(t, n1_cur, n2_cur);
        if (!(n1_cur > 1e-9)) {
            r.t_eval = t;
            r.status = QStatus::Dark;
            return r;
        }
        double q_cur = mandel_from_moments(n1_cur, n2_cur);
        bool settled = false;
        while (1.5 * t <= cap * (1.0 + 1e-12)) {
            t *= 1.5;
            double n1n;
            double n2n;
            moments_at(t, n1n, n2n);
            const double q_next = mandel_from_moments(n1n, n2n);
            r.delta_q = std::abs(q_next - q_cur);
            q_cur = q_next;
            n1_cur = n1n;
            if (r.delta_q <= tol * std::max(1.0, std::abs(q_cur))) {
                settled = true;
                break;
            }
        }
        r.t_eval = t;
        r.n1 = n1_cur;
        r.q = q_cur;
        if (!rate_converged || !settled) {
            r.status = QStatus::Unconverged;
        } else if (n1_cur < opts.min_counts) {
            r.status = QStatus::InsufficientCounts;
            r.q = kNaN;  // the cap kept the statistics too low
        } else {
            r.status = QStatus::Ok;
        }
        return r;
    }

    // Fixed counting time: evaluate exactly there, measure the drift against
    // 1.5 t_eval, and keep the value even at low statistics.
    r.t_eval = t_eval_us;
    double n1a;
    double n2a;
    moments_at(r.t_eval, n1a, n2a);
    r.n1 = n1a;
    if (!(n1a > 1e-9)) {
        r.status = QStatus::Dark;  // nothing was counted at all
        return r;
    }
    double n1b;
    double n2b;
    moments_at(1.5 * r.t_eval, n1b, n2b);
    r.q = mandel_from_moments(n1a, n2a);
    r.delta_q = std::abs(mandel_from_moments(n1b, n2b) - r.q);
    if (!rate_converged || !(r.delta_q <= tol * std::max(1.0, std::abs(r.q)))) {
        r.status = QStatus::Unconverged;
    } else if (n1a < opts.min_counts) {
        r.status = QStatus::InsufficientCounts;
    } else {
        r.status = QStatus::Ok;
    }
    return r;
}

void apply_axis(AtomModel& model, DriveConfig& drive, const std::string& name,
                double value) {
    if (name == "delta_p") {
        drive.delta_p = value;
    } else if (name == "delta_c") {
        drive.delta_c = value;
    } else if (name == "delta_s") {
        drive.delta_s = value;
    } else if (name == "omega_p") {
        drive.omega_p = value;
    } else if (name == "omega_c") {
        drive.omega_c = value;
    } else if (name == "omega_s") {
        drive.omega_s = value;
    } else if (name == "beta") {
        model.beta = value;
        model.gamma314 = gdc_cross(value, model.gamma31, model.gamma41);
        model.gamma324 = gdc_cross(value, model.gamma32, model.gamma42);
    } else {
        throw std::invalid_argument("unknown scan axis '" + name + "'");
    }
}

void normalize_intensity(std::vector<double>& values, double dark_threshold,
                         bool* all_dark) {
    double mx = 0.0;
    for (double v : values) mx = std::max(mx, v);
    if (mx < dark_threshold) {
        if (all_dark != nullptr) *all_dark = true;
        std::fill(values.begin(), values.end(), 0.0);
        return;
    }
    if (all_dark != nullptr) *all_dark = false;
    for (double& v : values) v /= mx;
}

namespace {

ScanResult run_scan(const AtomModel& model, const DriveConfig& drive,
                    const ScanAxis& axis1, const ScanAxis& axis2,
                    const ScanOptions& opts) {
    if (axis1.grid.empty() || (!axis2.param.empty() && axis2.grid.empty()))
        throw std::invalid_argument("scan grid empty");
    model.validate();
    drive.validate();
    {
        // Reject unknown axis names up front, before any point is computed.
        AtomModel m = model;
        DriveConfig d = drive;
        apply_axis(m, d, axis1.param, axis1.grid.front());
        if (!axis2.param.empty())
            apply_axis(m, d, axis2.param, axis2.grid.front());
    }

    ScanResult res;
    res.axis1 = axis1;
    res.axis2 = axis2;
    res.model = model;
    res.drive = drive;
    res.opts = opts;
    const std::size_t n2 = axis2.grid.empty() ? 1 : axis2.grid.size();
    res.points.resize(axis1.grid.size() * n2);

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= res.points.size()) return;
            try {
                AtomModel m = model;
                DriveConfig d = drive;
                ScanPoint p;
                p.value1 = axis1.grid[i / n2];
                apply_axis(m, d, axis1.param, p.value1);
                if (!axis2.grid.empty()) {
                    p.value2 = axis2.grid[i % n2];
                    apply_axis(m, d, axis2.param, p.value2);
                }

                RateOptions ro = opts.rate;
                ro.dark_floor = std::max(ro.dark_floor, opts.dark_threshold);
                const RateResult rr =
                    steady_emission_rate(m, d, opts.rate_tol, ro);
                p.intensity_raw = rr.rate;
                p.rate_converged = rr.converged;
                p.dark = rr.rate < opts.dark_threshold;
                if (opts.compute_q) {
                    QOptions qo;
                    qo.rate_hint = rr.rate;
                    qo.dark_rate = opts.dark_threshold;
                    qo.use_rk45 = opts.rate.use_rk45;
                    qo.rtol = opts.rate.rtol;
                    qo.atol = opts.rate.atol;
                    const QResult qr =
                        mandel_q(m, d, opts.t_eval_us, opts.q_tol, qo);
                    p.q = qr.q;
                    p.q_status = qr.status;
                    p.q_delta = qr.delta_q;
                    p.t_eval = qr.t_eval;
                    if (!rr.converged && p.q_status == QStatus::Ok)
                        p.q_status = QStatus::Unconverged;
                } else {
                    p.q_status = QStatus::Ok;  // nothing requested, nothing failed
                }
                res.points[i] = p;
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int n_threads = opts.threads > 0
                        ? opts.threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min<int>(n_threads,
                                          static_cast<int>(res.points.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<double> raw(res.points.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = res.points[i].intensity_raw;
    res.max_raw = raw.empty() ? 0.0 : *std::max_element(raw.begin(), raw.end());
    normalize_intensity(raw, opts.dark_threshold, &res.all_dark);
    for (std::size_t i = 0; i < raw.size(); ++i)
        res.points[i].intensity_norm = raw[i];
    res.normalized = true;
    return res;
}

}  // namespace

bool ScanResult::all_converged() const {
    for (const auto& p : points)
        if (!p.converged()) return false;
    return true;
}

ScanResult line_shape_scan(const AtomModel& model, const DriveConfig& drive,
                           const ScanAxis& axis, const ScanOptions& opts) {
    return run_scan(model, drive, axis, ScanAxis{}, opts);
}

ScanResult detuning_map_2d(const AtomModel& model, const DriveConfig& drive,
                           const ScanAxis& axis1, const ScanAxis& axis2,
                           const ScanOptions& opts) {
    if (axis2.param.empty())
        throw std::invalid_argument("2-D scan requires a second axis");
    return run_scan(model, drive, axis1, axis2, opts);
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 2) throw std::invalid_argument("linspace needs at least 2 points");
    if (!(lo < hi)) throw std::invalid_argument("linspace needs lo < hi");
    std::vector<double> v(n);
    const double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) v[i] = lo + i * h;
    v.back() = hi;
    return v;
}

std::vector<Peak> find_peaks(const std::vector<double>& x,
                             const std::vector<double>& y,
                             double min_height_frac) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("find_peaks needs matching arrays, n >= 3");
    const double ymax = *std::max_element(y.begin(), y.end());
    const double floor = min_height_frac * ymax;
    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= floor && y[i] > 0))
            continue;
        Peak p;
        p.index = static_cast<int>(i);
        p.x = x[i];
        p.height = y[i];
        const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        if (std::abs(denom) > 1e-300) {
            // Quadratic refinement on a uniform grid.
            const double h = x[i + 1] - x[i];
            const double dx = 0.5 * (y[i - 1] - y[i + 1]) / denom;
            p.x = x[i] + dx * h;
            p.height = y[i] - 0.125 * (y[i - 1] - y[i + 1]) *
                                  (y[i - 1] - y[i + 1]) / denom;
        }
        peaks.push_back(p);
    }
    return peaks;
}

double width_at_level(const std::vector<double>& x,
                      const std::vector<double>& y, double level) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument(
            "width_at_level needs matching arrays, n >= 3");
    const std::size_t imax = static_cast<std::size_t>(
        std::max_element(y.begin(), y.end()) - y.begin());
    if (!(y[imax] > level)) return kNaN;

    double left = kNaN;
    for (std::size_t j = imax; j-- > 0;) {
        if (y[j] < level) {
            left = x[j] + (level - y[j]) * (x[j + 1] - x[j]) /
                              (y[j + 1] - y[j]);
            break;
        }
    }
    double right = kNaN;
    for (std::size_t j = imax + 1; j < y.size(); ++j) {
        if (y[j] < level) {
            right = x[j - 1] + (level - y[j - 1]) * (x[j] - x[j - 1]) /
                                   (y[j] - y[j - 1]);
            break;
        }
    }
    return right - left;  // NaN propagates if either edge never crossed
}

}  // namespace gfatom
