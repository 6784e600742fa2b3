#include "gfatom/integrate.hpp"

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

// The stock Eigen adapter reports norm_inf with the scalar (complex) type;
// the error controller needs a real norm, so specialize for our state types.
namespace boost::numeric::odeint {

template <>
struct vector_space_norm_inf<Eigen::VectorXcd> {
    using result_type = double;
    double operator()(const Eigen::VectorXcd& v) const {
        return v.cwiseAbs().maxCoeff();
    }
};

template <>
struct vector_space_norm_inf<Eigen::MatrixXcd> {
    using result_type = double;
    double operator()(const Eigen::MatrixXcd& v) const {
        return v.cwiseAbs().maxCoeff();
    }
};

}  // namespace boost::numeric::odeint

namespace gfatom {

namespace {

namespace ode = boost::numeric::odeint;

template <class State>
using Dopri5 =
    ode::runge_kutta_dopri5<State, double, State, double,
                            ode::vector_space_algebra>;

double initial_step(double max_frequency, double t_us) {
    const double dt = 0.05 / std::max(max_frequency, 1e-3);
    return std::min(dt, t_us);
}

void check_time_tol(double t_us, double tol) {
    if (!(t_us >= 0.0) || !std::isfinite(t_us))
        throw std::invalid_argument("evolve: T must be finite and >= 0");
    if (!(tol > 0.0) || !std::isfinite(tol))
        throw std::invalid_argument("evolve: tol must be finite and > 0");
}

// integrate_adaptive with the stiffness guard rethrown in our wording.
template <class State, class Rhs>
void run_adaptive(Rhs&& rhs, State& v, double t0, double t1, double dt0,
                  double rtol, double atol) {
    auto stepper = ode::make_controlled(atol, rtol, Dopri5<State>());
    try {
        ode::integrate_adaptive(stepper, rhs, v, t0, t1, dt0);
    } catch (const ode::no_progress_error&) {
        throw std::runtime_error(
            "evolve: step-size underflow (stiffness guard tripped)");
    }
}

template <class State>
void check_finite(const State& v, const char* who) {
    if (!v.allFinite())
        throw std::runtime_error(std::string(who) +
                                 ": non-finite state detected");
}

double real_trace16(const Eigen::VectorXcd& v, int offset) {
    return (v(offset) + v(offset + 5) + v(offset + 10) + v(offset + 15))
        .real();
}

}  // namespace

GfState evolve(const GeneratorPair& gen, double s, const GfState& g0,
               double t_us, double tol) {
    check_time_tol(t_us, tol);
    if (t_us == 0.0) {
        GfState g = g0;
        g.time = 0.0;
        return g;
    }
    const Eigen::MatrixXcd a = gen.a_of_s(s);
    Eigen::VectorXcd v = g0.flattened();
    auto rhs = [&a](const Eigen::VectorXcd& g, Eigen::VectorXcd& dg, double) {
        dg.noalias() = a * g;
    };
    run_adaptive(rhs, v, 0.0, t_us, initial_step(gen.max_frequency, t_us),
                 tol, tol * 1e-3);
    check_finite(v, "evolve");
    return GfState::from_flat(v, t_us);
}

double MomentTrajectory::q_final() const {
    if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
    const MomentSample& m = samples.back();
    if (m.n1 == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (m.n2 - m.n1 * m.n1) / m.n1;
}

MomentTrajectory evolve_factorial_moments(
    const GeneratorPair& gen, const GfState& g0, double t_us, double tol,
    const std::vector<double>& sample_times) {
    check_time_tol(t_us, tol);

    std::vector<double> grid = sample_times;
    if (grid.empty()) grid.push_back(t_us);
    for (size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || grid[i] > t_us)
            throw std::invalid_argument(
                "evolve_factorial_moments: sample times must lie in [0, T]");
        if (i > 0 && grid[i] < grid[i - 1])
            throw std::invalid_argument(
                "evolve_factorial_moments: sample times must be sorted");
    }

    // Merged integration grid: starts at 0, strictly increasing, ends at T.
    std::vector<double> times{0.0};
    for (double t : grid)
        if (t > times.back()) times.push_back(t);
    if (t_us > times.back()) times.push_back(t_us);

    const Eigen::MatrixXcd m = extended_moment_generator(gen);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(48);
    v.segment(0, 16) = g0.flattened();

    std::vector<std::pair<double, MomentSample>> observed;
    observed.reserve(times.size());
    auto observer = [&observed](const Eigen::VectorXcd& w, double t) {
        MomentSample s;
        s.time = t;
        s.y = real_trace16(w, 0);
        s.n1 = real_trace16(w, 16);
        s.n2 = real_trace16(w, 32);
        observed.emplace_back(t, s);
    };
    auto rhs = [&m](const Eigen::VectorXcd& g, Eigen::VectorXcd& dg, double) {
        dg.noalias() = m * g;
    };

    auto stepper =
        ode::make_controlled(tol * 1e-3, tol, Dopri5<Eigen::VectorXcd>());
    try {
        ode::integrate_times(stepper, rhs, v, times.begin(), times.end(),
                             initial_step(gen.max_frequency, t_us), observer);
    } catch (const ode::no_progress_error&) {
        throw std::runtime_error(
            "evolve_factorial_moments: step-size underflow");
    }
    check_finite(v, "evolve_factorial_moments");

    MomentTrajectory out;
    out.samples.reserve(grid.size());
    for (double t : grid) {
        auto it = std::lower_bound(
            observed.begin(), observed.end(), t,
            [](const auto& p, double x) { return p.first < x; });
        // Every requested time is on the merged grid, hence observed.
        out.samples.push_back(it->second);
    }
    out.final_state = GfState::from_flat(v.segment(0, 16), times.back());
    out.g1_final = v.segment(16, 16);
    out.g2_final = v.segment(32, 16);
    return out;
}

std::vector<double> PnHierarchy::pn() const {
    std::vector<double> p(sigma_n.size());
    for (size_t n = 0; n < sigma_n.size(); ++n) {
        double v = real_trace16(sigma_n[n], 0);
        if (v < 0.0 && v >= -clamp_eps) v = 0.0;
        p[n] = v;
    }
    return p;
}

double PnHierarchy::deficit() const {
    double s = 0.0;
    for (double v : pn()) s += v;
    return 1.0 - s;
}

PnHierarchy evolve_pn(const GeneratorPair& gen, const GfState& g0, double t_us,
                      int n_max, double tol) {
    check_time_tol(t_us, tol);
    if (n_max < 0)
        throw std::invalid_argument("evolve_pn: n_max must be >= 0");

    // The 16 x (n_max + 1) hierarchy is flattened into one vector state; Map
    // views recover the matrix shape so the right-hand side is two GEMMs.
    const int cols = n_max + 1;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(16 * cols);
    v.segment(0, 16) = g0.flattened();

    if (t_us > 0.0) {
        const Eigen::MatrixXcd& a0 = gen.a0;
        const Eigen::MatrixXcd& a1 = gen.a1;
        auto rhs = [&a0, &a1, n_max, cols](const Eigen::VectorXcd& x,
                                           Eigen::VectorXcd& dx, double) {
            const Eigen::Map<const Eigen::MatrixXcd> s(x.data(), 16, cols);
            Eigen::Map<Eigen::MatrixXcd> ds(dx.data(), 16, cols);
            ds.noalias() = a0 * s;
            if (n_max > 0)
                ds.middleCols(1, n_max).noalias() +=
                    a1 * s.middleCols(0, n_max);
        };
        run_adaptive(rhs, v, 0.0, t_us, initial_step(gen.max_frequency, t_us),
                     tol, tol * 1e-3);
        check_finite(v, "evolve_pn");
    }

    PnHierarchy h;
    h.time = t_us;
    h.clamp_eps = std::max(tol, 1e-12);
    h.sigma_n.reserve(cols);
    for (int n = 0; n < cols; ++n) h.sigma_n.push_back(v.segment(16 * n, 16));
    h.deficit_warning = h.deficit() > 1e-3;
    return h;
}

MomentIntegrator::MomentIntegrator(const GeneratorPair& gen,
                                   const GfState& g0, double rtol,
                                   double atol)
    : m_(extended_moment_generator(gen)),
      v_(Eigen::VectorXcd::Zero(48)),
      rtol_(rtol),
      atol_(atol),
      dt0_(initial_step(gen.max_frequency, 1.0)) {
    v_.segment(0, 16) = g0.flattened();
}

void MomentIntegrator::step_to(double t_us) {
    if (t_us <= t_) return;
    auto rhs = [this](const Eigen::VectorXcd& g, Eigen::VectorXcd& dg,
                      double) { dg.noalias() = m_ * g; };
    run_adaptive(rhs, v_, t_, t_us, std::min(dt0_, t_us - t_), rtol_, atol_);
    check_finite(v_, "MomentIntegrator");
    t_ = t_us;
}

double MomentIntegrator::y() const { return real_trace16(v_, 0); }
double MomentIntegrator::n1() const { return real_trace16(v_, 16); }
double MomentIntegrator::n2() const { return real_trace16(v_, 32); }

}  // namespace gfatom
