#pragma once

#include <vector>

#include "gfatom/generator.hpp"
#include "gfatom/types.hpp"

namespace gfatom {

// Adaptive explicit Runge-Kutta 4(5) propagation of the generating-function
// state at fixed counting variable s.  tol is the relative tolerance of the
// local error control; the absolute tolerance is tol * 1e-3 (defaults
// 1e-9 / 1e-12).  The initial step is bounded by 0.05 / max_frequency.
// Throws std::runtime_error on step-size underflow or a non-finite state.
GfState evolve(const GeneratorPair& gen, double s, const GfState& g0,
               double t_us, double tol = 1e-9);

struct MomentSample {
    double time = 0.0;  // us
    double y = 0.0;     // trace of g at s = 1 (stays 1)
    double n1 = 0.0;    // first factorial moment <N>
    double n2 = 0.0;    // second factorial moment <N(N-1)>
};

struct MomentTrajectory {
    std::vector<MomentSample> samples;  // on the requested time grid
    GfState final_state;                // g(s = 1) at the last time
    Eigen::VectorXcd g1_final;          // dg/ds at s = 1
    Eigen::VectorXcd g2_final;          // d2g/ds2 at s = 1

    const MomentSample& back() const { return samples.back(); }
    // Mandel Q at the final sample; NaN when no photons were counted.
    double q_final() const;
};

// Integrates the exact auxiliary blocks (g, dg/ds, d2g/ds2) at s = 1 in one
// block-triangular system and samples Y, <N^(1)>, <N^(2)> on sample_times
// (sorted, within [0, t_us]; empty means "final time only").
MomentTrajectory evolve_factorial_moments(
    const GeneratorPair& gen, const GfState& g0, double t_us,
    double tol = 1e-9, const std::vector<double>& sample_times = {});

struct PnHierarchy {
    std::vector<Eigen::VectorXcd> sigma_n;  // flattened sigma^(n), n = 0..n_max
    double time = 0.0;                      // us
    double clamp_eps = 1e-9;                // integration-tolerance clamp
    bool deficit_warning = false;           // deficit > 1e-3 (n_max too small)

    // P_n = Re trace sigma^(n); negatives within clamp_eps are clamped to 0.
    std::vector<double> pn() const;
    double deficit() const;  // 1 - sum_n P_n (truncation leakage)
};

// Photon-number-resolved hierarchy d(sigma_n)/dt = A0 sigma_n + A1 sigma_{n-1}
// with sigma_{-1} = 0, sigma_0(0) = g0, sigma_{n>=1}(0) = 0.
PnHierarchy evolve_pn(const GeneratorPair& gen, const GfState& g0, double t_us,
                      int n_max, double tol = 1e-9);

// Incremental adaptive-RK walker over the extended (g, g1, g2) system, used
// where observables need to extend a moment evolution stepwise.
class MomentIntegrator {
  public:
    MomentIntegrator(const GeneratorPair& gen, const GfState& g0,
                     double rtol = 1e-9, double atol = 1e-12);

    void step_to(double t_us);  // integrate forward; no-op if t_us <= time()

    double time() const { return t_; }
    double y() const;
    double n1() const;
    double n2() const;
    const Eigen::VectorXcd& state48() const { return v_; }

  private:
    Eigen::MatrixXcd m_;  // 48x48 extended generator
    Eigen::VectorXcd v_;
    double t_ = 0.0;
    double rtol_, atol_, dt0_;
};

}  // namespace gfatom
