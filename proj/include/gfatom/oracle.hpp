#pragma once

#include <string>
#include <utility>

#include "gfatom/generator.hpp"
#include "gfatom/integrate.hpp"
#include "gfatom/types.hpp"

// Brute-force cross-checks, implemented on linear-algebra routes independent
// of the time-stepping engine.  Test and diagnostic surface only.

namespace gfatom {

struct SteadyState {
    Eigen::VectorXcd sigma_ss;  // flattened steady density matrix
    double residual = 0.0;      // max-norm of A(1) sigma_ss
    double trace_error = 0.0;   // |trace - 1|
    bool degenerate = false;    // multi-dimensional null space (dark points)

    Eigen::Matrix4cd matrix() const {
        return Eigen::Map<const Eigen::Matrix4cd>(sigma_ss.data());
    }
};

// Solves A(1) sigma = 0 with trace(sigma) = 1 by replacing one redundant
// diagonal row with the trace constraint.  If the null space has more than
// one dimension (ideal dark points), returns the spectral projection of the
// seed state onto the stationary subspace — the steady state selected by
// long-time evolution from that seed — and flags degeneracy.
SteadyState null_space_steady_state(const GeneratorPair& gen,
                                    const GfState& seed = GfState::ground());

// Emission rate of a steady state: trace(A1 sigma_ss), the algebraic value of
// d<N>/dt at t -> infinity.
double steady_rate_from_state(const GeneratorPair& gen, const SteadyState& ss);

// Central-difference factorial moments from Y(s, T) evaluated at s = 1 -+ h
// (order-2 stencils); evolutions run at a pinned tight tolerance because the
// second difference cancels ~<N>^2 digits.  Cross-validation only.
// Requires 1e-6 <= h <= 1e-2.
std::pair<double, double> finite_difference_moments(const GeneratorPair& gen,
                                                    const GfState& g0,
                                                    double t_us, double h);

struct HierarchyReport {
    bool consistent = false;
    bool skipped = false;          // deficit too large; checks not run
    double deficit = 0.0;
    double max_state_error = 0.0;  // max |sum_n sigma_n - g(s=1)|
    double n1_error = 0.0;         // |sum n P_n - <N^(1)>|
    double n2_error = 0.0;         // |sum n(n-1) P_n - <N^(2)>|
    double state_tol = 1e-7;
    double moment_tol = 1e-6;
    std::string first_failure;     // empty when consistent
};

// Checks that the photon-number hierarchy resums to the s = 1 state and that
// its moment sums match the auxiliary-block moments.
HierarchyReport hierarchy_consistency(const GeneratorPair& gen,
                                      const GfState& g0, double t_us,
                                      int n_max);

}  // namespace gfatom
