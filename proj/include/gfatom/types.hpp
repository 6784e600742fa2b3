#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

// Conventions used throughout:
//  - levels |1>,|2> are ground states, |3>,|4> excited states (1-based labels)
//  - all rates/frequencies in MHz, interpreted as 1/us in the equations of
//    motion; time in us; no 2*pi factors anywhere
//  - the 4x4 generating-function matrix G_ij is flattened column-major into a
//    16-component complex vector

namespace gfatom {

using cd = std::complex<double>;

// Flattened (column-major) index of G_ij for 1-based level labels i, j.
constexpr int flat_index(int i, int j) { return (j - 1) * 4 + (i - 1); }

// Counting-variable-dependent state G_ij(s, t).  At s = 1 this is the density
// matrix; diagonal sums over the photon-number hierarchy stay normalized.
struct GfState {
    Eigen::Matrix4cd entries = Eigen::Matrix4cd::Zero();  // G_ij
    double time = 0.0;                                    // us

    // Pure population in |k>, k = 1..4.
    static GfState level(int k) {
        if (k < 1 || k > 4)
            throw std::out_of_range("GfState::level: k must be 1..4");
        GfState g;
        g.entries(k - 1, k - 1) = 1.0;
        return g;
    }
    // Default initial condition: everything in the ground state |1>.
    static GfState ground() { return level(1); }

    Eigen::VectorXcd flattened() const {
        return Eigen::Map<const Eigen::VectorXcd>(entries.data(), 16);
    }
    static GfState from_flat(const Eigen::Ref<const Eigen::VectorXcd>& v,
                             double t) {
        GfState g;
        g.entries = Eigen::Map<const Eigen::Matrix4cd>(v.data());
        g.time = t;
        return g;
    }

    cd trace() const { return entries.trace(); }
    // |trace - 1|; meaningful at s = 1 where the trace is conserved.
    double trace_error() const { return std::abs(entries.trace() - cd(1.0)); }
    // max_ij |G_ij - conj(G_ji)|; zero for physical states at real s.
    double hermiticity_defect() const {
        return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    }
};

}  // namespace gfatom
