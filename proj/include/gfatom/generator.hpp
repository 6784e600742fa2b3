#pragma once

#include <Eigen/Dense>

#include "gfatom/model.hpp"
#include "gfatom/types.hpp"

namespace gfatom {

// Counting-field generator acting on the flattened 16-component state:
// d(g)/dt = (A0 + s * A1) g.  The counting variable s multiplies only the
// spontaneous-emission gains into G_11 (the probed fluorescence channel), so
// A1 has nonzero entries in that single row.
struct GeneratorPair {
    Eigen::MatrixXcd a0;        // 16x16, 1/us
    Eigen::MatrixXcd a1;        // 16x16, 1/us
    double max_frequency = 0.0; // max(|delta|, omega_rabi, gamma, omega), MHz

    Eigen::MatrixXcd a_of_s(cd s) const { return a0 + s * a1; }
};

GeneratorPair assemble_generators(const AtomModel& model,
                                  const DriveConfig& drive);

// Block-triangular generator of (g, dg/ds, d2g/ds2) at s = 1, obtained by
// differentiating the affine-in-s equation of motion:
//   d(g)/dt  = A(1) g
//   d(g1)/dt = A1 g + A(1) g1
//   d(g2)/dt = 2 A1 g1 + A(1) g2
// Returns the 48x48 matrix over the stacked vector (g, g1, g2).
Eigen::MatrixXcd extended_moment_generator(const GeneratorPair& gen);

}  // namespace gfatom
