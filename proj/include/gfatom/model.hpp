#pragma once

#include <stdexcept>
#include <utility>

namespace gfatom {

enum class ModelKind { DoubleLambda, NType };

// Cross-damping rate between two decay channels sharing a final state:
// beta * sqrt(gamma_a * gamma_b).  beta = 0 for perpendicular dipoles,
// beta = 1 for parallel ones.
double gdc_cross(double beta, double gamma_a, double gamma_b);

// Level structure and vacuum couplings.  Immutable after construction by the
// builders below; validate() enforces the domain.
struct AtomModel {
    ModelKind kind = ModelKind::DoubleLambda;
    double gamma31 = 0.0;   // |3> -> |1> decay rate, MHz
    double gamma32 = 0.0;   // |3> -> |2>
    double gamma41 = 0.0;   // |4> -> |1>
    double gamma42 = 0.0;   // |4> -> |2>
    double gamma314 = 0.0;  // cross damping of the |3>,|4> -> |1> channels
    double gamma324 = 0.0;  // cross damping of the |3>,|4> -> |2> channels
    double beta = 0.0;      // SGC factor in [0, 1]
    double omega = 0.0;     // excited splitting w4 - w3, MHz (double-lambda)

    double big_gamma3() const { return gamma31 + gamma32; }
    double big_gamma4() const { return gamma41 + gamma42; }
    double big_gamma34() const { return gamma314 + gamma324; }

    void validate() const;  // throws std::invalid_argument
};

// cw drive fields.  Rabi frequencies are real and non-negative (no phases);
// detunings are free reals.  omega_s/delta_s are meaningful for NType only.
struct DriveConfig {
    double omega_p = 0.0;  // probe Rabi frequency, MHz
    double omega_c = 0.0;  // coupling Rabi frequency, MHz
    double omega_s = 0.0;  // switching Rabi frequency, MHz (N-type)
    double delta_p = 0.0;  // probe detuning, MHz
    double delta_c = 0.0;  // coupling detuning, MHz
    double delta_s = 0.0;  // switching detuning, MHz (N-type)

    void validate() const;  // throws std::invalid_argument
};

// Probe couples |1>-|3> and |1>-|4>, coupling field |2>-|3> and |2>-|4>.
struct DoubleLambdaParams {
    double gamma31 = 0.0, gamma32 = 0.0, gamma41 = 0.0, gamma42 = 0.0;
    double beta = 0.0;
    double omega = 0.0;
    double omega_p = 0.0, omega_c = 0.0;
    double delta_p = 0.0, delta_c = 0.0;
};

// Probe couples |1>-|3>, coupling field |2>-|3>, switching field |2>-|4>.
struct NTypeParams {
    double gamma31 = 0.0, gamma32 = 0.0, gamma41 = 0.0, gamma42 = 0.0;
    double beta = 0.0;
    double omega_p = 0.0, omega_c = 0.0, omega_s = 0.0;
    double delta_p = 0.0, delta_c = 0.0, delta_s = 0.0;
};

std::pair<AtomModel, DriveConfig> build_double_lambda(
    const DoubleLambdaParams& p);
std::pair<AtomModel, DriveConfig> build_n_type(const NTypeParams& p);

}  // namespace gfatom
