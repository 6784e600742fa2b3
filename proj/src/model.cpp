#include "gfatom/model.hpp"

#include <cmath>
#include <string>

namespace gfatom {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

double gdc_cross(double beta, double gamma_a, double gamma_b) {
    require(finite(beta) && beta >= 0.0 && beta <= 1.0,
            "gdc_cross: beta must lie in [0, 1]");
    require(finite(gamma_a) && gamma_a >= 0.0,
            "gdc_cross: gamma_a must be a finite non-negative rate");
    require(finite(gamma_b) && gamma_b >= 0.0,
            "gdc_cross: gamma_b must be a finite non-negative rate");
    return beta * std::sqrt(gamma_a * gamma_b);
}

void AtomModel::validate() const {
    for (double g : {gamma31, gamma32, gamma41, gamma42})
        require(finite(g) && g >= 0.0,
                "AtomModel: decay rates must be finite and non-negative");
    require(finite(beta) && beta >= 0.0 && beta <= 1.0,
            "AtomModel: beta must lie in [0, 1]");
    require(finite(omega), "AtomModel: omega must be finite");
    // Cross rates must be the SGC values for the stored beta.
    const double tol = 1e-9 * std::max(1.0, big_gamma3() + big_gamma4());
    require(std::abs(gamma314 - gdc_cross(beta, gamma31, gamma41)) <= tol,
            "AtomModel: gamma314 inconsistent with beta*sqrt(gamma31*gamma41)");
    require(std::abs(gamma324 - gdc_cross(beta, gamma32, gamma42)) <= tol,
            "AtomModel: gamma324 inconsistent with beta*sqrt(gamma32*gamma42)");
}

void DriveConfig::validate() const {
    for (double w : {omega_p, omega_c, omega_s})
        require(finite(w) && w >= 0.0,
                "DriveConfig: Rabi frequencies must be finite and >= 0");
    for (double d : {delta_p, delta_c, delta_s})
        require(finite(d), "DriveConfig: detunings must be finite");
}

std::pair<AtomModel, DriveConfig> build_double_lambda(
    const DoubleLambdaParams& p) {
    AtomModel m;
    m.kind = ModelKind::DoubleLambda;
    m.gamma31 = p.gamma31;
    m.gamma32 = p.gamma32;
    m.gamma41 = p.gamma41;
    m.gamma42 = p.gamma42;
    m.beta = p.beta;
    m.omega = p.omega;
    m.gamma314 = gdc_cross(p.beta, p.gamma31, p.gamma41);
    m.gamma324 = gdc_cross(p.beta, p.gamma32, p.gamma42);
    m.validate();

    DriveConfig d;
    d.omega_p = p.omega_p;
    d.omega_c = p.omega_c;
    d.delta_p = p.delta_p;
    d.delta_c = p.delta_c;
    d.validate();
    return {m, d};
}

std::pair<AtomModel, DriveConfig> build_n_type(const NTypeParams& p) {
    AtomModel m;
    m.kind = ModelKind::NType;
    m.gamma31 = p.gamma31;
    m.gamma32 = p.gamma32;
    m.gamma41 = p.gamma41;
    m.gamma42 = p.gamma42;
    m.beta = p.beta;
    m.omega = 0.0;  // no excited-splitting parameter enters the N-type equations
    m.gamma314 = gdc_cross(p.beta, p.gamma31, p.gamma41);
    m.gamma324 = gdc_cross(p.beta, p.gamma32, p.gamma42);
    m.validate();

    DriveConfig d;
    d.omega_p = p.omega_p;
    d.omega_c = p.omega_c;
    d.omega_s = p.omega_s;
    d.delta_p = p.delta_p;
    d.delta_c = p.delta_c;
    d.delta_s = p.delta_s;
    d.validate();
    return {m, d};
}

}  // namespace gfatom
