#include "gfatom/propagator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>

namespace gfatom {

Eigen::VectorXcd matexp_apply(const Eigen::MatrixXcd& m, double t_us,
                              const Eigen::VectorXcd& v) {
    if (t_us == 0.0) return v;
    return (m * t_us).exp() * v;
}

MomentWalker::MomentWalker(const GeneratorPair& gen, const GfState& g0)
    : m_(extended_moment_generator(gen)),
      a1_(gen.a1),
      v_(Eigen::VectorXcd::Zero(48)),
      scratch_(48) {
    v_.segment(0, 16) = g0.flattened();
}

void MomentWalker::set_step(double dt_us) {
    if (!(dt_us > 0.0))
        throw std::invalid_argument("MomentWalker: step must be > 0");
    if (dt_us != dt_) {
        e_ = (m_ * dt_us).exp();
        dt_ = dt_us;
    }
}

void MomentWalker::step() {
    if (dt_ == 0.0)
        throw std::logic_error("MomentWalker: set_step before step");
    scratch_.noalias() = e_ * v_;
    v_.swap(scratch_);
    t_ += dt_;
}

void MomentWalker::jump_to(double t_us) {
    if (t_us < t_)
        throw std::invalid_argument("MomentWalker: cannot jump backwards");
    if (t_us == t_) return;
    v_ = matexp_apply(m_, t_us - t_, v_);
    t_ = t_us;
}

namespace {
double real_trace16(const Eigen::VectorXcd& v, int offset) {
    return (v(offset) + v(offset + 5) + v(offset + 10) + v(offset + 15))
        .real();
}
}  // namespace

double MomentWalker::y() const { return real_trace16(v_, 0); }
double MomentWalker::n1() const { return real_trace16(v_, 16); }
double MomentWalker::n2() const { return real_trace16(v_, 32); }

double MomentWalker::emission_flux() const {
    // A1 feeds only the G_11 component, so the trace of A1 g is its row-0
    // action on the g block.
    return (a1_.row(0) * v_.segment(0, 16)).value().real();
}

}  // namespace gfatom
