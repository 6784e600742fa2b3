#pragma once

#include <Eigen/Dense>

#include "gfatom/generator.hpp"
#include "gfatom/types.hpp"

namespace gfatom {

// exp(m * t_us) * v — exact propagation of a time-invariant linear system.
Eigen::VectorXcd matexp_apply(const Eigen::MatrixXcd& m, double t_us,
                              const Eigen::VectorXcd& v);

// Fixed-step walker over the extended (g, g1, g2) system using a cached
// matrix exponential.  Exact for the time-invariant generator at any step
// size, which is what makes wide-grid scans affordable: one 48x48 exp per
// configuration plus cheap matrix-vector products.
class MomentWalker {
  public:
    MomentWalker(const GeneratorPair& gen, const GfState& g0);

    void set_step(double dt_us);  // prepares exp(M dt) for step()
    void step();                  // advance by the prepared step
    void jump_to(double t_us);    // exact jump via a fresh exponential

    double time() const { return t_; }
    double y() const;
    double n1() const;
    double n2() const;
    // Instantaneous counting rate d<N>/dt = trace(A1 g(t)); exact because the
    // trace functional annihilates the s = 1 generator.
    double emission_flux() const;
    const Eigen::VectorXcd& state48() const { return v_; }

  private:
    Eigen::MatrixXcd m_;      // 48x48 extended generator
    Eigen::MatrixXcd e_;      // cached exp(m dt)
    Eigen::MatrixXcd a1_;     // 16x16 gain block (for emission_flux)
    Eigen::VectorXcd v_;
    Eigen::VectorXcd scratch_;
    double dt_ = 0.0;
    double t_ = 0.0;
};

}  // namespace gfatom
