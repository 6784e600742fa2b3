#include "gfatom/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace gfatom {

namespace {

// Hermitize, renormalize the trace, and fill in the quality figures.
SteadyState finish(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& raw,
                   bool degenerate) {
    Eigen::Matrix4cd m = Eigen::Map<const Eigen::Matrix4cd>(raw.data());
    m = (0.5 * (m + m.adjoint())).eval();
    const cd tr = m.trace();
    if (std::abs(tr) < 1e-6)
        throw std::runtime_error(
            "steady state lost its trace; stationary subspace inconsistent "
            "with the seed state");
    m /= tr;
    SteadyState ss;
    ss.sigma_ss = Eigen::Map<const Eigen::VectorXcd>(m.data(), 16);
    ss.residual = (a * ss.sigma_ss).cwiseAbs().maxCoeff();
    ss.trace_error = std::abs(m.trace() - cd(1.0, 0.0));
    ss.degenerate = degenerate;
    return ss;
}

}  // namespace

SteadyState null_space_steady_state(const GeneratorPair& gen,
                                    const GfState& seed) {
    const Eigen::MatrixXcd a = gen.a_of_s(cd(1.0, 0.0));
    const double scale = a.cwiseAbs().maxCoeff();

    // Trace conservation makes one diagonal row redundant; replace the
    // population row (1,1) with the trace constraint and solve directly.
    Eigen::MatrixXcd b = a;
    b.row(0).setZero();
    b(0, flat_index(1, 1)) = 1.0;
    b(0, flat_index(2, 2)) = 1.0;
    b(0, flat_index(3, 3)) = 1.0;
    b(0, flat_index(4, 4)) = 1.0;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(16);
    rhs(0) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(b);
    if (lu.isInvertible()) {
        const Eigen::VectorXcd v = lu.solve(rhs);
        if ((a * v).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, scale))
            return finish(a, v, false);
    }

    // Dark configurations carry a multi-dimensional stationary subspace; the
    // physical answer is the spectral projection of the seed onto it, which
    // is what long-time evolution from that seed relaxes to.
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed on the generator");
    const double ktol = std::max(1e-9, 1e-12 * scale);
    std::vector<int> kernel;
    for (int k = 0; k < 16; ++k)
        if (std::abs(es.eigenvalues()(k)) <= ktol) kernel.push_back(k);
    if (kernel.empty())
        throw std::runtime_error("no stationary mode found in the generator");

    Eigen::FullPivLU<Eigen::MatrixXcd> vlu(es.eigenvectors());
    if (!vlu.isInvertible())
        throw std::runtime_error(
            "generator eigenbasis is numerically defective; cannot project "
            "the seed onto the stationary subspace");
    const Eigen::VectorXcd coef = vlu.solve(Eigen::VectorXcd(seed.flattened()));
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(16);
    for (int k : kernel) v += coef(k) * es.eigenvectors().col(k);
    return finish(a, v, kernel.size() > 1);
}

double steady_rate_from_state(const GeneratorPair& gen, const SteadyState& ss) {
    return (gen.a1.row(0) * ss.sigma_ss).value().real();
}

std::pair<double, double> finite_difference_moments(const GeneratorPair& gen,
                                                    const GfState& g0,
                                                    double t_us, double h) {
    if (!(h >= 1e-6 && h <= 1e-2))
        throw std::invalid_argument(
            "finite-difference step h must lie in [1e-6, 1e-2]");
    if (!std::isfinite(t_us) || t_us < 0.0)
        throw std::invalid_argument("evolution time must be finite and >= 0");

    // The second difference cancels roughly <N>^2 / h^2 digits, so the three
    // evolutions run at a pinned tight tolerance regardless of caller taste.
    const double tol = 1e-12;
    auto y_at = [&](double s) {
        return evolve(gen, s, g0, t_us, tol).trace().real();
    };
    const double yp = y_at(1.0 + h);
    const double y0 = y_at(1.0);
    const double ym = y_at(1.0 - h);
    return {(yp - ym) / (2.0 * h), (yp - 2.0 * y0 + ym) / (h * h)};
}

HierarchyReport hierarchy_consistency(const GeneratorPair& gen,
                                      const GfState& g0, double t_us,
                                      int n_max) {
    HierarchyReport r;
    const double tol = 1e-10;

    const PnHierarchy h = evolve_pn(gen, g0, t_us, n_max, tol);
    r.deficit = h.deficit();
    if (r.deficit > 1e-7) {
        r.skipped = true;
        r.first_failure =
            "probability deficit exceeds 1e-7; n_max truncates the count "
            "distribution, resummation check skipped";
        return r;
    }

    // Resummation: the hierarchy evaluated at s = 1 must reproduce the
    // generating state integrated directly at s = 1.
    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(16);
    for (const auto& sig : h.sigma_n) sum += sig;
    const GfState g1 = evolve(gen, 1.0, g0, t_us, tol);
    r.max_state_error =
        (sum - Eigen::VectorXcd(g1.flattened())).cwiseAbs().maxCoeff();

    const MomentTrajectory m = evolve_factorial_moments(gen, g0, t_us, tol);
    const std::vector<double> pn = h.pn();
    double n1_sum = 0.0;
    double n2_sum = 0.0;
    for (std::size_t n = 0; n < pn.size(); ++n) {
        const double nn = static_cast<double>(n);
        n1_sum += nn * pn[n];
        n2_sum += nn * (nn - 1.0) * pn[n];
    }
    const double n1 = m.back().n1;
    const double n2 = m.back().n2;
    r.n1_error = std::abs(n1_sum - n1);
    r.n2_error = std::abs(n2_sum - n2);

    // Tail terms beyond n_max carry weight ~n_max^2 in the second moment;
    // widen the moment tolerance by the corresponding deficit bound.
    const double nm = static_cast<double>(n_max);
    const double tail = 100.0 * r.deficit * nm * nm;
    r.moment_tol = std::max({1e-6, 1e-6 * std::abs(n2), tail});

    r.consistent = r.max_state_error < r.state_tol &&
                   r.n1_error < r.moment_tol && r.n2_error < r.moment_tol;
    if (!r.consistent) {
        std::ostringstream os;
        if (r.max_state_error >= r.state_tol)
            os << "resummed state mismatch " << r.max_state_error
               << " exceeds " << r.state_tol;
        else if (r.n1_error >= r.moment_tol)
            os << "first-moment mismatch " << r.n1_error << " exceeds "
               << r.moment_tol;
        else
            os << "second-moment mismatch " << r.n2_error << " exceeds "
               << r.moment_tol;
        r.first_failure = os.str();
    }
    return r;
}

}  // namespace gfatom
