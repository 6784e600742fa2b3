#include <cmath>
#include <complex>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "doctest.h"
#include "gfatom/generator.hpp"
#include "gfatom/model.hpp"
#include "test_util.hpp"

using namespace gfatom;

namespace {

using M4 = Eigen::Matrix4cd;
using M16 = Eigen::MatrixXcd;

M16 kron(const M4& a, const M4& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

// Independent construction of the s = 1 generator from the Hamiltonian and
// the damped-channel rate matrices, flattened column-major with
// vec(A X B) = (B^T (x) A) vec(X).  Everything here is built from the 4x4
// operators, sharing no code with assemble_generators.
M4 hamiltonian(const AtomModel& m, const DriveConfig& d) {
    M4 h = M4::Zero();
    h(1, 1) = d.delta_c - d.delta_p;
    h(2, 2) = -d.delta_p;
    h(3, 3) = (m.kind == ModelKind::DoubleLambda)
                  ? m.omega - d.delta_p
                  : d.delta_c - d.delta_p - d.delta_s;
    auto couple = [&h](int a, int b, double om) {
        h(a - 1, b - 1) += -0.5 * om;
        h(b - 1, a - 1) += -0.5 * om;
    };
    couple(1, 3, d.omega_p);
    if (m.kind == ModelKind::DoubleLambda) {
        couple(1, 4, d.omega_p);
        couple(2, 3, d.omega_c);
        couple(2, 4, d.omega_c);
    } else {
        couple(2, 3, d.omega_c);
        couple(2, 4, d.omega_s);
    }
    return h;
}

M4 jump(int to, int from) {
    M4 c = M4::Zero();
    c(to - 1, from - 1) = 1.0;
    return c;
}

// Gain part of the channel into |g>: sum_jk R_jk c_j rho c_k^dag with
// c_1 = |g><3|, c_2 = |g><4| and R = [[2 gamma_g3, 2 cross], [2 cross,
// 2 gamma_g4]].
M16 channel_gain(int g, double gamma3, double gamma4, double cross) {
    const M4 c[2] = {jump(g, 3), jump(g, 4)};
    const double r[2][2] = {{2.0 * gamma3, 2.0 * cross},
                            {2.0 * cross, 2.0 * gamma4}};
    M16 out = M16::Zero(16, 16);
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
            out += r[j][k] * kron(c[k].conjugate(), c[j]);
    return out;
}

M16 channel_loss(int g, double gamma3, double gamma4, double cross) {
    const M4 c[2] = {jump(g, 3), jump(g, 4)};
    const double r[2][2] = {{2.0 * gamma3, 2.0 * cross},
                            {2.0 * cross, 2.0 * gamma4}};
    const M4 id = M4::Identity();
    M16 out = M16::Zero(16, 16);
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            M4 ckcj = c[k].adjoint() * c[j];
            out -= 0.5 * r[j][k] *
                   (kron(id, ckcj) + kron(ckcj.transpose(), id));
        }
    return out;
}

M16 lindblad_a1(const AtomModel& m) {
    return channel_gain(1, m.gamma31, m.gamma41, m.gamma314);
}

M16 lindblad_full(const AtomModel& m, const DriveConfig& d) {
    const M4 h = hamiltonian(m, d);
    const M4 id = M4::Identity();
    M16 l = cd(0.0, -1.0) * (kron(id, h) - kron(h.transpose(), id));
    l += channel_gain(1, m.gamma31, m.gamma41, m.gamma314);
    l += channel_loss(1, m.gamma31, m.gamma41, m.gamma314);
    l += channel_gain(2, m.gamma32, m.gamma42, m.gamma324);
    l += channel_loss(2, m.gamma32, m.gamma42, m.gamma324);
    return l;
}

double rel_scale(const M16& a) { return std::max(1.0, a.cwiseAbs().maxCoeff()); }

}  // namespace

TEST_CASE("generator at s = 1 equals the superoperator construction") {
    std::mt19937 rng(11);
    for (int k = 0; k < 30; ++k) {
        auto kind = (k % 2 == 0) ? ModelKind::DoubleLambda : ModelKind::NType;
        auto [m, d] = tu::random_config(rng, kind);
        auto gen = assemble_generators(m, d);
        M16 ref = lindblad_full(m, d);
        CAPTURE(k);
        CHECK((gen.a_of_s(1.0) - ref).cwiseAbs().maxCoeff() <
              1e-12 * rel_scale(ref));
        CHECK((gen.a1 - lindblad_a1(m)).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("counting matrix holds exactly the emission gains into G11") {
    auto [m, d] = build_double_lambda(tu::dl_ref(1.0));
    (void)d;
    auto gen = assemble_generators(m, d);
    M16 expect = M16::Zero(16, 16);
    expect(0, flat_index(3, 3)) = 2.0 * m.gamma31;
    expect(0, flat_index(3, 4)) = 2.0 * m.gamma314;
    expect(0, flat_index(4, 3)) = 2.0 * m.gamma314;
    expect(0, flat_index(4, 4)) = 2.0 * m.gamma41;
    CHECK((gen.a1 - expect).cwiseAbs().maxCoeff() == 0.0);

    // beta = 0 kills the cross gains, leaving two entries.
    auto [m0, d0] = build_n_type(tu::n_ref(11.0, 0.0));
    auto gen0 = assemble_generators(m0, d0);
    CHECK(gen0.a1.cwiseAbs().sum() ==
          doctest::Approx(2.0 * (m0.gamma31 + m0.gamma41)));
    CHECK(gen0.a1(0, flat_index(3, 4)) == cd(0.0));
    CHECK(gen0.a1(0, flat_index(4, 3)) == cd(0.0));
}

TEST_CASE("a_of_s is affine in s") {
    std::mt19937 rng(13);
    auto [m, d] = tu::random_config(rng, ModelKind::NType);
    auto gen = assemble_generators(m, d);
    for (cd s : {cd(0.0), cd(0.37), cd(1.0), cd(-0.2, 0.8)}) {
        M16 lhs = gen.a_of_s(s);
        M16 rhs = gen.a0 + s * gen.a1;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("s = 1 generator annihilates the trace") {
    std::mt19937 rng(17);
    for (int k = 0; k < 10; ++k) {
        auto kind = (k % 2 == 0) ? ModelKind::DoubleLambda : ModelKind::NType;
        auto [m, d] = tu::random_config(rng, kind);
        auto gen = assemble_generators(m, d);
        M16 a = gen.a_of_s(1.0);
        // Trace functional = sum of the four diagonal flat rows.
        Eigen::RowVectorXcd tr = Eigen::RowVectorXcd::Zero(16);
        for (int i = 1; i <= 4; ++i) tr(flat_index(i, i)) = 1.0;
        CHECK((tr * a).cwiseAbs().maxCoeff() < 1e-12 * rel_scale(a));
        // Same thing applied to a random density matrix.
        Eigen::VectorXcd w = a * tu::random_density(rng).flattened();
        cd dtr = w(flat_index(1, 1)) + w(flat_index(2, 2)) +
                 w(flat_index(3, 3)) + w(flat_index(4, 4));
        CHECK(std::abs(dtr) < 1e-12 * rel_scale(a));
    }
}

TEST_CASE("double-lambda drift entries, hand-computed") {
    DoubleLambdaParams p;
    p.gamma31 = 1.23;
    p.gamma32 = 0.77;
    p.gamma41 = 2.01;
    p.gamma42 = 1.55;
    p.beta = 0.6;
    p.omega = 37.0;
    p.omega_p = 4.2;
    p.omega_c = 9.1;
    p.delta_p = 3.3;
    p.delta_c = -2.2;
    auto [m, d] = build_double_lambda(p);
    auto gen = assemble_generators(m, d);
    const M16& a0 = gen.a0;

    const double g314 = 0.6 * std::sqrt(1.23 * 2.01);
    const double g324 = 0.6 * std::sqrt(0.77 * 1.55);
    const double gam3 = 2.00, gam4 = 3.56, gam34 = g314 + g324;
    const cd i2p(0.0, 0.5 * 4.2);   // (i/2) omega_p
    const cd i2c(0.0, 0.5 * 9.1);   // (i/2) omega_c
    auto ck = [&a0](int r, int c, cd want) {
        CAPTURE(r);
        CAPTURE(c);
        CHECK(std::abs(a0(r, c) - want) < 1e-12);
    };
    const int g11 = flat_index(1, 1), g22 = flat_index(2, 2);
    const int g33 = flat_index(3, 3), g44 = flat_index(4, 4);
    const int g12 = flat_index(1, 2), g13 = flat_index(1, 3);
    const int g14 = flat_index(1, 4), g23 = flat_index(2, 3);
    const int g24 = flat_index(2, 4), g34 = flat_index(3, 4);
    const int g43 = flat_index(4, 3);

    // dG11: both probe transitions drive it; gains sit in the counting matrix.
    ck(g11, g13, -i2p);
    ck(g11, g14, -i2p);
    ck(g11, flat_index(3, 1), i2p);
    ck(g11, flat_index(4, 1), i2p);
    ck(g11, g33, 0.0);
    // dG22: uncounted gains + coupling-field terms.
    ck(g22, g33, 2.0 * 0.77);
    ck(g22, g34, 2.0 * g324);
    ck(g22, g43, 2.0 * g324);
    ck(g22, g44, 2.0 * 1.55);
    ck(g22, g23, -i2c);
    ck(g22, g24, -i2c);
    // dG33 / dG44: total decay plus cross damping.
    ck(g33, g33, -2.0 * gam3);
    ck(g33, g34, -gam34);
    ck(g33, g43, -gam34);
    ck(g44, g44, -2.0 * gam4);
    // dG12: two-photon detuning, no damping.
    ck(g12, g12, cd(0.0, -(3.3 - (-2.2))));
    ck(g12, g13, -i2c);
    ck(g12, g14, -i2c);
    ck(g12, flat_index(3, 2), i2p);
    ck(g12, flat_index(4, 2), i2p);
    // dG13: optical coherence.
    ck(g13, g13, cd(-gam3, -3.3));
    ck(g13, g14, -gam34);
    ck(g13, g11, -i2p);
    ck(g13, g33, i2p);
    ck(g13, g43, i2p);
    ck(g13, g12, -i2c);
    // dG14: detuned by omega.
    ck(g14, g14, cd(-gam4, -(3.3 - 37.0)));
    ck(g14, g13, -gam34);
    ck(g14, g11, -i2p);
    ck(g14, g34, i2p);
    ck(g14, g44, i2p);
    ck(g14, g12, -i2c);
    // dG23 / dG24: coupling-side coherences.
    ck(g23, g23, cd(-gam3, -(-2.2)));
    ck(g23, g24, -gam34);
    ck(g23, g22, -i2c);
    ck(g23, g33, i2c);
    ck(g23, g43, i2c);
    ck(g23, flat_index(2, 1), -i2p);
    ck(g24, g24, cd(-gam4, -(-2.2 - 37.0)));
    ck(g24, g23, -gam34);
    // dG34: excited-state coherence oscillates at +omega.
    ck(g34, g34, cd(-(gam3 + gam4), 37.0));
    ck(g34, g33, -gam34);
    ck(g34, g44, -gam34);
    ck(g34, flat_index(3, 1), -i2p);
    ck(g34, g14, i2p);
    ck(g34, flat_index(3, 2), -i2c);
    ck(g34, g24, i2c);

    // Lower-triangle rows mirror the conjugates: dG_ji = conj(dG_ij).
    for (int i = 1; i <= 4; ++i)
        for (int j = i + 1; j <= 4; ++j)
            for (int k = 1; k <= 4; ++k)
                for (int l = 1; l <= 4; ++l)
                    CHECK(std::abs(a0(flat_index(j, i), flat_index(l, k)) -
                                   std::conj(a0(flat_index(i, j),
                                                flat_index(k, l)))) < 1e-12);
}

TEST_CASE("n-type drift entries, hand-computed") {
    NTypeParams p;
    p.gamma31 = 0.9;
    p.gamma32 = 1.7;
    p.gamma41 = 2.3;
    p.gamma42 = 0.6;
    p.beta = 0.35;
    p.omega_p = 2.6;
    p.omega_c = 7.4;
    p.omega_s = 5.9;
    p.delta_p = -1.9;
    p.delta_c = 4.4;
    p.delta_s = 2.8;
    auto [m, d] = build_n_type(p);
    auto gen = assemble_generators(m, d);
    const M16& a0 = gen.a0;

    const double g314 = 0.35 * std::sqrt(0.9 * 2.3);
    const double g324 = 0.35 * std::sqrt(1.7 * 0.6);
    const double gam3 = 2.6, gam4 = 2.9, gam34 = g314 + g324;
    const cd i2p(0.0, 0.5 * 2.6);
    const cd i2c(0.0, 0.5 * 7.4);
    const cd i2s(0.0, 0.5 * 5.9);
    auto ck = [&a0](int r, int c, cd want) {
        CAPTURE(r);
        CAPTURE(c);
        CHECK(std::abs(a0(r, c) - want) < 1e-12);
    };
    const int g11 = flat_index(1, 1), g22 = flat_index(2, 2);
    const int g33 = flat_index(3, 3), g44 = flat_index(4, 4);
    const int g12 = flat_index(1, 2), g13 = flat_index(1, 3);
    const int g14 = flat_index(1, 4), g23 = flat_index(2, 3);
    const int g24 = flat_index(2, 4), g34 = flat_index(3, 4);
    const int g43 = flat_index(4, 3);

    // dG11: only the |1>-|3> probe transition (unlike double-lambda).
    ck(g11, g13, -i2p);
    ck(g11, g14, 0.0);
    ck(g11, flat_index(3, 1), i2p);
    ck(g11, flat_index(4, 1), 0.0);
    // dG22: coupling and switching fields.
    ck(g22, g33, 2.0 * 1.7);
    ck(g22, g34, 2.0 * g324);
    ck(g22, g43, 2.0 * g324);
    ck(g22, g44, 2.0 * 0.6);
    ck(g22, g23, -i2c);
    ck(g22, g24, -i2s);
    ck(g22, flat_index(3, 2), i2c);
    ck(g22, flat_index(4, 2), i2s);
    // dG44: switching field only, no probe term.
    ck(g44, g44, -2.0 * gam4);
    ck(g44, g34, -gam34);
    ck(g44, g43, -gam34);
    ck(g44, flat_index(4, 2), -i2s);
    ck(g44, g24, i2s);
    ck(g44, g14, 0.0);
    // dG12.
    ck(g12, g12, cd(0.0, -(-1.9 - 4.4)));
    ck(g12, g13, -i2c);
    ck(g12, g14, -i2s);
    ck(g12, flat_index(3, 2), i2p);
    // dG13: no G43 term in the N-type equations.
    ck(g13, g13, cd(-gam3, 1.9));
    ck(g13, g14, -gam34);
    ck(g13, g11, -i2p);
    ck(g13, g33, i2p);
    ck(g13, g43, 0.0);
    ck(g13, g12, -i2c);
    // dG14: three-photon detuning delta_p - delta_c + delta_s.
    ck(g14, g14, cd(-gam4, -(-1.9 - 4.4 + 2.8)));
    ck(g14, g13, -gam34);
    ck(g14, g12, -i2s);
    ck(g14, g34, i2p);
    // dG23.
    ck(g23, g23, cd(-gam3, -4.4));
    ck(g23, g24, -gam34);
    ck(g23, g22, -i2c);
    ck(g23, g33, i2c);
    ck(g23, flat_index(2, 1), -i2p);
    ck(g23, g43, i2s);
    // dG24.
    ck(g24, g24, cd(-gam4, -2.8));
    ck(g24, g23, -gam34);
    ck(g24, g22, -i2s);
    ck(g24, g44, i2s);
    ck(g24, g34, i2c);
    // dG34.
    ck(g34, g34, cd(-(gam3 + gam4), -(2.8 - 4.4)));
    ck(g34, g33, -gam34);
    ck(g34, g44, -gam34);
    ck(g34, flat_index(3, 2), -i2s);
    ck(g34, g14, i2p);
    ck(g34, g24, i2c);
}

TEST_CASE("n-type level 4 decouples when its couplings vanish") {
    NTypeParams p;
    p.gamma31 = 1.1;
    p.gamma32 = 0.9;
    p.gamma41 = 0.0;
    p.gamma42 = 0.0;
    p.beta = 0.7;  // cross rates still vanish with gamma4x = 0
    p.omega_p = 3.0;
    p.omega_c = 8.0;
    p.omega_s = 0.0;
    p.delta_p = 1.0;
    p.delta_c = -2.0;
    p.delta_s = 4.0;
    auto [m, d] = build_n_type(p);
    auto gen = assemble_generators(m, d);
    M16 a = gen.a_of_s(1.0);

    // The three-level block {G_ij : i,j <= 3} must be closed: no column
    // involving level 4 feeds it.
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j)
            for (int k = 1; k <= 4; ++k) {
                CHECK(std::abs(a(flat_index(i, j), flat_index(k, 4))) == 0.0);
                CHECK(std::abs(a(flat_index(i, j), flat_index(4, k))) == 0.0);
            }
}

TEST_CASE("max_frequency tracks the largest model scale") {
    auto [m, d] = build_double_lambda(tu::dl_ref(0.0));
    auto gen = assemble_generators(m, d);
    CHECK(gen.max_frequency == doctest::Approx(814.5));

    auto [m2, d2] = build_n_type(tu::n_ref(11.0, 14.0));
    auto gen2 = assemble_generators(m2, d2);
    CHECK(gen2.max_frequency == doctest::Approx(14.0));
}
