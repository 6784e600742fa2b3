#include "gfatom/generator.hpp"

#include <algorithm>
#include <cmath>

namespace gfatom {

namespace {

// Accumulates generator entries addressed by 1-based level pairs:
// target component G_{ti,tj} receives coeff * G_{si,sj}.
struct Builder {
    Eigen::MatrixXcd a0 = Eigen::MatrixXcd::Zero(16, 16);
    Eigen::MatrixXcd a1 = Eigen::MatrixXcd::Zero(16, 16);

    void drift(int ti, int tj, int si, int sj, cd coeff) {
        a0(flat_index(ti, tj), flat_index(si, sj)) += coeff;
    }
    void gain(int ti, int tj, int si, int sj, cd coeff) {
        a1(flat_index(ti, tj), flat_index(si, sj)) += coeff;
    }

    // The equations are written for the diagonal and upper-triangular
    // components; the remaining rows follow from G_ij = conj(G_ji):
    // A[(j,i),(l,k)] = conj(A[(i,j),(k,l)]).
    void mirror_lower_rows() {
        constexpr int upper[6][2] = {{1, 2}, {1, 3}, {1, 4},
                                     {2, 3}, {2, 4}, {3, 4}};
        for (const auto& ij : upper) {
            const int i = ij[0], j = ij[1];
            for (int k = 1; k <= 4; ++k)
                for (int l = 1; l <= 4; ++l) {
                    a0(flat_index(j, i), flat_index(l, k)) =
                        std::conj(a0(flat_index(i, j), flat_index(k, l)));
                    a1(flat_index(j, i), flat_index(l, k)) =
                        std::conj(a1(flat_index(i, j), flat_index(k, l)));
                }
        }
    }
};

void fill_double_lambda(Builder& b, const AtomModel& m, const DriveConfig& d) {
    const double g3 = m.big_gamma3(), g4 = m.big_gamma4(), g34 = m.big_gamma34();
    const cd i2p(0.0, 0.5 * d.omega_p);  // i/2 * Omega_p
    const cd i2c(0.0, 0.5 * d.omega_c);
    const cd I(0.0, 1.0);

    // G_11: counted spontaneous gains (prefixed by s) plus probe coupling.
    b.gain(1, 1, 3, 3, 2.0 * m.gamma31);
    b.gain(1, 1, 3, 4, 2.0 * m.gamma314);
    b.gain(1, 1, 4, 3, 2.0 * m.gamma314);
    b.gain(1, 1, 4, 4, 2.0 * m.gamma41);
    b.drift(1, 1, 1, 3, -i2p);
    b.drift(1, 1, 1, 4, -i2p);
    b.drift(1, 1, 3, 1, i2p);
    b.drift(1, 1, 4, 1, i2p);

    // G_22: uncounted gains plus coupling-field terms.
    b.drift(2, 2, 3, 3, 2.0 * m.gamma32);
    b.drift(2, 2, 3, 4, 2.0 * m.gamma324);
    b.drift(2, 2, 4, 3, 2.0 * m.gamma324);
    b.drift(2, 2, 4, 4, 2.0 * m.gamma42);
    b.drift(2, 2, 2, 3, -i2c);
    b.drift(2, 2, 2, 4, -i2c);
    b.drift(2, 2, 3, 2, i2c);
    b.drift(2, 2, 4, 2, i2c);

    // G_33
    b.drift(3, 3, 3, 3, -2.0 * g3);
    b.drift(3, 3, 3, 4, -g34);
    b.drift(3, 3, 4, 3, -g34);
    b.drift(3, 3, 3, 1, -i2p);
    b.drift(3, 3, 1, 3, i2p);
    b.drift(3, 3, 3, 2, -i2c);
    b.drift(3, 3, 2, 3, i2c);

    // G_44
    b.drift(4, 4, 4, 4, -2.0 * g4);
    b.drift(4, 4, 3, 4, -g34);
    b.drift(4, 4, 4, 3, -g34);
    b.drift(4, 4, 4, 1, -i2p);
    b.drift(4, 4, 1, 4, i2p);
    b.drift(4, 4, 4, 2, -i2c);
    b.drift(4, 4, 2, 4, i2c);

    // G_12 (ground-state coherence)
    b.drift(1, 2, 1, 2, -I * (d.delta_p - d.delta_c));
    b.drift(1, 2, 1, 3, -i2c);
    b.drift(1, 2, 1, 4, -i2c);
    b.drift(1, 2, 3, 2, i2p);
    b.drift(1, 2, 4, 2, i2p);

    // G_13 (probe coherence, lower excited level)
    b.drift(1, 3, 1, 3, -I * d.delta_p - g3);
    b.drift(1, 3, 1, 4, -g34);
    b.drift(1, 3, 1, 1, -i2p);
    b.drift(1, 3, 3, 3, i2p);
    b.drift(1, 3, 4, 3, i2p);
    b.drift(1, 3, 1, 2, -i2c);

    // G_14 (probe coherence, upper excited level, shifted by omega)
    b.drift(1, 4, 1, 4, -I * (d.delta_p - m.omega) - g4);
    b.drift(1, 4, 1, 3, -g34);
    b.drift(1, 4, 1, 1, -i2p);
    b.drift(1, 4, 3, 4, i2p);
    b.drift(1, 4, 4, 4, i2p);
    b.drift(1, 4, 1, 2, -i2c);

    // G_23
    b.drift(2, 3, 2, 3, -I * d.delta_c - g3);
    b.drift(2, 3, 2, 4, -g34);
    b.drift(2, 3, 2, 2, -i2c);
    b.drift(2, 3, 3, 3, i2c);
    b.drift(2, 3, 4, 3, i2c);
    b.drift(2, 3, 2, 1, -i2p);

    // G_24
    b.drift(2, 4, 2, 4, -I * (d.delta_c - m.omega) - g4);
    b.drift(2, 4, 2, 3, -g34);
    b.drift(2, 4, 2, 2, -i2c);
    b.drift(2, 4, 3, 4, i2c);
    b.drift(2, 4, 4, 4, i2c);
    b.drift(2, 4, 2, 1, -i2p);

    // G_34 (excited-state coherence)
    b.drift(3, 4, 3, 4, I * m.omega - (g3 + g4));
    b.drift(3, 4, 3, 3, -g34);
    b.drift(3, 4, 4, 4, -g34);
    b.drift(3, 4, 3, 1, -i2p);
    b.drift(3, 4, 1, 4, i2p);
    b.drift(3, 4, 3, 2, -i2c);
    b.drift(3, 4, 2, 4, i2c);
}

void fill_n_type(Builder& b, const AtomModel& m, const DriveConfig& d) {
    const double g3 = m.big_gamma3(), g4 = m.big_gamma4(), g34 = m.big_gamma34();
    const cd i2p(0.0, 0.5 * d.omega_p);
    const cd i2c(0.0, 0.5 * d.omega_c);
    const cd i2s(0.0, 0.5 * d.omega_s);
    const cd I(0.0, 1.0);

    // G_11: same counted gains; the probe only touches |1>-|3>.
    b.gain(1, 1, 3, 3, 2.0 * m.gamma31);
    b.gain(1, 1, 3, 4, 2.0 * m.gamma314);
    b.gain(1, 1, 4, 3, 2.0 * m.gamma314);
    b.gain(1, 1, 4, 4, 2.0 * m.gamma41);
    b.drift(1, 1, 1, 3, -i2p);
    b.drift(1, 1, 3, 1, i2p);

    // G_22: coupling on |2>-|3>, switching on |2>-|4>.
    b.drift(2, 2, 3, 3, 2.0 * m.gamma32);
    b.drift(2, 2, 3, 4, 2.0 * m.gamma324);
    b.drift(2, 2, 4, 3, 2.0 * m.gamma324);
    b.drift(2, 2, 4, 4, 2.0 * m.gamma42);
    b.drift(2, 2, 2, 3, -i2c);
    b.drift(2, 2, 3, 2, i2c);
    b.drift(2, 2, 2, 4, -i2s);
    b.drift(2, 2, 4, 2, i2s);

    // G_33
    b.drift(3, 3, 3, 3, -2.0 * g3);
    b.drift(3, 3, 3, 4, -g34);
    b.drift(3, 3, 4, 3, -g34);
    b.drift(3, 3, 3, 1, -i2p);
    b.drift(3, 3, 1, 3, i2p);
    b.drift(3, 3, 3, 2, -i2c);
    b.drift(3, 3, 2, 3, i2c);

    // G_44
    b.drift(4, 4, 4, 4, -2.0 * g4);
    b.drift(4, 4, 3, 4, -g34);
    b.drift(4, 4, 4, 3, -g34);
    b.drift(4, 4, 4, 2, -i2s);
    b.drift(4, 4, 2, 4, i2s);

    // G_12
    b.drift(1, 2, 1, 2, -I * (d.delta_p - d.delta_c));
    b.drift(1, 2, 1, 3, -i2c);
    b.drift(1, 2, 1, 4, -i2s);
    b.drift(1, 2, 3, 2, i2p);

    // G_13
    b.drift(1, 3, 1, 3, -I * d.delta_p - g3);
    b.drift(1, 3, 1, 4, -g34);
    b.drift(1, 3, 1, 1, -i2p);
    b.drift(1, 3, 3, 3, i2p);
    b.drift(1, 3, 1, 2, -i2c);

    // G_14 (three-photon coherence)
    b.drift(1, 4, 1, 4, -I * (d.delta_p - d.delta_c + d.delta_s) - g4);
    b.drift(1, 4, 1, 3, -g34);
    b.drift(1, 4, 1, 2, -i2s);
    b.drift(1, 4, 3, 4, i2p);

    // G_23
    b.drift(2, 3, 2, 3, -I * d.delta_c - g3);
    b.drift(2, 3, 2, 4, -g34);
    b.drift(2, 3, 2, 2, -i2c);
    b.drift(2, 3, 3, 3, i2c);
    b.drift(2, 3, 2, 1, -i2p);
    b.drift(2, 3, 4, 3, i2s);

    // G_24
    b.drift(2, 4, 2, 4, -I * d.delta_s - g4);
    b.drift(2, 4, 2, 3, -g34);
    b.drift(2, 4, 2, 2, -i2s);
    b.drift(2, 4, 4, 4, i2s);
    b.drift(2, 4, 3, 4, i2c);

    // G_34
    b.drift(3, 4, 3, 4, -I * (d.delta_s - d.delta_c) - (g3 + g4));
    b.drift(3, 4, 3, 3, -g34);
    b.drift(3, 4, 4, 4, -g34);
    b.drift(3, 4, 3, 2, -i2s);
    b.drift(3, 4, 1, 4, i2p);
    b.drift(3, 4, 2, 4, i2c);
}

}  // namespace

GeneratorPair assemble_generators(const AtomModel& model,
                                  const DriveConfig& drive) {
    model.validate();
    drive.validate();

    Builder b;
    if (model.kind == ModelKind::DoubleLambda) {
        fill_double_lambda(b, model, drive);
    } else if (model.kind == ModelKind::NType) {
        fill_n_type(b, model, drive);
    } else {
        throw std::invalid_argument("assemble_generators: unknown model kind");
    }
    b.mirror_lower_rows();

    GeneratorPair gen;
    gen.a0 = std::move(b.a0);
    gen.a1 = std::move(b.a1);

    double f = 0.0;
    for (double v : {model.gamma31, model.gamma32, model.gamma41, model.gamma42,
                     model.gamma314, model.gamma324, drive.omega_p,
                     drive.omega_c, std::abs(drive.delta_p),
                     std::abs(drive.delta_c)})
        f = std::max(f, v);
    if (model.kind == ModelKind::DoubleLambda) f = std::max(f, model.omega);
    if (model.kind == ModelKind::NType)
        f = std::max({f, drive.omega_s, std::abs(drive.delta_s)});
    gen.max_frequency = f;
    return gen;
}

Eigen::MatrixXcd extended_moment_generator(const GeneratorPair& gen) {
    const Eigen::MatrixXcd a = gen.a_of_s(1.0);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(48, 48);
    m.block(0, 0, 16, 16) = a;
    m.block(16, 0, 16, 16) = gen.a1;
    m.block(16, 16, 16, 16) = a;
    m.block(32, 16, 16, 16) = 2.0 * gen.a1;
    m.block(32, 32, 16, 16) = a;
    return m;
}

}  // namespace gfatom
