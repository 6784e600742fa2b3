#include <chrono>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gfatom/generator.hpp"
#include "gfatom/model.hpp"
#include "gfatom/observables.hpp"
#include "gfatom/oracle.hpp"
#include "test_util.hpp"

using namespace gfatom;

TEST_CASE("undriven atom converges as dark with zero rate") {
    auto [m, d] = build_n_type(tu::n_ref(0.0, 0.0, 0.0));
    auto r = steady_emission_rate(m, d);
    CHECK(r.converged);
    CHECK(std::abs(r.rate) < 1e-9);
}

TEST_CASE("transparency point emits orders of magnitude below the peaks") {
    auto [m, d] = build_n_type(tu::n_ref(11.0, 0.0));
    auto dark = steady_emission_rate(m, d);
    auto dp = d;
    dp.delta_p = 5.5;
    auto bright = steady_emission_rate(m, dp);
    REQUIRE(dark.converged);
    REQUIRE(bright.converged);
    CHECK(bright.rate > 0.05);
    CHECK(dark.rate < 1e-3 * bright.rate);
}

TEST_CASE("scan intensities equal the steady-state oracle pointwise") {
    auto [m, d] = build_n_type(tu::n_ref(11.0, 0.0));
    ScanAxis axis{"delta_p", linspace(-12.0, 12.0, 21)};
    ScanOptions opts;
    opts.threads = 1;
    opts.compute_q = false;
    auto scan = line_shape_scan(m, d, axis, opts);
    REQUIRE(scan.points.size() == 21);
    for (int i = 0; i < 21; ++i) {
        const auto& pt = scan.at(i);
        if (!pt.rate_converged || pt.dark) continue;
        auto mm = m;
        auto dd = d;
        apply_axis(mm, dd, "delta_p", pt.value1);
        auto gen = assemble_generators(mm, dd);
        double ref = steady_rate_from_state(gen, null_space_steady_state(gen));
        CAPTURE(pt.value1);
        CHECK(std::abs(pt.intensity_raw - ref) <=
              1e-3 * std::max(ref, opts.dark_threshold));
    }
}

TEST_CASE("normalization divides by the maximum and is idempotent") {
    std::vector<double> v{0.2, 0.5, 1.25, 0.0};
    bool dark = true;
    normalize_intensity(v, 1e-6, &dark);
    CHECK_FALSE(dark);
    CHECK(v[2] == doctest::Approx(1.0));
    CHECK(v[0] == doctest::Approx(0.16));
    auto w = v;
    normalize_intensity(w, 1e-6);
    CHECK(w[2] == doctest::Approx(v[2]));
    CHECK(w[0] == doctest::Approx(v[0]));
}

TEST_CASE("all-dark scans zero out instead of dividing by noise") {
    std::vector<double> v{1e-12, 3e-11, 2e-12};
    bool dark = false;
    normalize_intensity(v, 1e-6, &dark);
    CHECK(dark);
    for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("probe off yields an all-dark scan with NaN q") {
    auto [m, d] = build_n_type(tu::n_ref(11.0, 0.0, 0.0));  // omega_p = 0
    ScanAxis axis{"delta_p", linspace(-5.0, 5.0, 5)};
    ScanOptions opts;
    opts.threads = 1;
    auto scan = line_shape_scan(m, d, axis, opts);
    CHECK(scan.all_dark);
    for (const auto& pt : scan.points) {
        CHECK(pt.dark);
        CHECK(pt.intensity_norm == 0.0);
        CHECK(std::isnan(pt.q));
        CHECK(pt.q_status == QStatus::Dark);
    }
}

TEST_CASE("mandel q signs: antibunched Kerr peak, bunched EIT shoulder") {
    auto [m, d] = build_n_type(tu::n_ref(11.0, 14.0));
    auto kerr = mandel_q(m, d);
    REQUIRE(kerr.status == QStatus::Ok);
    CHECK(kerr.q < -0.05);

    auto [m2, d2] = build_n_type(tu::n_ref(11.0, 0.0));
    d2.delta_p = 1.0;  // just off the transparency point
    auto shoulder = mandel_q(m2, d2);
    REQUIRE(shoulder.status == QStatus::Ok);
    CHECK(shoulder.q > 0.0);
}

TEST_CASE("fixed-time q keeps low-statistics points measurable") {
    auto [m, d] = build_n_type(tu::n_ref(11.0, 0.0));  // dark point
    auto q = mandel_q(m, d, 50.0);
    CHECK(q.t_eval == doctest::Approx(50.0));
    CHECK((q.status == QStatus::InsufficientCounts ||
           q.status == QStatus::Ok));
    CHECK(std::isfinite(q.q));
    CHECK(q.n1 < 10.0);
}

TEST_CASE("switching field turns the central peak on") {
    auto [m, d] = build_n_type(tu::n_ref(11.0, 14.0));
    auto on = steady_emission_rate(m, d);
    auto [m0, d0] = build_n_type(tu::n_ref(11.0, 0.0));
    auto off = steady_emission_rate(m0, d0);
    REQUIRE(on.converged);
    REQUIRE(off.converged);
    CHECK(on.rate > 100.0 * off.rate);
}

TEST_CASE("doublet separation follows the coupling strength") {
    for (double oc : {11.0, 24.0}) {
        auto [m, d] = build_n_type(tu::n_ref(oc, 0.0));
        ScanAxis axis{"delta_p", linspace(-1.6 * oc, 1.6 * oc, 161)};
        ScanOptions opts;
        opts.threads = 1;
        opts.compute_q = false;
        auto scan = line_shape_scan(m, d, axis, opts);
        std::vector<double> x, y;
        for (const auto& pt : scan.points) {
            x.push_back(pt.value1);
            y.push_back(pt.intensity_norm);
        }
        auto peaks = find_peaks(x, y, 0.2);
        REQUIRE(peaks.size() == 2);
        CAPTURE(oc);
        CHECK(std::abs(peaks[1].x - peaks[0].x) ==
              doctest::Approx(oc).epsilon(0.05));
    }
}

TEST_CASE("map rows mirror under reflection through the splitting") {
    // Coarse 5x5 check of I(dp, dc) = I(omega - dp, omega - dc).
    for (double beta : {0.0, 1.0}) {
        auto [m, d] = build_double_lambda(tu::dl_ref(beta));
        const double w = m.omega;
        ScanAxis a1{"delta_p", linspace(-0.5 * w, 1.5 * w, 5)};
        ScanAxis a2{"delta_c", linspace(-0.5 * w, 1.5 * w, 5)};
        ScanOptions opts;
        opts.threads = 1;
        opts.compute_q = false;
        opts.dark_threshold = 5e-3;
        auto map = detuning_map_2d(m, d, a1, a2, opts);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                double lhs = map.at(i, j).intensity_raw;
                double rhs = map.at(4 - i, 4 - j).intensity_raw;
                CAPTURE(beta);
                CHECK(std::abs(lhs - rhs) <=
                      1e-6 * std::max({lhs, rhs, 1e-12}));
            }
    }
}

TEST_CASE("2x2 map smoke test under five seconds") {
    auto [m, d] = build_n_type(tu::n_ref(11.0, 14.0));
    auto start = std::chrono::steady_clock::now();
    ScanAxis a1{"delta_p", linspace(-2.0, 2.0, 2)};
    ScanAxis a2{"delta_c", linspace(-1.0, 1.0, 2)};
    ScanOptions opts;
    opts.threads = 1;
    auto map = detuning_map_2d(m, d, a1, a2, opts);
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    CHECK(map.points.size() == 4);
    CHECK(map.all_converged());
    CHECK(secs < 5.0);
    // axis1-outer ordering
    CHECK(map.at(0, 1).value1 == doctest::Approx(-2.0));
    CHECK(map.at(0, 1).value2 == doctest::Approx(1.0));
    CHECK(map.at(1, 0).value1 == doctest::Approx(2.0));
    CHECK(map.at(1, 0).value2 == doctest::Approx(-1.0));
}

TEST_CASE("apply_axis refreshes the cross-damping rates with beta") {
    auto [m, d] = build_n_type(tu::n_ref(10.0, 25.0));
    apply_axis(m, d, "beta", 0.5);
    CHECK(m.beta == doctest::Approx(0.5));
    CHECK(m.gamma314 == doctest::Approx(0.5 * std::sqrt(1.4375 * 1.5167)));
    CHECK_NOTHROW(m.validate());
    apply_axis(m, d, "omega_s", 7.0);
    CHECK(d.omega_s == doctest::Approx(7.0));
    CHECK_THROWS_AS(apply_axis(m, d, "bogus", 1.0), std::invalid_argument);
}

TEST_CASE("linspace covers both endpoints exactly") {
    auto g = linspace(-1.0, 2.0, 7);
    REQUIRE(g.size() == 7);
    CHECK(g.front() == -1.0);
    CHECK(g.back() == 2.0);
    CHECK(g[2] == doctest::Approx(0.0));
    CHECK_THROWS_AS(linspace(0.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(linspace(1.0, 1.0, 5), std::invalid_argument);
}

TEST_CASE("find_peaks refines quadratic maxima between grid points") {
    auto x = linspace(-3.0, 3.0, 61);
    std::vector<double> y;
    for (double xi : x) {
        double a = std::exp(-(xi - 1.05) * (xi - 1.05) / 0.2);
        double b = 0.6 * std::exp(-(xi + 1.55) * (xi + 1.55) / 0.1);
        y.push_back(a + b);
    }
    auto peaks = find_peaks(x, y, 0.1);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0].x == doctest::Approx(-1.55).epsilon(0.02));
    CHECK(peaks[1].x == doctest::Approx(1.05).epsilon(0.02));
    CHECK(peaks[1].height > peaks[0].height);
}

TEST_CASE("width_at_level interpolates the crossing points") {
    auto x = linspace(0.0, 10.0, 101);
    std::vector<double> y;
    for (double xi : x) y.push_back(std::max(0.0, 1.0 - std::abs(xi - 5.0)));
    CHECK(width_at_level(x, y, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::isnan(width_at_level(x, y, 2.0)));
}
