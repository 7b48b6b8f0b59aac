#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unfold/errors.hpp"
#include "unfold/ideal_model.hpp"
#include "unfold/manifolds.hpp"
#include "unfold/model_config.hpp"

using namespace unfold;

namespace {
ModelPtr default_model() { return build_model(RunConfig{}); }
}

TEST_CASE("curvature of simple curves") {
    // straight line
    const PlaneCurve line = PlaneCurve::graph([](double x) { return 2.0 * x + 1.0; },
                                              -1.0, 1.0, 64);
    CHECK(std::fabs(curvature_at(line, 0.0)) < 1e-12);
    // circle of radius 2: curvature 1/2 everywhere
    const PlaneCurve circle = PlaneCurve::from_function(
        [](double s) { return Vec2{2.0 * std::cos(s), 2.0 * std::sin(s)}; }, 0.1, 1.2,
        512);
    CHECK(curvature_at(circle, 0.6) == doctest::Approx(0.5).epsilon(1e-6));
    // parabola y = Q x^2 at the vertex: curvature 2Q
    const double q = 1.7;
    const PlaneCurve par =
        PlaneCurve::graph([q](double x) { return q * x * x; }, -0.5, 0.5, 512);
    CHECK(curvature_at(par, 0.0) == doctest::Approx(2.0 * q).epsilon(1e-4));
}

TEST_CASE("degenerate tangent is reported") {
    const PlaneCurve c = PlaneCurve::from_function(
        [](double s) { return Vec2{s * s * s, s * s * s}; }, -1.0, 1.0, 65);
    CHECK_THROWS_AS(curvature_at(c, 0.0), NumericError);
}

TEST_CASE("plane curve rejects non monotone parametrization") {
    CHECK_THROWS_AS(PlaneCurve({0.0, 0.0, 1.0}, {0, 1, 2}, {0, 1, 2}), ValidationError);
}

TEST_CASE("pullback identity is exact at the samples") {
    const ModelPtr m = default_model();
    const Params p{0.0, 0.0};
    const double lam = m->lambda(p), mu = m->mu(p);
    const PlaneCurve seed =
        PlaneCurve::graph([](double x) { return 1.5 + 0.2 * x; }, -2.0, 2.0, 512);
    for (int n : {0, 1, 3, 17, 40}) {
        const StableWedge w = pullback_stable(seed, n, *m, p);
        const double mun = std::pow(mu, n), ln = std::pow(lam, n);
        for (double x : w.curve.knots()) {
            const double lhs = mun * w.curve.eval(x).y;
            const double rhs = seed.height_at_x(ln * x);
            CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(rhs)));
        }
    }
}

TEST_CASE("pullback special cases") {
    const ModelPtr m = default_model();
    const Params p{0.0, 0.0};
    // n = 0 is the identity
    const PlaneCurve seed =
        PlaneCurve::graph([](double x) { return 1.5 + 0.3 * x; }, -2.0, 2.0, 128);
    const StableWedge w0 = pullback_stable(seed, 0, *m, p);
    CHECK(w0.curve.eval(0.7).y == doctest::Approx(seed.eval(0.7).y).epsilon(1e-14));
    // constant seed scales by mu^{-n}
    const PlaneCurve flat = PlaneCurve::graph([](double) { return 1.5; }, -2, 2, 64);
    const StableWedge w3 = pullback_stable(flat, 3, *m, p);
    CHECK(w3.curve.eval(1.0).y == doctest::Approx(1.5 / 27.0).epsilon(1e-14));
    // affine seed: W(x) = w0 + x with lambda=0.01, mu=3, n=2
    const PlaneCurve affine =
        PlaneCurve::graph([](double x) { return 1.5 + x; }, -2.0, 2.0, 128);
    const StableWedge w2 = pullback_stable(affine, 2, *m, p);
    CHECK(w2.curve.eval(1.0).y == doctest::Approx((1.5 + 1e-4) / 9.0).epsilon(1e-12));
    const double slope = w2.curve.d1(0.0).y;
    CHECK(slope == doctest::Approx(std::pow(0.01 / 3.0, 2)).epsilon(1e-6));
}

TEST_CASE("wedge bounds hold with the stated constants") {
    const ModelPtr m = default_model();
    const Params p{0.0, 0.0};
    const double mu = m->mu(p), lam = m->lambda(p);
    const PlaneCurve seed = m->seed_stable_curve(p);
    for (int n = 1; n <= 30; ++n) {
        const StableWedge w = pullback_stable(seed, n, *m, p);
        const double mun = std::pow(mu, -n);
        CHECK(w.sup_abs >= mun / (2.0 * mu));
        CHECK(w.sup_abs <= 2.0 * mun);
        // slope bound O((lambda/mu)^n) with the seed's slope as the constant
        const double worst_slope = std::fabs(w.curve.d1(0.5).y);
        CHECK(worst_slope <= 4.0 * std::pow(lam / mu, n) + 1e-15);
    }
}

TEST_CASE("stable speed closed form") {
    const ModelPtr m = default_model();
    const Params p{0.01, 0.0};
    const PlaneCurve seed = m->seed_stable_curve(p);
    // ideal backend: only the first term survives for direction t
    const int n = 5;
    const PlaneCurve sp = stable_speed(seed, n, *m, p, ParamDirection::T);
    const double mu = m->mu(p);
    const double expect = -(5.0 / mu) * 1.0 * (1.5 * std::pow(mu, -n));
    CHECK(sp.eval(0.3).y == doctest::Approx(expect).epsilon(1e-12));
    // direction a vanishes identically
    const PlaneCurve sa = stable_speed(seed, n, *m, p, ParamDirection::A);
    CHECK(std::fabs(sa.eval(-0.9).y) < 1e-18);
}

TEST_CASE("stable speed matches finite differences") {
    const ModelPtr m = default_model();
    const Params p{0.0, 0.0};
    const PlaneCurve seed = m->seed_stable_curve(p);
    const int n = 5;
    const double x = 0.37;
    const PlaneCurve sp = stable_speed(seed, n, *m, p, ParamDirection::T);
    const double h = 1e-6;
    auto wn_at = [&](double t) {
        const Params pt{t, 0.0};
        return pullback_stable(seed, n, *m, pt).curve.height_at_x(x);
    };
    const double fd = (wn_at(h) - wn_at(-h)) / (2.0 * h);
    CHECK(sp.height_at_x(x) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("gamma curve and preimages") {
    const ModelPtr m = default_model();
    const Params p{0.0, 1e-3};
    const PlaneCurve gamma = gamma_curve(*m, p);
    CHECK(gamma.eval(0.2).y == 1.0);
    CHECK(std::fabs(gamma.eval(0.2).y - gamma.eval(0.0).y) == 0.0);  // O(|x|) with zero constant

    // Gamma_0 = Gamma
    const PlaneCurve g0 = gamma_preimage(*m, p, 0);
    CHECK(g0.eval(0.1).y == doctest::Approx(gamma.eval(0.1).y).epsilon(1e-14));

    // sup |Gamma_4| = mu^{-4} = 1/81
    const PlaneCurve g4 = gamma_preimage(*m, p, 4);
    CHECK(g4.eval(0.0).y == doctest::Approx(1.0 / 81.0).epsilon(1e-12));

    // C0 convergence to the axis at rate 2 mu^{-n}
    for (int n = 2; n <= 12; ++n) {
        const PlaneCurve gn = gamma_preimage(*m, p, n);
        double sup = 0.0;
        for (double s : gn.knots()) sup = std::max(sup, std::fabs(gn.eval(s).y));
        CHECK(sup <= 2.0 * std::pow(m->mu(p), -n));
    }
}
