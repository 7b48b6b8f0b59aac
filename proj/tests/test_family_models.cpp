#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unfold/errors.hpp"
#include "unfold/ideal_model.hpp"
#include "unfold/model_config.hpp"
#include "unfold/theta.hpp"

using namespace unfold;

namespace {

ModelPtr default_model() {
    RunConfig cfg;
    return build_model(cfg);
}

} // namespace

TEST_CASE("eigenvalue condition accepts and rejects") {
    GluingMap g;
    // 0.01 * 27 = 0.27 < 1: accepted.
    CHECK_NOTHROW(make_ideal_model(0.01, 3.0, g, 1, 1));
    // 0.1 * 27 = 2.7 >= 1: rejected.
    CHECK_THROWS_AS(make_ideal_model(0.1, 3.0, g, 1, 1), ValidationError);
}

TEST_CASE("linear block is exactly diagonal") {
    const ModelPtr m = default_model();
    const Params p{0.0, 0.0};
    const Vec2 image = m->apply_linear(p, {1.0, 1.0}, 1);
    CHECK(image.x == 0.01);
    CHECK(image.y == 3.0);
    // any point of the chart box, any parameters
    const Params p2{0.07, 0.01};
    const Vec2 q{-1.37, 0.63};
    const Vec2 im2 = m->apply_linear(p2, q, 1);
    CHECK(im2.x == m->lambda(p2) * q.x);
    CHECK(im2.y == m->mu(p2) * q.y);
}

TEST_CASE("critical point and value of the normal form") {
    const ModelPtr m = default_model();
    const Params p{0.02, 3e-4};
    CHECK(m->critical_height(p, 0.3) == 1.0);
    const Vec2 z = m->critical_value(p);
    CHECK(z.y == p.a);  // the critical value sits at height a exactly
    CHECK(z.x == 1.0);
    // gluing formula at a sample point: G(x,y) = (y, x + (y-1)^2 + a)
    const Vec2 g = m->apply_gluing(p, {0.2, 1.1});
    CHECK(g.x == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(g.y == doctest::Approx(0.2 + 0.01 + p.a).epsilon(1e-12));
}

TEST_CASE("eigenvalue derivative fields match finite differences") {
    const ModelPtr m = default_model();
    const Params p{0.03, 1e-3};
    const double h = 1e-5;
    const double fd_mu =
        (m->mu(Params{p.t + h, p.a}) - m->mu(Params{p.t - h, p.a})) / (2.0 * h);
    CHECK(std::fabs(fd_mu - m->dmu_dt(p)) <= 1e-8 * std::max(1.0, std::fabs(fd_mu)));
    const double fd_la =
        (m->lambda(Params{p.t, p.a + h}) - m->lambda(Params{p.t, p.a - h})) / (2.0 * h);
    CHECK(std::fabs(fd_la - m->dlambda_da(p)) <= 1e-8);
}

TEST_CASE("theta selection satisfies every inequality independently") {
    const ModelPtr m = default_model();
    const ThetaSelection sel = select_theta(*m);
    CHECK(sel.theta > sel.theta0);
    CHECK(sel.theta < sel.theta1);
    CHECK(sel.theta1 < 0.5);
    const ThetaChecks c = theta_checks(*m, sel.theta);
    CHECK(c.pass());
    CHECK(c.lower_spectral > 1.0);
    CHECK(c.upper_spectral < 1.0);
    CHECK(c.drift_sign > 0.0);
    CHECK(c.appendix_lhs > c.appendix_rhs);
    CHECK(c.alpha > 0.0);
    CHECK(c.alpha < 1.0);
}

TEST_CASE("theta bracket near the quoted values for a point window") {
    GluingMap g;
    const ModelPtr m = make_ideal_model(0.01, 3.0, g, 1, 1, ParamWindow{1e-9, 1e-9});
    const ThetaSelection sel = select_theta(*m);
    CHECK(sel.theta0 == doctest::Approx(0.318).epsilon(2e-3));
    CHECK(sel.theta1 == doctest::Approx(0.358).epsilon(2e-3));
    // theta = 0.33 passes all inequality checks on this window
    CHECK(theta_checks(*m, 0.33).pass());
    const ThetaChecks c = theta_checks(*m, 0.33);
    CHECK(c.lower_spectral == doctest::Approx(1.29).epsilon(0.01));
    CHECK(c.upper_spectral == doctest::Approx(0.85).epsilon(0.01));
    CHECK(c.alpha == doctest::Approx(0.232).epsilon(0.02));
}

TEST_CASE("theta search fails before starting when lambda mu^3 >= 1") {
    GluingMap g;
    CHECK_THROWS_AS(make_ideal_model(0.5, 3.0, g, 1, 1), ValidationError);
}

TEST_CASE("config round trip is a fixed point") {
    RunConfig cfg;
    cfg.lambda0 = 0.02;
    cfg.kappa = 0;
    cfg.seed = 999;
    const RunConfig back = RunConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(back.hash() == cfg.hash());
}

TEST_CASE("config rejects unknown backends") {
    CHECK_THROWS_AS(RunConfig::from_json("{\"backend\": \"magic\"}"), ValidationError);
}

TEST_CASE("step dispatch follows the windows") {
    const ModelPtr m = default_model();
    const Params p{0.0, 1e-4};
    CHECK(m->step(p, {0.0, 0.5}).kind == StepKind::Linear);
    CHECK(m->step(p, {0.0, 1.01}).kind == StepKind::Gluing);
    CHECK(m->step(p, {0.0, 1.5}).kind == StepKind::Transversal);
    CHECK_THROWS_AS(m->step(p, {5.0, 5.0}), NumericError);
}
