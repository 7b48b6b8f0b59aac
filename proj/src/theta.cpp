#include "unfold/theta.hpp"

#include <cmath>
#include <limits>

#include "unfold/errors.hpp"

namespace unfold {

EigenExtremes eigen_extremes(const UnfoldingModel& model, int grid) {
    const ParamWindow w = model.window();
    EigenExtremes e;
    e.lambda_min = e.mu_min = std::numeric_limits<double>::infinity();
    e.lambda_max = e.mu_max = 0.0;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            Params p{-w.t0 + 2.0 * w.t0 * i / (grid - 1), -w.a0 + 2.0 * w.a0 * j / (grid - 1)};
            const double l = model.lambda(p), m = model.mu(p);
            e.lambda_min = std::min(e.lambda_min, l);
            e.lambda_max = std::max(e.lambda_max, l);
            e.mu_min = std::min(e.mu_min, m);
            e.mu_max = std::max(e.mu_max, m);
        }
    }
    return e;
}

double alpha_of(const UnfoldingModel& model, const Params& p, double theta) {
    const double l = model.lambda(p), m = model.mu(p);
    return std::log(std::pow(l, 2.0 * theta) * m * m * m) / std::log(m);
}

namespace {

void theta_bracket(const EigenExtremes& e, double& theta0, double& theta1) {
    theta0 = (4.0 / 3.0) * std::log(e.mu_max) / std::log(1.0 / e.lambda_max);
    theta1 = (3.0 / 2.0) * std::log(e.mu_min) / std::log(1.0 / e.lambda_min);
}

double worst_drift(const UnfoldingModel& model, const EigenExtremes& e, double theta) {
    const ParamWindow w = model.window();
    double worst = std::numeric_limits<double>::infinity();
    const int grid = 11;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            Params p{-w.t0 + 2.0 * w.t0 * i / (grid - 1), -w.a0 + 2.0 * w.a0 * j / (grid - 1)};
            const double v = (theta / e.lambda_max) * model.dlambda_dt(p) +
                             (1.0 / e.mu_max) * model.dmu_dt(p);
            worst = std::min(worst, v);
        }
    }
    return worst;
}

} // namespace

ThetaChecks theta_checks(const UnfoldingModel& model, double theta) {
    const EigenExtremes e = eigen_extremes(model);
    ThetaChecks c;
    c.lower_spectral = std::pow(e.lambda_min, 2.0 * theta) * std::pow(e.mu_min, 3.0);
    c.upper_spectral = std::pow(e.lambda_max, 3.0 * theta) * std::pow(e.mu_max, 4.0);
    c.drift_sign = worst_drift(model, e, theta);
    c.alpha = alpha_of(model, Params{}, theta);
    const double l = model.lambda(Params{}), m = model.mu(Params{});
    c.appendix_lhs = std::pow(l, theta) * std::pow(m, 1.0 + c.alpha);
    c.appendix_rhs = std::pow(l, c.alpha);
    double theta0 = 0.0, theta1 = 0.0;
    theta_bracket(e, theta0, theta1);
    c.in_bracket = theta > theta0 && theta < theta1 && theta1 < 0.5 && theta0 > 0.0;
    return c;
}

ThetaSelection select_theta(const UnfoldingModel& model, int grid_points) {
    const EigenExtremes e = eigen_extremes(model);
    if (!(e.lambda_max * std::pow(e.mu_max, 3.0) < 1.0))
        throw ValidationError("select_theta: lambda_max * mu_max^3 >= 1 on the window");
    double theta0 = 0.0, theta1 = 0.0;
    theta_bracket(e, theta0, theta1);
    if (!(theta1 < 0.5))
        throw NumericError("select_theta: upper bracket reaches 1/2; shrink the window");
    if (!(theta0 < theta1))
        throw NumericError("select_theta: empty bracket (theta0 >= theta1); shrink the window");
    std::string last_failure = "empty bracket";
    for (int k = 1; k <= grid_points; ++k) {
        const double theta = theta0 + (theta1 - theta0) * k / (grid_points + 1.0);
        const ThetaChecks c = theta_checks(model, theta);
        if (c.pass()) {
            ThetaSelection sel;
            sel.theta = theta;
            sel.alpha = c.alpha;
            sel.theta0 = theta0;
            sel.theta1 = theta1;
            return sel;
        }
        if (!(c.lower_spectral > 1.0))
            last_failure = "lambda_min^{2theta} mu_min^3 > 1";
        else if (!(c.upper_spectral < 1.0))
            last_failure = "lambda_max^{3theta} mu_max^4 < 1";
        else if (!(c.drift_sign > 0.0))
            last_failure = "(theta/lambda_max) dlambda/dt + (1/mu_max) dmu/dt > 0";
        else
            last_failure = "lambda^theta mu^{1+alpha} > lambda^alpha";
    }
    throw NumericError("select_theta: no feasible theta; violated: " + last_failure);
}

} // namespace unfold
