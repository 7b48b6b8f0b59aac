#pragma once

#include "unfold/model.hpp"

namespace unfold {

struct EigenExtremes {
    double lambda_min{0.0}, lambda_max{0.0};
    double mu_min{0.0}, mu_max{0.0};
};

EigenExtremes eigen_extremes(const UnfoldingModel& model, int grid = 41);

struct ThetaChecks {
    double lower_spectral{0.0};   // lambda_min^{2 theta} mu_min^3, must be > 1
    double upper_spectral{0.0};   // lambda_max^{3 theta} mu_max^4, must be < 1
    double drift_sign{0.0};       // (theta/lambda_max) dl/dt + (1/mu_max) dm/dt, > 0
    double appendix_lhs{0.0};     // lambda^theta mu^{1+alpha}
    double appendix_rhs{0.0};     // lambda^alpha
    double alpha{0.0};
    bool in_bracket{false};
    bool pass() const {
        return lower_spectral > 1.0 && upper_spectral < 1.0 && drift_sign > 0.0 &&
               appendix_lhs > appendix_rhs && in_bracket && alpha > 0.0 && alpha < 1.0;
    }
};

// Evaluates every inequality behind a candidate theta, independently of the
// search path.
ThetaChecks theta_checks(const UnfoldingModel& model, double theta);

double alpha_of(const UnfoldingModel& model, const Params& p, double theta);

// Scans (theta0, theta1) on a uniform grid; the first feasible point wins.
// Throws NumericError naming the violated inequality when infeasible.
ThetaSelection select_theta(const UnfoldingModel& model, int grid_points = 10000);

} // namespace unfold
