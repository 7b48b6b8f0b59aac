#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "unfold/manifolds.hpp"
#include "unfold/model.hpp"
#include "unfold/numerics.hpp"

namespace unfold {

// Gluing coefficients measured at the critical point; the constants entering
// the displacement and speed estimates.
struct GluingCoefficients {
    double B{0.0};
    double C{0.0};  // dG_y/dx
    double Q{0.0};  // (1/2) d^2 G_y/dy^2
    double D{0.0};  // d^2 G_y/dy^2 = 2 Q
};

GluingCoefficients measure_gluing(const UnfoldingModel& model, const Params& p);

// Stages of the loop as jet-valued curves over the seed offset u at the
// critical point: W^u_loc(z), its theta*n image, the first return, the n-step
// climb, the final return. The theta phase uses the exact real exponent of
// the diagonal flow by default; integer mode matches the stepwise chains of
// the combinatorial layer.
class LoopStages {
public:
    LoopStages(const UnfoldingModel& model, const ThetaSelection& theta, Params p, int n,
               bool integer_theta = false);

    Jet2 seed(double u) const;          // (0, c_y + u)
    Jet2 at_z_curve(double u) const;    // after the gluing
    Jet2 at_cprime(double u) const;     // after theta_n linear steps
    Jet2 at_z1_curve(double u) const;   // after the second gluing
    Jet2 at_z2_curve(double u) const;   // after n linear steps
    Jet2 at_z3_curve(double u) const;   // after the third gluing

    int theta_n() const { return theta_n_; }
    double theta_exponent() const { return theta_exp_; }
    const Params& params() const { return p_; }

private:
    const UnfoldingModel& model_;
    Params p_;
    int n_;
    int theta_n_;
    double theta_exp_;
    double c_height_;
};

struct LoopTrace {
    int n{0};
    int theta_n{0};
    Params params;
    Vec2 z;
    Vec2 z1, z2, z3;
    std::array<Vec2, 6> waypoints;  // m1..m6 along the winning seed offset
    int n0{0};                      // tangency depth (wedge index offset)
    int climb{0};                   // linear steps from z3 to the transversal window
    double curvature_z3{0.0};
    double slope_z1{0.0};
    double slope_z3{0.0};
    double u_cprime{0.0};
    double u_z1{0.0};
    double u_z3{0.0};
    double seed_halfwidth{0.0};
    double L_used{0.0};

    std::string to_json() const;
};

// Runs the three-stage loop construction at (params, n). L sizes the local
// unstable segments and doubles once automatically when a minimum lands on
// the window boundary.
LoopTrace trace_loop(const UnfoldingModel& model, const ThetaSelection& theta,
                     const Params& p, int n, double L = 10.0, bool branch_high = true,
                     bool integer_theta = false);

// Solves mu(t,a)^n * z_y(t,a) = c(lambda^n z_x, t, a) for a (the return curve).
double solve_return_a(const UnfoldingModel& model, int n, double t,
                      double ftol = 1e-13);

// Central finite-difference estimate of the z3 height sensitivity.
double z3_speed(const UnfoldingModel& model, const ThetaSelection& theta,
                const Params& p, int n, ParamDirection dir, double L = 10.0);

struct RegressionReport {
    std::vector<double> xs;
    std::vector<double> ys;
    LinearFit fit;
    double theoretical_slope{0.0};
};

// Fits log curvature(z3) against n on the return curve a_n(t).
RegressionReport z3_curvature_growth(const UnfoldingModel& model,
                                     const ThetaSelection& theta, double t, int n_lo,
                                     int n_hi, double L = 10.0);

} // namespace unfold
