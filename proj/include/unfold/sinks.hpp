#pragma once

#include <vector>

#include "unfold/tangency.hpp"

namespace unfold {

// The parameter strip A_n carrying a sink of period n + N.
struct SinkStrip {
    int n{0};
    double eps0{1.0 / 32.0};
    ModelPtr model;

    double center(double t) const { return solve_return_a(*model, n, t); }
    double halfwidth(double t) const;
    bool contains(double t, double a) const;
};

SinkStrip make_sink_strip(ModelPtr model, int n, double eps0);

// Maximum of the gluing quadratic coefficient over the critical window.
double max_quadratic_coefficient(const UnfoldingModel& model, const Params& p);

struct SinkCertificate {
    int n{0};
    int period{0};           // n + N in composite step count
    Vec2 box_center;
    double half_x{1.0 / 3.0};
    double half_y{0.0};
    Vec2 periodic_point;
    double spectral_radius{0.0};
    double boundary_margin{0.0};  // min normalized distance of the image to the box edge
    double entry22{0.0};
    double det_abs{0.0};
};

// Certifies the invariant box, the unique periodic point and its stability.
SinkCertificate certify_sink(const ModelPtr& model, const ThetaSelection& theta,
                             const Params& params, int n, int boundary_samples = 256);

struct NewhouseBox {
    int generation{1};
    std::vector<std::pair<int, int>> labels;  // (n, n0) per generation
    double t_lo{0.0}, t_hi{0.0};
    double a_lo{0.0}, a_hi{0.0};              // in the generation's own chart
    std::vector<double> curve_t;              // tangency curve restricted to the window
    std::vector<double> curve_a;
    std::vector<SinkCertificate> certificates;
    std::vector<NewhouseBox> children;
};

struct NewhouseOptions {
    int n_lo{12};
    int n_hi{16};
    int types_per_n{1};
    int child_budget{1};
    int boundary_samples{256};
};

// Builds generation-g Newhouse boxes by intersecting tangency curves with sink
// strips and recursing through the renormalized view.
std::vector<NewhouseBox> newhouse_recursion(const ModelPtr& model,
                                            const ThetaSelection& theta, int generations,
                                            const NewhouseOptions& opt = {});

struct DimensionReport {
    std::vector<double> log_inv_eps;
    std::vector<double> log_count;
    LinearFit fit;
    double theoretical_slope{0.0};
};

// Box-counting trend over first-generation boxes at their matched scales.
DimensionReport nh_box_dimension(const ModelPtr& model, const ThetaSelection& theta,
                                 const std::vector<NewhouseBox>& boxes);

} // namespace unfold
