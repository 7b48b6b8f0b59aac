#pragma once

#include <functional>
#include <string>
#include <vector>

#include "unfold/geometry.hpp"

namespace unfold {

// Sampled parametrized plane curve with C2 access through natural cubic
// splines per coordinate. Parametrization must be strictly monotone.
class PlaneCurve {
public:
    PlaneCurve() = default;
    PlaneCurve(std::vector<double> s, std::vector<double> x, std::vector<double> y);

    static PlaneCurve from_function(const std::function<Vec2(double)>& f, double s_lo,
                                    double s_hi, std::size_t count);
    // Graph of y = g(x) over [x_lo, x_hi], parametrized by x.
    static PlaneCurve graph(const std::function<double(double)>& g, double x_lo,
                            double x_hi, std::size_t count);

    std::size_t size() const { return s_.size(); }
    double s_min() const { return s_.front(); }
    double s_max() const { return s_.back(); }
    const std::vector<double>& knots() const { return s_; }

    Vec2 eval(double s) const;
    Vec2 d1(double s) const;
    Vec2 d2(double s) const;

    // Height of the curve as a graph over x; requires monotone x samples.
    double height_at_x(double x) const;

    void write_csv(const std::string& path) const;

private:
    struct Spline {
        std::vector<double> a, b, c, d; // piecewise a + b*dt + c*dt^2 + d*dt^3
        double eval(const std::vector<double>& t, double s, int deriv) const;
    };

    std::size_t segment(double s) const;

    std::vector<double> s_;
    Spline sx_;
    Spline sy_;
};

// Plane curvature at parameter s. Throws on degenerate tangent.
double curvature_at(const PlaneCurve& curve, double s);

} // namespace unfold
