#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "unfold/errors.hpp"

namespace unfold {

// Golden-section minimization refined by a final parabolic fit.
double golden_min(const std::function<double(double)>& f, double a, double b,
                  double tol_rel = 1e-12, int max_iter = 200);

// Bisection for a bracketed sign change. f(a) and f(b) must differ in sign.
double bisect(const std::function<double(double)>& f, double a, double b,
              double ftol, int max_iter = 200);

// Scalar Newton with numeric or supplied derivative.
double newton1d(const std::function<double(double)>& f,
                const std::function<double(double)>& df, double x0, double ftol,
                int max_iter = 60);

// Central difference with one Richardson extrapolation step.
double central_diff(const std::function<double(double)>& f, double x, double h);

struct LinearFit {
    double slope{0.0};
    double intercept{0.0};
    double r2{0.0};
    std::size_t count{0};
};

LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

// Deterministic RNG wrapper used by every randomized routine.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return dist_(eng_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Dirichlet(1,1,1) by sorted uniform gaps.
    void simplex3(double& x, double& y, double& z) {
        double u = uniform(), v = uniform();
        if (u > v) std::swap(u, v);
        x = u;
        y = v - u;
        z = 1.0 - v;
    }

private:
    std::mt19937_64 eng_;
    std::uniform_real_distribution<double> dist_{0.0, 1.0};
};

} // namespace unfold
