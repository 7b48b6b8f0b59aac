#include "unfold/henon.hpp"

#include <cmath>

#include "unfold/errors.hpp"
#include "unfold/numerics.hpp"

namespace unfold {
namespace henon {

Vec2 map(double a, double b, Vec2 q) { return {a - q.x * q.x - b * q.y, q.x}; }

Mat2 jacobian(double b, Vec2 q) { return {-2.0 * q.x, -b, 1.0, 0.0}; }

Vec2 saddle(double a, double b) {
    const double disc = (1.0 + b) * (1.0 + b) + 4.0 * a;
    if (disc <= 0.0) throw NumericError("henon::saddle: no real fixed point");
    double x = (-(1.0 + b) - std::sqrt(disc)) / 2.0;
    // Newton polish on x + x^2 + b x - a ... the fixed point equation
    // x = a - x^2 - b x.
    for (int i = 0; i < 60; ++i) {
        const double f = x * x + (1.0 + b) * x - a;
        const double df = 2.0 * x + 1.0 + b;
        if (df == 0.0) throw NumericError("henon::saddle: singular Newton");
        const double step = f / df;
        x -= step;
        if (std::fabs(step) < 1e-16 * std::max(1.0, std::fabs(x))) break;
    }
    const Vec2 p{x, x};
    if ((map(a, b, p) - p).norm_inf() > 1e-12)
        throw NumericError("henon::saddle: Newton did not reach the fixed point");
    return p;
}

std::pair<double, double> eigenvalues(double a, double b) {
    const Vec2 p = saddle(a, b);
    const double tr = -2.0 * p.x;
    const double det = b;
    const double disc = tr * tr - 4.0 * det;
    if (disc < 0.0) throw NumericError("henon::eigenvalues: complex saddle spectrum");
    const double r = std::sqrt(disc);
    double mu = (tr + r) / 2.0;
    double lam = (tr - r) / 2.0;
    if (std::fabs(mu) < std::fabs(lam)) std::swap(mu, lam);
    return {mu, lam};
}

std::array<double, 2> core_fixed_points(double a) {
    const double disc = 1.0 + 4.0 * a;
    if (disc < 0.0) throw NumericError("henon::core_fixed_points: none");
    const double r = std::sqrt(disc);
    return {(-1.0 + r) / 2.0, (-1.0 - r) / 2.0};
}

namespace {

// Monomial index for u^i v^j with i + j <= 3.
int midx(int i, int j) {
    static const int lut[4][4] = {{0, 1, 2, 3}, {4, 5, 6, -1}, {7, 8, -1, -1},
                                  {9, -1, -1, -1}};
    return lut[i][j];
}

} // namespace

Vec2 NormalFormChart::forward(Vec2 xi) const {
    Vec2 w{0.0, 0.0};
    double upow[4] = {1.0, xi.x, xi.x * xi.x, xi.x * xi.x * xi.x};
    double vpow[4] = {1.0, xi.y, xi.y * xi.y, xi.y * xi.y * xi.y};
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; i + j <= 3; ++j) {
            if (i == 0 && j == 0) continue;
            const Vec2 c = coef[static_cast<std::size_t>(midx(i, j))];
            w = w + c * (upow[i] * vpow[j]);
        }
    return p + w;
}

Mat2 NormalFormChart::forward_jacobian(Vec2 xi) const {
    Mat2 J{0, 0, 0, 0};
    double upow[4] = {1.0, xi.x, xi.x * xi.x, xi.x * xi.x * xi.x};
    double vpow[4] = {1.0, xi.y, xi.y * xi.y, xi.y * xi.y * xi.y};
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; i + j <= 3; ++j) {
            if (i == 0 && j == 0) continue;
            const Vec2 c = coef[static_cast<std::size_t>(midx(i, j))];
            if (i > 0) {
                const double m = i * upow[i - 1] * vpow[j];
                J.a += c.x * m;
                J.c += c.y * m;
            }
            if (j > 0) {
                const double m = j * upow[i] * vpow[j - 1];
                J.b += c.x * m;
                J.d += c.y * m;
            }
        }
    return J;
}

Vec2 NormalFormChart::inverse(Vec2 w) const {
    // Newton from the linear part.
    const Vec2 rhs = w - p;
    const Mat2 B{coef[static_cast<std::size_t>(midx(1, 0))].x,
                 coef[static_cast<std::size_t>(midx(0, 1))].x,
                 coef[static_cast<std::size_t>(midx(1, 0))].y,
                 coef[static_cast<std::size_t>(midx(0, 1))].y};
    Vec2 xi = B.inverse() * rhs;
    for (int i = 0; i < 80; ++i) {
        const Vec2 res = forward(xi) - w;
        if (res.norm_inf() <= 1e-14 * std::max(1.0, xi.norm_inf())) return xi;
        xi = xi - forward_jacobian(xi).inverse() * res;
        if (!std::isfinite(xi.x) || !std::isfinite(xi.y))
            throw NumericError("chart inverse: Newton diverged");
    }
    if ((forward(xi) - w).norm_inf() > 1e-10)
        throw NumericError("chart inverse: no convergence");
    return xi;
}

NormalFormChart build_chart(double a, double b, double resonance_tol) {
    NormalFormChart ch;
    ch.p = saddle(a, b);
    const auto [mu, lam] = eigenvalues(a, b);
    ch.lambda = lam;
    ch.mu = mu;
    // Unit eigenvectors (xi, 1)/norm as the linear chart columns.
    auto col = [](double eig) {
        Vec2 v{eig, 1.0};
        return v / v.norm();
    };
    const Vec2 vs = col(lam), vu = col(mu);
    ch.coef.fill(Vec2{0.0, 0.0});
    ch.coef[static_cast<std::size_t>(midx(1, 0))] = vs;
    ch.coef[static_cast<std::size_t>(midx(0, 1))] = vu;

    const Mat2 A = jacobian(b, ch.p);
    auto solve_monomial = [&](double eig_pow, Vec2 q) {
        for (double eig : {lam, mu})
            if (std::fabs(eig_pow - eig) < resonance_tol)
                throw ValidationError("henon chart: resonance within tolerance");
        const Mat2 lhs{eig_pow - A.a, -A.b, -A.c, eig_pow - A.d};
        return lhs.inverse() * q;
    };

    // Quadratic terms: (lam^i mu^j I - A) c_ij = Q(B xi) coefficients, with
    // Q(w) = (-w_x^2, 0).
    const double b1 = vs.x, b2 = vu.x;
    ch.coef[static_cast<std::size_t>(midx(2, 0))] = solve_monomial(lam * lam, {-b1 * b1, 0.0});
    ch.coef[static_cast<std::size_t>(midx(1, 1))] = solve_monomial(lam * mu, {-2.0 * b1 * b2, 0.0});
    ch.coef[static_cast<std::size_t>(midx(0, 2))] = solve_monomial(mu * mu, {-b2 * b2, 0.0});

    // Cubic terms: 2 Q~(B xi, phi2(xi)) with Q~(w, w') = (-w_x w'_x, 0).
    const double c20 = ch.coef[static_cast<std::size_t>(midx(2, 0))].x;
    const double c11 = ch.coef[static_cast<std::size_t>(midx(1, 1))].x;
    const double c02 = ch.coef[static_cast<std::size_t>(midx(0, 2))].x;
    // (b1 u + b2 v)(c20 u^2 + c11 uv + c02 v^2) expanded:
    const double r30 = b1 * c20;
    const double r21 = b1 * c11 + b2 * c20;
    const double r12 = b1 * c02 + b2 * c11;
    const double r03 = b2 * c02;
    ch.coef[static_cast<std::size_t>(midx(3, 0))] =
        solve_monomial(lam * lam * lam, {-2.0 * r30, 0.0});
    ch.coef[static_cast<std::size_t>(midx(2, 1))] =
        solve_monomial(lam * lam * mu, {-2.0 * r21, 0.0});
    ch.coef[static_cast<std::size_t>(midx(1, 2))] =
        solve_monomial(lam * mu * mu, {-2.0 * r12, 0.0});
    ch.coef[static_cast<std::size_t>(midx(0, 3))] =
        solve_monomial(mu * mu * mu, {-2.0 * r03, 0.0});
    return ch;
}

} // namespace henon

// ---------------------------------------------------------------------------

double HenonModel::b_of_t(double t) const { return b0_ * (1.0 + t_sign_ * t); }

HenonModel::ChartData HenonModel::structure_at(double a_h, double b_h) const {
    ChartData d;
    d.a_henon = a_h;
    d.b_henon = b_h;
    d.chart = henon::build_chart(a_h, b_h);

    // Reference unstable height and the step count of the fold return.
    const double v_ref = 0.08;
    Vec2 w = d.chart.forward({0.0, v_ref});
    int steps = 0;
    bool found = false;
    for (int k = 1; k <= 60; ++k) {
        w = henon::map(a_h, b_h, w);
        if (k >= 2 && (w - d.chart.p).norm() < 0.02) {
            steps = k;
            found = true;
            break;
        }
    }
    if (!found) throw NumericError("henon: fold return not found");
    d.n_steps = steps;

    // Critical height in the reference band, then the chart normalization.
    const double v_crit = critical_height_unscaled(d, 0.0);
    d.scale_y = v_crit;
    Vec2 z = d.chart.inverse([&] {
        Vec2 q = d.chart.forward({0.0, v_crit});
        for (int k = 0; k < d.n_steps; ++k) q = henon::map(a_h, b_h, q);
        return q;
    }());
    if (z.x == 0.0) throw NumericError("henon: degenerate critical value");
    d.scale_x = z.x;
    return d;
}

double HenonModel::dy_dy(const ChartData& d, double x, double y) const {
    // d/dy of the chart-Y component of the fold return, by exact chain rule.
    Vec2 q = d.chart.forward({x, y});
    Mat2 J = d.chart.forward_jacobian({x, y});
    for (int k = 0; k < d.n_steps; ++k) {
        J = henon::jacobian(d.b_henon, q) * J;
        q = henon::map(d.a_henon, d.b_henon, q);
    }
    const Vec2 xi = d.chart.inverse(q);
    J = d.chart.forward_jacobian(xi).inverse() * J;
    return J.d;  // dY/dy
}

double HenonModel::critical_height_unscaled(const ChartData& d, double x_unscaled) const {
    const double v_ref = (d.scale_y == 1.0 && d.scale_x == 1.0) ? 0.08 : d.scale_y;
    double y = v_ref;
    for (int i = 0; i < 80; ++i) {
        const double f = dy_dy(d, x_unscaled, y);
        const double h = 1e-7 * std::max(std::fabs(y), 1e-3);
        const double df =
            (dy_dy(d, x_unscaled, y + h) - dy_dy(d, x_unscaled, y - h)) / (2.0 * h);
        if (df == 0.0) throw NumericError("henon: degenerate critical-height Newton");
        const double step = f / df;
        y -= step;
        if (std::fabs(step) < 1e-15 * std::fabs(y)) break;
    }
    return y;
}

HenonModel::HenonModel(double b0) : b0_(b0) {
    if (!(b0 > 0.0)) throw ValidationError("henon: b must be positive");
    // Optionally flip the t-direction so that the unstable eigenvalue grows.
    const double a_guess = 2.0;
    const auto [mu0, l0] = henon::eigenvalues(a_guess, b0);
    (void)l0;
    const auto [mu1, l1] = henon::eigenvalues(a_guess, b0 * 1.01);
    (void)l1;
    t_sign_ = (mu1 > mu0) ? 1 : -1;
    // Resolve the reference structure (also fixes N).
    const ChartData d = data_for(Params{0.0, 0.0});
    n_steps_ = d.n_steps;
    const auto [mu, lam] = henon::eigenvalues(d.a_henon, d.b_henon);
    if (!(std::fabs(lam) * std::pow(std::fabs(mu), 3.0) < 1.0))
        throw ValidationError("henon: eigenvalue condition lambda mu^3 < 1 fails");
}

const HenonModel::ChartData& HenonModel::data_for(const Params& p) const {
    for (const auto& [key, value] : cache_)
        if (key.t == p.t && key.a == p.a) return value;

    const double b_h = b_of_t(p.t);
    // Solve the Henon parameter so the chart height of the critical value is a.
    double a_h = cache_.empty() ? 2.0 : cache_.back().second.a_henon;
    ChartData d = structure_at(a_h, b_h);
    auto zy = [&](const ChartData& dd) {
        Vec2 q = dd.chart.forward({0.0, dd.scale_y});
        for (int k = 0; k < dd.n_steps; ++k) q = henon::map(dd.a_henon, dd.b_henon, q);
        return dd.chart.inverse(q).y / dd.scale_y;
    };
    double f = zy(d) - p.a;
    for (int i = 0; i < 60 && std::fabs(f) > 1e-14; ++i) {
        const double h = std::max(1e-8, 1e-6 * std::fabs(a_h));
        const ChartData dp = structure_at(a_h + h, b_h);
        const double df = (zy(dp) - p.a - f) / h;
        if (df == 0.0 || !std::isfinite(df))
            throw NumericError("henon: parameter normalization stalled");
        a_h -= f / df;
        d = structure_at(a_h, b_h);
        f = zy(d) - p.a;
    }
    if (std::fabs(f) > 1e-12)
        throw NumericError("henon: critical-value normalization did not converge");
    if (cache_.size() > 32) cache_.erase(cache_.begin());
    cache_.push_back({p, d});
    return cache_.back().second;
}

std::pair<double, double> HenonModel::henon_params(const Params& p) const {
    const ChartData& d = data_for(p);
    return {d.a_henon, d.b_henon};
}

double HenonModel::tangency_a(double t) const {
    return data_for(Params{t, 0.0}).a_henon;
}

double HenonModel::lambda(const Params& p) const {
    const ChartData& d = data_for(p);
    return henon::eigenvalues(d.a_henon, d.b_henon).second;
}

double HenonModel::mu(const Params& p) const {
    const ChartData& d = data_for(p);
    return henon::eigenvalues(d.a_henon, d.b_henon).first;
}

double HenonModel::dlambda_dt(const Params& p) const {
    const double h = 1e-4;
    return (lambda(Params{p.t + h, p.a}) - lambda(Params{p.t - h, p.a})) / (2.0 * h);
}
double HenonModel::dlambda_da(const Params& p) const {
    const double h = 1e-6;
    return (lambda(Params{p.t, p.a + h}) - lambda(Params{p.t, p.a - h})) / (2.0 * h);
}
double HenonModel::dmu_dt(const Params& p) const {
    const double h = 1e-4;
    return (mu(Params{p.t + h, p.a}) - mu(Params{p.t - h, p.a})) / (2.0 * h);
}
double HenonModel::dmu_da(const Params& p) const {
    const double h = 1e-6;
    return (mu(Params{p.t, p.a + h}) - mu(Params{p.t, p.a - h})) / (2.0 * h);
}

Vec2 HenonModel::chart_point(const ChartData& d, Vec2 q) const {
    return d.chart.forward({q.x * d.scale_x, q.y * d.scale_y});
}

Vec2 HenonModel::chart_coords(const ChartData& d, Vec2 w) const {
    const Vec2 xi = d.chart.inverse(w);
    return {xi.x / d.scale_x, xi.y / d.scale_y};
}

Vec2 HenonModel::return_map(const ChartData& d, Vec2 q) const {
    Vec2 w = chart_point(d, q);
    for (int k = 0; k < d.n_steps; ++k) w = henon::map(d.a_henon, d.b_henon, w);
    return chart_coords(d, w);
}

Mat2 HenonModel::return_jacobian(const ChartData& d, Vec2 q) const {
    const Vec2 xi{q.x * d.scale_x, q.y * d.scale_y};
    Vec2 w = d.chart.forward(xi);
    Mat2 J = d.chart.forward_jacobian(xi);
    for (int k = 0; k < d.n_steps; ++k) {
        J = henon::jacobian(d.b_henon, w) * J;
        w = henon::map(d.a_henon, d.b_henon, w);
    }
    const Vec2 out = d.chart.inverse(w);
    J = d.chart.forward_jacobian(out).inverse() * J;
    return {J.a * d.scale_x / d.scale_x, J.b * d.scale_x / d.scale_y,
            J.c * d.scale_y / d.scale_x, J.d * d.scale_y / d.scale_y};
}

Vec2 HenonModel::apply_gluing(const Params& p, Vec2 q) const {
    return return_map(data_for(p), q);
}

Mat2 HenonModel::gluing_jacobian(const Params& p, Vec2 q) const {
    return return_jacobian(data_for(p), q);
}

Hess2 HenonModel::gluing_hessian(const Params& p, Vec2 q) const {
    const double h = 1e-6;
    Hess2 out;
    for (int dir = 0; dir < 2; ++dir) {
        const Vec2 dq = dir == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
        const Mat2 jp = gluing_jacobian(p, q + dq);
        const Mat2 jm = gluing_jacobian(p, q - dq);
        out.h[0][0][dir] = (jp.a - jm.a) / (2.0 * h);
        out.h[0][1][dir] = (jp.b - jm.b) / (2.0 * h);
        out.h[1][0][dir] = (jp.c - jm.c) / (2.0 * h);
        out.h[1][1][dir] = (jp.d - jm.d) / (2.0 * h);
    }
    return out;
}

Vec2 HenonModel::apply_transversal(const Params&, Vec2) const {
    throw NumericError("henon backend: the transversal return is not realized");
}

Mat2 HenonModel::transversal_jacobian(const Params&, Vec2) const {
    throw NumericError("henon backend: the transversal return is not realized");
}

double HenonModel::critical_height(const Params& p, double x) const {
    const ChartData& d = data_for(p);
    return critical_height_unscaled(d, x * d.scale_x) / d.scale_y;
}

double HenonModel::gamma_residual(const Params& p, double x) const {
    const ChartData& d = data_for(p);
    const double y = critical_height_unscaled(d, x * d.scale_x);
    return std::fabs(dy_dy(d, x * d.scale_x, y));
}

ModelPtr make_henon_model(double b) { return std::make_shared<HenonModel>(b); }

} // namespace unfold
