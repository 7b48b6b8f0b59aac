#include "unfold/ce.hpp"

#include <cmath>

#include "unfold/errors.hpp"
#include "unfold/manifolds.hpp"

namespace unfold {

void ConeSpec::validate(const UnfoldingModel& model, const ThetaSelection& theta) const {
    const Params base{};
    const double mu = model.mu(base), lam = model.lambda(base);
    if (!(std::cos(angle) > rho / mu))
        throw ValidationError("cone: cos(angle) must exceed rho/mu");
    const double mid = std::pow(lam, theta.theta) * mu * mu;
    if (!(rho > 1.0 && rho < mid && mid < mu))
        throw ValidationError("cone: need 1 < rho < lambda^theta mu^2 < mu");
    if (!(C > 0.0 && C < 1.0)) throw ValidationError("cone: need 0 < C < 1");
}

CEReport verify_tce(const UnfoldingModel& model, const ThetaSelection& theta,
                    const ConeSpec& cone, const Params& p, Vec2 x, int T, int samples) {
    (void)theta;
    CEReport rep;
    rep.T = T;

    std::vector<Mat2> jac;
    jac.reserve(static_cast<std::size_t>(T));
    Vec2 q = x;
    for (int s = 0; s < T; ++s) {
        const StepResult r = model.step(p, q);
        jac.push_back(model.step_jacobian(p, q, r.kind));
        q = r.point;
    }

    // Cone directions: uniform interior sample plus the two boundary rays.
    std::vector<Vec2> dirs;
    for (int i = 0; i < samples; ++i) {
        const double psi = -cone.angle + 2.0 * cone.angle * i / (samples - 1);
        dirs.push_back({std::sin(psi), std::cos(psi)});
    }
    dirs.push_back({std::sin(cone.angle), std::cos(cone.angle)});
    dirs.push_back({-std::sin(cone.angle), std::cos(cone.angle)});

    rep.worst_margin = std::numeric_limits<double>::infinity();
    rep.cone_return = true;
    for (const Vec2& v : dirs) {
        Vec2 w = v;
        double margin0 = 1.0 / cone.C;
        if (margin0 < rep.worst_margin) {
            rep.worst_margin = margin0;
            rep.worst_step = 0;
        }
        for (int s = 1; s <= T; ++s) {
            w = jac[static_cast<std::size_t>(s - 1)] * w;
            const double margin = w.norm() / (cone.C * std::pow(cone.rho, s));
            if (margin < rep.worst_margin) {
                rep.worst_margin = margin;
                rep.worst_step = s;
            }
        }
        const double final_angle = std::atan2(std::fabs(w.x), w.y);
        if (!(w.y > 0.0) || final_angle > cone.angle) rep.cone_return = false;
    }

    // Sample the contracted field X(f^T): (Df^T)^{-1} e1 near the base point.
    for (int i = -2; i <= 2; ++i) {
        Vec2 seed{x.x, x.y + 1e-6 * i * std::max(1.0, std::fabs(x.y))};
        Mat2 acc = Mat2::identity();
        Vec2 qq = seed;
        bool ok = true;
        for (int s = 0; s < T; ++s) {
            try {
                const StepResult r = model.step(p, qq);
                acc = model.step_jacobian(p, qq, r.kind) * acc;
                qq = r.point;
            } catch (const NumericError&) {
                ok = false;
                break;
            }
        }
        if (ok && std::fabs(acc.det()) > 1e-300) {
            const Vec2 field = acc.inverse() * Vec2{1.0, 0.0};
            rep.field_samples.push_back(field / std::max(field.norm(), 1e-300));
        }
    }
    return rep;
}

InductionReport check_induction_hypotheses(const UnfoldingModel& model,
                                           const ThetaSelection& theta,
                                           const ConeSpec& cone,
                                           const PartitionRealization& base,
                                           const Params& p) {
    (void)cone;
    InductionReport rep;
    rep.angle_ratio_min = std::numeric_limits<double>::infinity();
    rep.angle_ratio_max = 0.0;

    // IH_Q: exact linearity of the step on the saddle piece.
    const Box qbox = base.pieces[0].box;
    const double lam = model.lambda(p), mu = model.mu(p);
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            const Vec2 pt{qbox.lo.x + qbox.width() * i / 10.0,
                          qbox.lo.y + qbox.height() * j / 10.0};
            if (model.in_gluing_window(pt) || model.in_transversal_window(pt)) continue;
            const Vec2 image = model.apply_linear(p, pt, 1);
            const Vec2 exact{lam * pt.x, mu * pt.y};
            rep.linearity_error =
                std::max(rep.linearity_error, (image - exact).norm_inf());
        }
    }
    if (rep.linearity_error > 1e-14) {
        rep.hypotheses_ok = false;
        rep.failures.push_back("IH_Q: step is not linear on the saddle piece");
    }

    // IH_{C0}(ii): angle of DG e2 against the horizontal versus the vertical
    // distance to Gamma, two-sided.
    const PlaneCurve gamma = gamma_curve(model, p);
    const Box cbox = base.pieces[1].box;
    const double x_half = std::min(model.gamma_half_width() * 0.9, cbox.width() / 2.0);
    for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
            const Vec2 pt{-x_half + 2.0 * x_half * i / 20.0,
                          cbox.lo.y + cbox.height() * j / 20.0};
            const double dv = std::fabs(pt.y - gamma.height_at_x(pt.x));
            if (dv < 1e-6) continue;
            const Mat2 J = model.gluing_jacobian(p, pt);
            const Vec2 img{J.b, J.d};  // DG e2
            const double ang = std::atan2(std::fabs(img.y), std::fabs(img.x));
            if (!(ang > 0.0)) {
                rep.hypotheses_ok = false;
                rep.failures.push_back(
                    "IH_C0(ii): lower bound fails at x=" + std::to_string(pt.x) +
                    " y=" + std::to_string(pt.y));
                continue;
            }
            const double ratio = ang / dv;
            rep.angle_ratio_min = std::min(rep.angle_ratio_min, ratio);
            rep.angle_ratio_max = std::max(rep.angle_ratio_max, ratio);
        }
    }
    if (rep.hypotheses_ok)
        rep.K = 2.0 * std::max(rep.angle_ratio_max, 1.0 / rep.angle_ratio_min);

    // IH_{H0}, IH_{C0}(iii): compact C2 families, measured as derivative bounds.
    for (std::size_t piece : {std::size_t{1}, std::size_t{2}}) {
        const Box b = base.pieces[piece].box;
        for (int i = 0; i <= 8; ++i) {
            for (int j = 0; j <= 8; ++j) {
                const Vec2 pt{b.lo.x + b.width() * i / 8.0, b.lo.y + b.height() * j / 8.0};
                const Mat2 J = piece == 1 ? model.gluing_jacobian(p, pt)
                                          : model.transversal_jacobian(p, pt);
                const Hess2 H = piece == 1 ? model.gluing_hessian(p, pt)
                                           : model.transversal_hessian(p, pt);
                rep.family_bound = std::max(
                    {rep.family_bound, std::fabs(J.a), std::fabs(J.b), std::fabs(J.c),
                     std::fabs(J.d), std::fabs(H.h[1][1][1])});
            }
        }
    }
    if (!std::isfinite(rep.family_bound)) {
        rep.hypotheses_ok = false;
        rep.failures.push_back("IH families: derivative bounds not finite");
    }
    return rep;
}

bool ce_step5_inequality(const UnfoldingModel& model, const ThetaSelection& theta,
                         const ConeSpec& cone, double K, const Params& p, int n, int k) {
    const double lam = model.lambda(p), mu = model.mu(p);
    const double lhs = (1.0 / (4.0 * std::pow(K, 5.0))) * std::cos(cone.angle) *
                       std::pow(mu / cone.rho, n + k) *
                       std::pow(std::pow(lam, theta.theta) * mu, n);
    const double rhs = std::pow(cone.rho, model.gluing_steps());
    return lhs >= rhs;
}

int ce_min_depth(const UnfoldingModel& model, const ThetaSelection& theta,
                 const ConeSpec& cone, double K, const Params& p) {
    const double lam = model.lambda(p), mu = model.mu(p);
    const double cosphi = std::cos(cone.angle);
    const double rho = cone.rho;
    const int N = model.gluing_steps(), M = model.transversal_steps();
    const double beta_half = std::atan2(1.0, 0.0) / 2.0;  // transversal angle pi/2
    for (int n = 2; n <= 200; ++n) {
        const int n0 = std::max(1, static_cast<int>(std::floor(theta.alpha * n)));
        const double lthmu = std::pow(lam, theta.theta) * mu;
        const bool p2 = cosphi * mu >= rho;
        const bool p3 = (1.0 / K) * std::pow(mu / rho, n) * cosphi >= std::pow(rho, N);
        const bool p4 = (1.0 / (K * K)) * cosphi * std::pow(mu / rho, n) >= std::pow(rho, N);
        const bool p5 = (1.0 / (4.0 * std::pow(K, 5.0))) * cosphi *
                            std::pow(mu / rho, n + 1) * std::pow(lthmu, n) >=
                        std::pow(rho, N);
        const bool p6 = (1.0 / (4.0 * std::pow(K, 6.0))) * cosphi *
                            std::pow(mu / rho, n + n0) * std::pow(lthmu, n) >=
                        std::pow(rho, N + M);
        const bool p7 = (1.0 / (4.0 * std::pow(K, 6.0))) * cosphi * std::sin(beta_half) *
                            std::pow(mu / rho, n0 + 1) *
                            std::pow(lthmu * mu / rho, n) >=
                        std::pow(rho, N + M);
        if (p2 && p3 && p4 && p5 && p6 && p7) return n;
    }
    throw NumericError("ce_min_depth: inequalities never satisfied up to n = 200");
}

} // namespace unfold
