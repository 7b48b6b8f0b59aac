#include "unfold/measures.hpp"

#include <cmath>

#include "unfold/errors.hpp"

namespace unfold {

double MeasureVec::norm() const {
    if (!vertex_basis) throw ValidationError("MeasureVec::norm: convert to vertex basis");
    return std::max({std::fabs(x), std::fabs(y), std::fabs(z)});
}

MeasureVec MeasureVec::vertex(double x, double y, double z) {
    return MeasureVec{x, y, z, true};
}

double MassFormulas::mass_q(const MeasureVec& m) const {
    return m.x / N + m.y / M + m.z;
}
double MassFormulas::mass_c_minus_q(const MeasureVec& m) const {
    return m.x * (N - 1.0) / N;
}
double MassFormulas::mass_h_minus_q(const MeasureVec& m) const {
    return m.y * (M - 1.0) / M;
}

TransferMatrix TransferMatrix::from_counts(int l_low, int theta_n, int n, int n0,
                                           int l_up) {
    if (l_low < 0 || theta_n < 0 || n < 0 || n0 < 0 || l_up < 0)
        throw ValidationError("transfer_matrix: counts must be >= 0");
    TransferMatrix t;
    t.m[0] = {1, static_cast<std::int64_t>(l_low) + theta_n + n + n0 + l_up,
              static_cast<std::int64_t>(l_low) + l_up};
    t.m[1] = {0, 3, 0};
    t.m[2] = {0, 1, 1};
    return t;
}

TransferMatrix transfer_matrix(int l_low, int theta_n, int n, int n0, int l_up) {
    return TransferMatrix::from_counts(l_low, theta_n, n, n0, l_up);
}

TransferMatrix transfer_matrix_by_counting(const GraphMorphism& w) {
    TransferMatrix t;
    // Column 1: delta^q pushes to delta^q.
    t.m[0][0] = 1;
    t.m[1][0] = 0;
    t.m[2][0] = 0;
    // Column 2: count the target vertices hit by the source c-loop vertices.
    std::int64_t to_q = 0, per_c = 0, per_h = 0;
    for (int i = 0; i < w.source.N; ++i) {
        const int v = w.apply(w.source.c(i));
        if (w.target.is_q(v)) ++to_q;
        if (v == w.target.c(0)) ++per_c;
        if (v == w.target.h(0)) ++per_h;
    }
    t.m[0][1] = to_q;
    t.m[1][1] = per_c;
    t.m[2][1] = per_h;
    // Column 3: the same count over the source h-loop.
    to_q = per_c = per_h = 0;
    for (int j = 0; j < w.source.M; ++j) {
        const int v = w.apply(w.source.h(j));
        if (w.target.is_q(v)) ++to_q;
        if (v == w.target.c(0)) ++per_c;
        if (v == w.target.h(0)) ++per_h;
    }
    t.m[0][2] = to_q;
    t.m[1][2] = per_c;
    t.m[2][2] = per_h;
    return t;
}

MeasureVec push_simplex(const MeasureVec& mu, const TransferMatrix& w,
                        std::pair<int, int> source_dims, std::pair<int, int> target_dims) {
    if (!mu.vertex_basis)
        throw ValidationError("push_simplex: expects vertex-basis coordinates");
    const double sn = source_dims.first, sm = source_dims.second;
    const double tn = target_dims.first, tm = target_dims.second;
    // Standard coordinates (delta^q, delta^c, delta^h).
    const double sq = mu.z, sc = mu.x / sn, sh = mu.y / sm;
    double oq = w.m[0][0] * sq + w.m[0][1] * sc + w.m[0][2] * sh;
    double oc = w.m[1][0] * sq + w.m[1][1] * sc + w.m[1][2] * sh;
    double oh = w.m[2][0] * sq + w.m[2][1] * sc + w.m[2][2] * sh;
    // Push-forward preserves total mass; renormalize the float drift.
    const double mass = oq + oc * tn + oh * tm;
    if (std::fabs(mass - 1.0) > 1e-12)
        throw PropertyError("push_simplex: mass drifted beyond tolerance");
    oq /= mass;
    oc /= mass;
    oh /= mass;
    MeasureVec out = MeasureVec::vertex(oc * tn, oh * tm, oq);
    if (out.x < -1e-14 || out.y < -1e-14 || out.z < -1e-14)
        throw PropertyError("push_simplex: negative simplex coordinate");
    return out;
}

std::vector<ChainLevel> make_dims_chain(int levels, int n0_base, int m0_base,
                                        int growth_factor) {
    if (levels < 2) throw ValidationError("make_dims_chain: need at least two levels");
    std::vector<ChainLevel> chain(static_cast<std::size_t>(levels));
    chain[0].N = n0_base;
    chain[0].M = m0_base;
    for (int g = 0; g + 1 < levels; ++g) {
        ChainLevel& lo = chain[static_cast<std::size_t>(g)];
        const int target_n = growth_factor * std::max(lo.N, lo.M);
        const int target_m = growth_factor * std::max(lo.N, lo.M) + 1;
        // N_{g+1} = l_low + 3 N_g + theta_n + n + n0 + M_g + l_up
        // M_{g+1} = l_low + M_g + l_up
        const int l_low = std::max(1, (target_m - lo.M) / 2);
        const int l_up = target_m - lo.M - l_low;
        int rest = target_n - 3 * lo.N - lo.M - l_low - l_up;
        if (l_up < 0 || rest < 3)
            throw ValidationError("make_dims_chain: growth factor too small");
        const int theta_n = rest / 3, n = rest / 3;
        const int n0 = rest - theta_n - n;
        lo.w = transfer_matrix(l_low, theta_n, n, n0, l_up);
        chain[static_cast<std::size_t>(g + 1)].N = target_n;
        chain[static_cast<std::size_t>(g + 1)].M = target_m;
    }
    return chain;
}

ContractionReport verify_contraction(const std::vector<ChainLevel>& chain, int trials,
                                     Rng& rng, double tol) {
    if (chain.size() < 2) throw ValidationError("verify_contraction: need >= 2 levels");
    ContractionReport rep;
    rep.levels.resize(chain.size() - 1);
    const int levels = static_cast<int>(chain.size());
    for (int trial = 0; trial < trials; ++trial) {
        double x, y, z;
        rng.simplex3(x, y, z);
        MeasureVec mu = MeasureVec::vertex(x, y, z);
        // Walk the measure down the tower from the deepest level.
        double dist = std::max({std::fabs(mu.x), std::fabs(mu.y), std::fabs(mu.z - 1.0)});
        for (int g = levels - 2; g >= 0; --g) {
            const ChainLevel& lo = chain[static_cast<std::size_t>(g)];
            const ChainLevel& hi = chain[static_cast<std::size_t>(g + 1)];
            const MeasureVec next =
                push_simplex(mu, lo.w, {hi.N, hi.M}, {lo.N, lo.M});
            const double next_dist = std::max(
                {std::fabs(next.x), std::fabs(next.y), std::fabs(next.z - 1.0)});
            ContractionLevel& lvl = rep.levels[static_cast<std::size_t>(g)];
            if (dist > 0.0)
                lvl.worst_factor = std::max(lvl.worst_factor, next_dist / dist);
            if (next_dist > 0.5 * dist + tol) rep.all_contracting = false;
            mu = next;
            dist = next_dist;
            // After s = levels-1-g pushes the distance must be below 2^{-s}.
            const int s = levels - 1 - g;
            lvl.max_distance = std::max(lvl.max_distance, dist);
            if (dist > std::pow(0.5, s) + tol) rep.distance_law_ok = false;
        }
    }
    return rep;
}

} // namespace unfold
