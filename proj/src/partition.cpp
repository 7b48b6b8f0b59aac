#include "unfold/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "unfold/critical_orbit.hpp"
#include "unfold/errors.hpp"

namespace unfold {

double PartitionRealization::mesh() const {
    double m = 0.0;
    for (const PartitionPiece& p : pieces) m = std::max(m, p.box.diameter());
    return m;
}

int PartitionRealization::piece_containing(const Vec2& q) const {
    for (std::size_t i = 0; i < pieces.size(); ++i)
        if (pieces[i].box.contains(q)) return static_cast<int>(i);
    return -1;
}

void PartitionRealization::check_disjoint() const {
    for (std::size_t i = 0; i < pieces.size(); ++i)
        for (std::size_t j = i + 1; j < pieces.size(); ++j)
            if (!pieces[i].box.disjoint(pieces[j].box))
                throw PropertyError("partition: pieces " + graph.vertex_name(int(i)) +
                                    " and " + graph.vertex_name(int(j)) + " intersect");
}

PartitionRealization realize_base_partition(const UnfoldingModel& model, const Params& p) {
    if (model.gluing_steps() != 1 || model.transversal_steps() != 1)
        throw ValidationError("realize_base_partition: needs composite returns (N = M = 1)");
    PartitionRealization out;
    out.graph = build_graph(1, 1);
    const Box g = model.gluing_window_box();
    const Box h = model.transversal_window_box();
    // The saddle box must clear both windows and contain the return landings.
    const double top = std::min(g.lo.y, h.lo.y) - 0.05;
    PartitionPiece q_piece{Box{{-1.3, -top}, {1.3, top}}, {0.0, 0.0}, out.graph.q()};
    PartitionPiece c_piece{g, model.critical_point(p), out.graph.c(0)};
    PartitionPiece h_piece{h, {0.0, h.center().y}, out.graph.h(0)};
    out.pieces = {q_piece, c_piece, h_piece};
    out.check_disjoint();
    return out;
}

namespace {

double cheby(const Vec2& a, const Vec2& b) {
    return std::max(std::fabs(a.x - b.x), std::fabs(a.y - b.y));
}

struct OrbitPoint {
    Vec2 pt;
    StepKind tag_out;  // step kind applied when leaving this point
};

} // namespace

ChildPartition realize_child_partition(const UnfoldingModel& model,
                                       const ThetaSelection& theta, const Params& p,
                                       int n, double mesh_cap) {
    const LoopTrace tr = trace_loop(model, theta, p, n, 10.0, true, /*integer*/ true);
    ChildPartition out;

    // Forward core of the critical chain: from m1 through the transversal step.
    std::vector<OrbitPoint> core;
    {
        Vec2 q{0.0, model.critical_height(p, 0.0) + tr.u_z3};
        bool seen_transversal = false;
        for (int guard = 0; guard < 8 * n + 64; ++guard) {
            const StepResult r = model.step(p, q);
            core.push_back({q, r.kind});
            q = r.point;
            if (r.kind == StepKind::Transversal) {
                seen_transversal = true;
                break;
            }
        }
        if (!seen_transversal)
            throw NumericError("realize_child_partition: chain never returned through q2");
        // Post-return tail while it contracts toward the saddle.
        Vec2 tail = q;
        for (int k = 0; k < 12; ++k) {
            core.push_back({tail, StepKind::Linear});
            tail = model.apply_linear(p, tail, 1);
        }
    }
    const Vec2 m1 = core.front().pt;

    // Transversal chain: q2 plus its contracting forward tail.
    const double q2c = model.transversal_window_center();
    std::vector<Vec2> h_core;
    {
        Vec2 q{0.0, q2c};
        h_core.push_back(q);
        Vec2 w = model.apply_transversal(p, q);
        for (int k = 0; k < 12; ++k) {
            h_core.push_back(w);
            w = model.apply_linear(p, w, 1);
        }
    }

    // Choose the saddle-box half-size: clearly below every chain point, with
    // the climb prefixes of both loops aligned to a common length.
    double d_min = std::numeric_limits<double>::infinity();
    const Vec2 saddle{0.0, 0.0};
    const int slot = tr.climb;
    const int core_pieces = 3 + tr.theta_n + n + slot + 1;  // through the h-window point
    for (int i = 0; i < core_pieces; ++i) d_min = std::min(d_min, cheby(core[i].pt, saddle));
    d_min = std::min(d_min, cheby(h_core[0], saddle));
    const Vec2 z_child = core[static_cast<std::size_t>(core_pieces)].pt;
    const double mu = model.mu(p);

    auto prefix_count = [&](double height, double q_half) {
        return static_cast<int>(std::floor(std::log(height / q_half) / std::log(mu)));
    };
    auto suffix_count = [&](const Vec2& start, double q_half) {
        Vec2 w = start;
        int k = 0;
        while (cheby(w, saddle) > q_half) {
            w = model.apply_linear(p, w, 1);
            if (++k > 200)
                throw NumericError("realize_child_partition: tail never enters the saddle box");
        }
        return k;
    };

    double q_half = 0.0;
    int l_low = 0, l_up = 0;
    bool aligned = false;
    for (int f = 0; f < 8 && !aligned; ++f) {
        const double cand = (d_min / 3.0) * std::pow(mu, -f / 8.0);
        const int plc = prefix_count(m1.y, cand);
        const int plh = prefix_count(q2c, cand);
        const int slc = suffix_count(z_child, cand);
        const int slh = suffix_count(h_core[1], cand);
        if (plc == plh && slc == slh) {
            q_half = cand;
            l_low = plc;
            l_up = slc;
            aligned = true;
        }
    }
    if (!aligned)
        throw NumericError("realize_child_partition: could not align loop prefixes");

    out.winding.l_low = l_low;
    out.winding.theta_n = tr.theta_n;
    out.winding.n = n;
    out.winding.slot = slot;
    out.winding.l_up = l_up;
    out.winding.n0_type = tr.n0;
    out.q_half = q_half;
    out.child_critical_value = z_child;

    // Assemble the chains as ordered orbit points.
    std::vector<Vec2> c_chain;
    for (int k = l_low; k >= 1; --k)
        c_chain.push_back(model.apply_linear(p, m1, -k));
    for (int i = 0; i < core_pieces; ++i) c_chain.push_back(core[i].pt);
    for (int k = 0; k < l_up; ++k)
        c_chain.push_back(core[static_cast<std::size_t>(core_pieces + k)].pt);

    std::vector<Vec2> h_chain;
    for (int k = l_low; k >= 1; --k)
        h_chain.push_back(model.apply_linear(p, h_core[0], -k));
    h_chain.push_back(h_core[0]);
    for (int k = 1; k <= l_up; ++k) h_chain.push_back(h_core[static_cast<std::size_t>(k)]);

    const int big_n = static_cast<int>(c_chain.size());
    const int big_m = static_cast<int>(h_chain.size());
    PartitionRealization part;
    part.graph = build_graph(big_n, big_m);

    std::vector<Vec2> all = c_chain;
    all.insert(all.end(), h_chain.begin(), h_chain.end());
    auto radius_for = [&](std::size_t i) {
        double r = std::min(mesh_cap / 2.0, 0.9 * (cheby(all[i], saddle) - q_half) / 2.0);
        for (std::size_t j = 0; j < all.size(); ++j)
            if (j != i) r = std::min(r, cheby(all[i], all[j]) / 4.0);
        if (!(r > 0.0))
            throw NumericError("realize_child_partition: chain points collide");
        return r;
    };

    part.pieces.resize(static_cast<std::size_t>(part.graph.vertex_count()));
    part.pieces[0] = {Box::around(saddle, q_half, q_half), saddle, part.graph.q()};
    for (int i = 0; i < big_n; ++i) {
        const std::size_t gi = static_cast<std::size_t>(i);
        const double r = radius_for(gi);
        part.pieces[static_cast<std::size_t>(part.graph.c(i))] = {
            Box::around(c_chain[gi], r, r), c_chain[gi], part.graph.c(i)};
    }
    for (int j = 0; j < big_m; ++j) {
        const std::size_t gj = static_cast<std::size_t>(big_n + j);
        const double r = radius_for(gj);
        part.pieces[static_cast<std::size_t>(part.graph.h(j))] = {
            Box::around(h_chain[static_cast<std::size_t>(j)], r, r), h_chain[static_cast<std::size_t>(j)],
            part.graph.h(j)};
    }
    part.check_disjoint();
    out.partition = std::move(part);

    const SymbolicGraph base = build_graph(1, 1);
    out.morphism = morphism_from_winding(l_low, tr.theta_n, n, slot, l_up, base);
    if (out.morphism.source.N != big_n || out.morphism.source.M != big_m)
        throw PropertyError("realize_child_partition: realized chain and winding disagree");
    return out;
}

namespace {

int base_vertex_of(const UnfoldingModel& model, const SymbolicGraph& base, const Vec2& q) {
    if (model.in_gluing_window(q)) return base.c(0);
    if (model.in_transversal_window(q)) return base.h(0);
    return base.q();
}

} // namespace

ConjugacyReport verify_conjugacy(const UnfoldingModel& model, const ThetaSelection& theta,
                                 const PartitionRealization& base,
                                 const ChildPartition& child, const Params& p) {
    (void)theta;
    ConjugacyReport rep;
    SymbolicTower tower;
    tower.graphs = {base.graph, child.partition.graph};
    tower.morphisms = {child.morphism};
    tower.validate();

    auto fail = [&](const std::string& msg) {
        rep.failures.push_back(msg);
    };

    // pi o i = w o pi on every child piece.
    for (const PartitionPiece& piece : child.partition.pieces) {
        ++rep.pieces_checked;
        const int base_piece = base.piece_containing(piece.rep);
        if (base_piece < 0) {
            rep.projection_ok = false;
            fail("child piece " + child.partition.graph.vertex_name(piece.vertex) +
                 " not contained in any base piece");
            continue;
        }
        const int mapped = child.morphism.apply(piece.vertex);
        if (mapped != base.pieces[static_cast<std::size_t>(base_piece)].vertex) {
            rep.projection_ok = false;
            fail("projection mismatch at child piece " +
                 child.partition.graph.vertex_name(piece.vertex));
        }
    }

    // h o f = phi o h at depth 2 on child representatives.
    for (const PartitionPiece& piece : child.partition.pieces) {
        LimitPoint sym;
        sym.entries = {child.morphism.apply(piece.vertex), piece.vertex};
        const LimitPoint shifted = shift_map(sym, tower);
        const Vec2 image = model.step(p, piece.rep).point;
        const int child_piece = child.partition.piece_containing(image);
        LimitPoint expect;
        if (child_piece >= 0) {
            expect.entries = {child.morphism.apply(child_piece), child_piece};
        } else {
            expect.entries = {base_vertex_of(model, base.graph, image),
                              child.partition.graph.q()};
        }
        if (!(shifted == expect)) {
            rep.diagram_ok = false;
            fail("diagram mismatch at child piece " +
                 child.partition.graph.vertex_name(piece.vertex));
        }
    }

    // Depth-1 diagram on the base pieces.
    SymbolicTower base_tower;
    base_tower.graphs = {base.graph};
    for (const PartitionPiece& piece : base.pieces) {
        ++rep.pieces_checked;
        LimitPoint sym;
        sym.entries = {piece.vertex};
        const LimitPoint shifted = shift_map(sym, base_tower);
        const Vec2 image = model.step(p, piece.rep).point;
        LimitPoint expect;
        expect.entries = {base_vertex_of(model, base.graph, image)};
        const int target = base.piece_containing(image);
        if (target >= 0) expect.entries = {base.pieces[static_cast<std::size_t>(target)].vertex};
        if (!(shifted == expect)) {
            rep.diagram_ok = false;
            fail("diagram mismatch at base piece " + base.graph.vertex_name(piece.vertex));
        }
    }
    return rep;
}

bool check_renormalizable(const UnfoldingModel& model, const ThetaSelection& theta,
                          const Params& p, int n, int slot) {
    LoopTrace tr;
    try {
        tr = trace_loop(model, theta, p, n, 10.0, true, /*integer*/ true);
    } catch (const NumericError&) {
        return false;
    }
    Vec2 m7 = tr.z3;
    for (int k = 0; k < slot; ++k) {
        m7 = model.apply_linear(p, m7, 1);
        if (!model.q_domain().contains(m7)) return false;
    }
    return model.in_transversal_window(m7);
}

} // namespace unfold
