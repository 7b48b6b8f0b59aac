#include "unfold/symbolic.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace unfold {

int SymbolicGraph::loop_successor(int v) const {
    if (is_q(v)) throw ValidationError("loop_successor: q has three outgoing edges");
    if (is_c(v)) return v == c(N - 1) ? q() : v + 1;
    return v == h(M - 1) ? q() : v + 1;
}

bool SymbolicGraph::has_edge(int from, int to) const {
    if (is_q(from)) return is_q(to) || to == c(0) || to == h(0);
    return loop_successor(from) == to;
}

int SymbolicGraph::out_degree(int v) const { return is_q(v) ? 3 : 1; }

int SymbolicGraph::in_degree(int v) const {
    if (is_q(v)) return 3;  // from q, c^{N-1}, h^{M-1}
    if (v == c(0) || v == h(0)) return 1;
    return 1;
}

std::string SymbolicGraph::vertex_name(int v) const {
    if (is_q(v)) return "q";
    std::ostringstream os;
    if (is_c(v))
        os << "c" << (v - 1);
    else
        os << "h" << (v - 1 - N);
    return os.str();
}

SymbolicGraph build_graph(int N, int M) {
    if (N < 1 || M < 1) throw ValidationError("build_graph: loop lengths must be >= 1");
    return SymbolicGraph{N, M};
}

int Winding::target_length(const SymbolicGraph& target) const {
    if (word.empty()) throw ValidationError("winding: empty word");
    int len = 0;
    for (Letter l : word) {
        switch (l) {
            case Letter::Q: len += 1; break;
            case Letter::C: len += target.N; break;
            case Letter::H: len += target.M; break;
        }
    }
    return len;
}

std::string Winding::to_string() const {
    std::string s;
    for (Letter l : word)
        s += (l == Letter::Q ? 'q' : (l == Letter::C ? 'c' : 'h'));
    return s;
}

Winding Winding::loop_word(int l_low, int theta_n, int n, int n0, int l_up) {
    if (l_low < 0 || theta_n < 0 || n < 0 || n0 < 0 || l_up < 0)
        throw ValidationError("winding: counts must be >= 0");
    Winding w;
    auto rep = [&](int k, Letter l) {
        for (int i = 0; i < k; ++i) w.word.push_back(l);
    };
    rep(l_low, Letter::Q);
    w.word.push_back(Letter::C);
    rep(theta_n, Letter::Q);
    w.word.push_back(Letter::C);
    rep(n, Letter::Q);
    w.word.push_back(Letter::C);
    rep(n0, Letter::Q);
    w.word.push_back(Letter::H);
    rep(l_up, Letter::Q);
    return w;
}

std::vector<int> GraphMorphism::image_path(const Winding& w) const {
    std::vector<int> path;
    for (Letter l : w.word) {
        switch (l) {
            case Letter::Q: path.push_back(target.q()); break;
            case Letter::C:
                for (int i = 0; i < target.N; ++i) path.push_back(target.c(i));
                break;
            case Letter::H:
                for (int j = 0; j < target.M; ++j) path.push_back(target.h(j));
                break;
        }
    }
    return path;
}

namespace {

void validate_morphism(const GraphMorphism& m) {
    const SymbolicGraph& src = m.source;
    const SymbolicGraph& tgt = m.target;
    if (m.apply(src.q()) != tgt.q())
        throw ValidationError("morphism: q must map to q");
    auto check_loop = [&](int first, int count) {
        // Edge q~ -> first piece.
        int prev = tgt.q();
        for (int i = 0; i < count; ++i) {
            const int v = m.apply(first + i);
            if (!tgt.has_edge(prev, v))
                throw ValidationError("morphism: inconsistent counts (image path breaks)");
            prev = v;
        }
        if (!tgt.has_edge(prev, tgt.q()))
            throw ValidationError("morphism: inconsistent counts (loop does not close)");
    };
    check_loop(src.c(0), src.N);
    check_loop(src.h(0), src.M);
}

} // namespace

GraphMorphism morphism_from_winding(int l_low, int theta_n, int n, int n0, int l_up,
                                    const SymbolicGraph& target) {
    GraphMorphism m;
    m.target = target;
    m.c_winding = Winding::loop_word(l_low, theta_n, n, n0, l_up);
    m.h_winding.word.clear();
    for (int i = 0; i < l_low; ++i) m.h_winding.word.push_back(Letter::Q);
    m.h_winding.word.push_back(Letter::H);
    for (int i = 0; i < l_up; ++i) m.h_winding.word.push_back(Letter::Q);

    const int src_n = m.c_winding.target_length(target);
    const int src_m = m.h_winding.target_length(target);
    m.source = build_graph(src_n, src_m);

    m.vertex_map.assign(static_cast<std::size_t>(m.source.vertex_count()), 0);
    m.vertex_map[0] = target.q();
    const std::vector<int> cpath = m.image_path(m.c_winding);
    const std::vector<int> hpath = m.image_path(m.h_winding);
    for (int i = 0; i < src_n; ++i)
        m.vertex_map[static_cast<std::size_t>(m.source.c(i))] = cpath[static_cast<std::size_t>(i)];
    for (int j = 0; j < src_m; ++j)
        m.vertex_map[static_cast<std::size_t>(m.source.h(j))] = hpath[static_cast<std::size_t>(j)];
    validate_morphism(m);
    return m;
}

Winding substitute(const GraphMorphism& outer, const Winding& w) {
    Winding out;
    for (Letter l : w.word) {
        switch (l) {
            case Letter::Q: out.word.push_back(Letter::Q); break;
            case Letter::C:
                out.word.insert(out.word.end(), outer.c_winding.word.begin(),
                                outer.c_winding.word.end());
                break;
            case Letter::H:
                out.word.insert(out.word.end(), outer.h_winding.word.begin(),
                                outer.h_winding.word.end());
                break;
        }
    }
    return out;
}

GraphMorphism compose(const GraphMorphism& outer, const GraphMorphism& inner) {
    if (outer.source.N != inner.target.N || outer.source.M != inner.target.M)
        throw ValidationError("compose: intermediate graphs do not match");
    GraphMorphism m;
    m.source = inner.source;
    m.target = outer.target;
    m.c_winding = substitute(outer, inner.c_winding);
    m.h_winding = substitute(outer, inner.h_winding);
    m.vertex_map.assign(static_cast<std::size_t>(m.source.vertex_count()), 0);
    for (int v = 0; v < m.source.vertex_count(); ++v)
        m.vertex_map[static_cast<std::size_t>(v)] = outer.apply(inner.apply(v));
    validate_morphism(m);
    return m;
}

void SymbolicTower::validate() const {
    if (graphs.empty()) throw ValidationError("tower: no graphs");
    if (morphisms.size() + 1 != graphs.size())
        throw ValidationError("tower: need one morphism per adjacent level pair");
    for (std::size_t g = 0; g < morphisms.size(); ++g) {
        if (morphisms[g].target.N != graphs[g].N || morphisms[g].target.M != graphs[g].M ||
            morphisms[g].source.N != graphs[g + 1].N ||
            morphisms[g].source.M != graphs[g + 1].M)
            throw ValidationError("tower: morphism levels inconsistent");
    }
}

bool SymbolicTower::compatible(const LimitPoint& p) const {
    if (p.entries.size() != graphs.size()) return false;
    for (std::size_t g = 0; g + 1 < graphs.size(); ++g)
        if (morphisms[g].apply(p.entries[g + 1]) != p.entries[g]) return false;
    return true;
}

std::vector<LimitPoint> SymbolicTower::enumerate_points() const {
    std::vector<LimitPoint> points;
    std::vector<int> stack;
    std::function<void(std::size_t)> rec = [&](std::size_t g) {
        if (g == graphs.size()) {
            points.push_back(LimitPoint{stack});
            return;
        }
        for (int v = 0; v < graphs[g].vertex_count(); ++v) {
            if (g > 0 && morphisms[g - 1].apply(v) != stack.back()) continue;
            stack.push_back(v);
            rec(g + 1);
            stack.pop_back();
        }
    };
    rec(0);
    return points;
}

LimitPoint shift_map(const LimitPoint& p, const SymbolicTower& tower) {
    if (!tower.compatible(p)) throw ValidationError("shift_map: incompatible point");
    const std::size_t depth = p.entries.size();
    LimitPoint out;
    out.entries.assign(depth, 0);
    std::size_t g0 = depth;
    for (std::size_t g = 0; g < depth; ++g) {
        if (!tower.graphs[g].is_q(p.entries[g])) {
            g0 = g;
            break;
        }
    }
    if (g0 == depth) {  // the fixed point q-bar
        for (std::size_t g = 0; g < depth; ++g) out.entries[g] = tower.graphs[g].q();
        return out;
    }
    for (std::size_t g = g0; g < depth; ++g)
        out.entries[g] = tower.graphs[g].loop_successor(p.entries[g]);
    for (std::size_t g = g0; g-- > 0;)
        out.entries[g] = tower.morphisms[g].apply(out.entries[g + 1]);
    return out;
}

namespace {

// Forward vertex path from v to the next visit of q (inclusive of q).
std::vector<int> path_to_q(const SymbolicGraph& g, int v) {
    std::vector<int> path{v};
    while (!g.is_q(path.back())) path.push_back(g.loop_successor(path.back()));
    return path;
}

// Does the projected path re-enter the c-loop of the lower level?
bool projection_enters_c_loop(const SymbolicTower& tower, std::size_t g, int v) {
    const std::vector<int> path = path_to_q(tower.graphs[g], v);
    const SymbolicGraph& low = tower.graphs[g - 1];
    int prev = -1;
    for (int x : path) {
        const int px = tower.morphisms[g - 1].apply(x);
        if (prev == low.q() && px == low.c(0)) return true;
        prev = px;
    }
    return false;
}

} // namespace

OmegaReport classify_omega(const LimitPoint& p, const SymbolicTower& tower) {
    OmegaReport rep;
    rep.depth_checked = static_cast<int>(p.entries.size());
    bool all_q = true;
    for (std::size_t g = 0; g < p.entries.size(); ++g)
        if (!tower.graphs[g].is_q(p.entries[g])) all_q = false;
    if (all_q) {
        rep.cls = OmegaClass::FixedPoint;
        return rep;
    }
    std::vector<bool> enters;
    for (std::size_t g = 1; g < p.entries.size(); ++g) {
        if (tower.graphs[g].is_q(p.entries[g])) continue;
        enters.push_back(projection_enters_c_loop(tower, g, p.entries[g]));
    }
    if (enters.empty()) {
        rep.cls = OmegaClass::Undetermined;
        return rep;
    }
    if (std::all_of(enters.begin(), enters.end(), [](bool b) { return b; })) {
        rep.cls = OmegaClass::DenseInA;
        return rep;
    }
    // A (possibly empty) prefix of entries followed by none: the orbit settles
    // into pure q/h behavior beyond some generation.
    const auto first_false = std::find(enters.begin(), enters.end(), false);
    if (std::none_of(first_false, enters.end(), [](bool b) { return b; })) {
        rep.cls = OmegaClass::OrbitO2;
        return rep;
    }
    rep.cls = OmegaClass::Undetermined;
    return rep;
}

LimitPoint dense_point(const SymbolicTower& tower) {
    LimitPoint p;
    p.entries.push_back(tower.graphs[0].c(0));
    for (std::size_t g = 1; g < tower.graphs.size(); ++g) {
        const SymbolicGraph& gr = tower.graphs[g];
        int found = -1;
        for (int i = 0; i < gr.N; ++i) {
            if (tower.morphisms[g - 1].apply(gr.c(i)) == p.entries[g - 1]) {
                found = gr.c(i);
                break;
            }
        }
        if (found < 0) throw PropertyError("dense_point: no compatible c-loop vertex");
        p.entries.push_back(found);
    }
    return p;
}

LimitPoint o2_point(const SymbolicTower& tower) {
    LimitPoint p;
    p.entries.push_back(tower.graphs[0].c(0));
    for (std::size_t g = 1; g < tower.graphs.size(); ++g) {
        const SymbolicGraph& gr = tower.graphs[g];
        // The compatible c-loop vertex whose remaining path projects to the
        // remaining path of the previous entry followed by pure q/h loops:
        // the matching offset inside the last c-letter block.
        int found = -1;
        for (int i = gr.N - 1; i >= 0; --i) {
            if (tower.morphisms[g - 1].apply(gr.c(i)) == p.entries[g - 1]) {
                found = gr.c(i);
                break;
            }
        }
        if (found < 0) throw PropertyError("o2_point: no compatible c-loop vertex");
        p.entries.push_back(found);
    }
    return p;
}

LimitPoint fixed_point(const SymbolicTower& tower) {
    LimitPoint p;
    for (const SymbolicGraph& g : tower.graphs) p.entries.push_back(g.q());
    return p;
}

std::string tower_to_json(const SymbolicTower& tower) {
    std::ostringstream os;
    os << "{\"levels\":[";
    for (std::size_t g = 0; g < tower.graphs.size(); ++g) {
        if (g) os << ",";
        os << "{\"N\":" << tower.graphs[g].N << ",\"M\":" << tower.graphs[g].M;
        if (g > 0) {
            os << ",\"c_winding\":\"" << tower.morphisms[g - 1].c_winding.to_string()
               << "\",\"h_winding\":\"" << tower.morphisms[g - 1].h_winding.to_string()
               << "\"";
        }
        os << "}";
    }
    os << "]}";
    return os.str();
}

} // namespace unfold
