#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unfold/errors.hpp"

namespace unfold {

// Vertices of the (1,N,M) directed graph: index 0 is q, then c^0..c^{N-1},
// then h^0..h^{M-1}.
struct SymbolicGraph {
    int N{1};
    int M{1};

    int vertex_count() const { return 1 + N + M; }
    int q() const { return 0; }
    int c(int i) const { return 1 + i; }
    int h(int j) const { return 1 + N + j; }
    bool is_q(int v) const { return v == 0; }
    bool is_c(int v) const { return v >= 1 && v <= N; }
    bool is_h(int v) const { return v > N && v < vertex_count(); }

    // Unique successor along the loop structure; q has three successors and is
    // handled by the shift separately.
    int loop_successor(int v) const;
    bool has_edge(int from, int to) const;
    int out_degree(int v) const;
    int in_degree(int v) const;
    std::string vertex_name(int v) const;
};

SymbolicGraph build_graph(int N, int M);

enum class Letter : std::uint8_t { Q, C, H };

// A word over {q, c, h}: the decomposition of a loop into prime loops.
struct Winding {
    std::vector<Letter> word;

    // Total target length with letter lengths |q| = 1, |c| = N, |h| = M.
    int target_length(const SymbolicGraph& target) const;
    std::string to_string() const;

    static Winding loop_word(int l_low, int theta_n, int n, int n0, int l_up);
};

// Graph morphism between a (1,Ntilde,Mtilde) source and a (1,N,M) target,
// determined by the windings of the source prime loops.
struct GraphMorphism {
    SymbolicGraph source;
    SymbolicGraph target;
    Winding c_winding;
    Winding h_winding;
    std::vector<int> vertex_map;  // source vertex -> target vertex

    int apply(int v) const { return vertex_map[static_cast<std::size_t>(v)]; }
    // The image vertex path of a source loop's non-q vertices.
    std::vector<int> image_path(const Winding& w) const;
};

GraphMorphism morphism_from_winding(int l_low, int theta_n, int n, int n0, int l_up,
                                    const SymbolicGraph& target);

// Composition w_outer(w_inner(x)): inner maps level g+1 to g, outer g to g-1.
GraphMorphism compose(const GraphMorphism& outer, const GraphMorphism& inner);

// Substitutes each letter of a winding by its image winding under the outer
// morphism; used as the brute-force oracle for composition.
Winding substitute(const GraphMorphism& outer, const Winding& w);

// A truncated inverse-limit point: entries[g] is a vertex of graphs[g], with
// morphisms[g] mapping level g+1 to level g.
struct LimitPoint {
    std::vector<int> entries;

    bool operator==(const LimitPoint& o) const { return entries == o.entries; }
};

struct SymbolicTower {
    std::vector<SymbolicGraph> graphs;
    std::vector<GraphMorphism> morphisms;  // morphisms[g]: graphs[g+1] -> graphs[g]

    void validate() const;
    bool compatible(const LimitPoint& p) const;
    std::vector<LimitPoint> enumerate_points() const;
};

// The shift homeomorphism on truncated points: every entry follows its unique
// outgoing edge; entries below the first non-q level are forced by
// compatibility with the deeper successor.
LimitPoint shift_map(const LimitPoint& p, const SymbolicTower& tower);

enum class OmegaClass { FixedPoint, OrbitO2, DenseInA, Undetermined };

struct OmegaReport {
    OmegaClass cls{OmegaClass::Undetermined};
    int depth_checked{0};
};

OmegaReport classify_omega(const LimitPoint& p, const SymbolicTower& tower);

// The two constructive points: one whose forward path projects over the full
// c-loop at every level, one whose projections are pure q/h concatenations.
LimitPoint dense_point(const SymbolicTower& tower);
LimitPoint o2_point(const SymbolicTower& tower);
LimitPoint fixed_point(const SymbolicTower& tower);

std::string tower_to_json(const SymbolicTower& tower);

} // namespace unfold
