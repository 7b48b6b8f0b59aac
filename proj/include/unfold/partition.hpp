#pragma once

#include <optional>
#include <vector>

#include "unfold/symbolic.hpp"
#include "unfold/tangency.hpp"

namespace unfold {

struct PartitionPiece {
    Box box;
    Vec2 rep;       // the orbit point the piece is built around
    int vertex{0};  // vertex of the generation's graph
};

struct PartitionRealization {
    SymbolicGraph graph;
    std::vector<PartitionPiece> pieces;  // indexed by graph vertex

    double mesh() const;
    // Index of the piece containing the point, or -1.
    int piece_containing(const Vec2& q) const;
    void check_disjoint() const;
};

// The base partition: the saddle box, the critical-window box and the
// transversal-window box. Requires composite returns (N = M = 1).
PartitionRealization realize_base_partition(const UnfoldingModel& model,
                                            const Params& p);

struct ChildPartition {
    PartitionRealization partition;
    RenormalizedModel::Winding winding;  // realized counts incl. prefixes
    GraphMorphism morphism;              // child graph -> base graph
    Vec2 child_critical_value;
    double q_half{0.0};
};

// Realizes the second-generation partition at a parameter on a continued
// tangency curve: adaptive boxes around the secondary loop orbit.
ChildPartition realize_child_partition(const UnfoldingModel& model,
                                       const ThetaSelection& theta, const Params& p,
                                       int n, double mesh_cap = 1e9);

struct ConjugacyReport {
    bool projection_ok{true};     // pi o i = w o pi on every child piece
    bool diagram_ok{true};        // h o f = phi o h on every representative
    int pieces_checked{0};
    std::vector<std::string> failures;
};

// Verifies the commuting diagrams on all realized pieces at generations <= 2.
ConjugacyReport verify_conjugacy(const UnfoldingModel& model, const ThetaSelection& theta,
                                 const PartitionRealization& base,
                                 const ChildPartition& child, const Params& p);

// True iff the continued secondary-loop waypoint lands in the transversal
// piece H(0); false off the renormalization locus.
bool check_renormalizable(const UnfoldingModel& model, const ThetaSelection& theta,
                          const Params& p, int n, int slot);

} // namespace unfold
