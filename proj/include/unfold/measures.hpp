#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "unfold/numerics.hpp"
#include "unfold/symbolic.hpp"

namespace unfold {

// A measure in the three-dimensional invariant span, either in the standard
// basis (delta^q, delta^c, delta^h) or in the simplex vertex basis
// (delta-bar^c, delta-bar^h, delta-bar^q).
struct MeasureVec {
    double x{0.0};  // delta-bar^c coordinate (vertex basis) or delta^q (standard)
    double y{0.0};
    double z{0.0};
    bool vertex_basis{true};

    // Max-norm of the vertex coordinates.
    double norm() const;
    static MeasureVec vertex(double x, double y, double z);
};

// Mass assignments of the basis measures: the prime loops pass through q once
// and carry unit mass per remaining vertex.
struct MassFormulas {
    int N{1};
    int M{1};
    double mass_q(const MeasureVec& m) const;        // mu(lambda^q)
    double mass_c_minus_q(const MeasureVec& m) const; // mu(lambda^c \ lambda^q)
    double mass_h_minus_q(const MeasureVec& m) const;
};

// The 3x3 push-forward matrix of a generating winding in the standard basis.
struct TransferMatrix {
    std::array<std::array<std::int64_t, 3>, 3> m{};

    static TransferMatrix from_counts(int l_low, int theta_n, int n, int n0, int l_up);
};

TransferMatrix transfer_matrix(int l_low, int theta_n, int n, int n0, int l_up);

// Derives the matrix by counting projected vertices of an explicit morphism;
// the brute-force oracle for the closed form.
TransferMatrix transfer_matrix_by_counting(const GraphMorphism& w);

// Push a simplex measure through the matrix: standard-basis push, mass
// renormalization, conversion back to vertex coordinates on the target.
MeasureVec push_simplex(const MeasureVec& mu, const TransferMatrix& w,
                        std::pair<int, int> source_dims, std::pair<int, int> target_dims);

struct ContractionLevel {
    double worst_factor{0.0};
    double max_distance{0.0};
};

struct ContractionReport {
    std::vector<ContractionLevel> levels;
    bool all_contracting{true};
    bool distance_law_ok{true};  // |mu_g - delta-bar^q| <= 2^{-s}
};

struct ChainLevel {
    int N{0};
    int M{0};
    TransferMatrix w;  // pushes level g+1 to level g (absent at the last level)
};

// Builds a winding chain whose dimensions grow by the requested factor.
std::vector<ChainLevel> make_dims_chain(int levels, int n0_base, int m0_base,
                                        int growth_factor);

ContractionReport verify_contraction(const std::vector<ChainLevel>& chain, int trials,
                                     Rng& rng, double tol = 1e-12);

} // namespace unfold
