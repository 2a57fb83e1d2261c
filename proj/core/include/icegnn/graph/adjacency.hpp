#pragma once

#include "icegnn/autodiff/tensor.hpp"
#include "icegnn/graph/geo.hpp"

#include <span>
#include <vector>

namespace icegnn::graph {

using ad::Index;
using ad::Matrix;

inline constexpr double kSelfLoopWeight = 2.0;
inline constexpr double kDefaultEpsilonOffset = 0.01;

/// Fully connected inverse-distance weights, A[i][j] = 1 / angle(i, j) off the
/// diagonal, zero on it. Symmetric by construction. Needs at least 2 points.
Matrix build_raw_adjacency(std::span<const GeoPoint> points, HaversineMode mode);

/// Smallest and largest off-diagonal entries of a raw adjacency.
struct OffDiagonalRange {
    double min = 0.0;
    double max = 0.0;
};
OffDiagonalRange off_diagonal_range(const Matrix& raw);

/// Normalized adjacency: symmetric, diagonal exactly kSelfLoopWeight,
/// off-diagonal strictly inside (0, 1).
class WeightedAdjacency {
public:
    WeightedAdjacency() = default;
    /// Takes ownership after checking the invariants; throws InvalidArgument
    /// on violation.
    explicit WeightedAdjacency(Matrix weights);

    Index size() const noexcept { return weights_.rows(); }
    const Matrix& weights() const noexcept { return weights_; }

private:
    Matrix weights_;
};

/// Offset min-max map of the off-diagonal entries into [eps, 1 - eps] using a
/// dataset-wide raw range, then self-loops of weight 2. Entries outside the
/// range (unseen test graphs, coincident points) are clamped to the
/// endpoints. A degenerate range (max == min) maps everything to 0.5.
WeightedAdjacency normalize_adjacency(const Matrix& raw, double raw_min, double raw_max,
                                      double epsilon_offset = kDefaultEpsilonOffset);

/// D^{-1/2} A D^{-1/2} with D the row sums of A.
Matrix symmetric_normalize(const WeightedAdjacency& adjacency);
Matrix symmetric_normalize(const Matrix& weights);

/// Propagation matrices for a K-hop filter: T_1 = P, T_2 = 2 P^2 - I,
/// T_k = 2 P T_{k-1} - T_{k-2}. order == 1 yields just {P}.
std::vector<Matrix> chebyshev_basis(const Matrix& propagation, int order);

} // namespace icegnn::graph
