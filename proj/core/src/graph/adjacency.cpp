#include "icegnn/graph/adjacency.hpp"

#include "icegnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace icegnn::graph {

Matrix build_raw_adjacency(std::span<const GeoPoint> points, HaversineMode mode) {
    const auto n = static_cast<Index>(points.size());
    if (n < 2) throw InvalidArgument("adjacency needs at least 2 points");
    for (const auto& p : points) validate(p);

    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double w = 1.0 / haversine_angle(points[static_cast<std::size_t>(i)],
                                                   points[static_cast<std::size_t>(j)], mode);
            a(i, j) = w;
            a(j, i) = w;
        }
    }
    return a;
}

OffDiagonalRange off_diagonal_range(const Matrix& raw) {
    OffDiagonalRange r{std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity()};
    for (Index i = 0; i < raw.rows(); ++i) {
        for (Index j = 0; j < raw.cols(); ++j) {
            if (i == j) continue;
            r.min = std::min(r.min, raw(i, j));
            r.max = std::max(r.max, raw(i, j));
        }
    }
    return r;
}

WeightedAdjacency::WeightedAdjacency(Matrix weights) : weights_(std::move(weights)) {
    const Index n = weights_.rows();
    if (weights_.cols() != n) throw InvalidArgument("adjacency must be square");
    for (Index i = 0; i < n; ++i) {
        if (weights_(i, i) != kSelfLoopWeight)
            throw InvalidArgument("adjacency diagonal entry " + std::to_string(i) + " is not 2");
        for (Index j = i + 1; j < n; ++j) {
            const double w = weights_(i, j);
            if (w != weights_(j, i))
                throw InvalidArgument("adjacency is not symmetric at (" + std::to_string(i) +
                                      ", " + std::to_string(j) + ")");
            if (!(w > 0.0 && w < 1.0))
                throw InvalidArgument("adjacency weight outside (0, 1) at (" + std::to_string(i) +
                                      ", " + std::to_string(j) + ")");
        }
    }
}

WeightedAdjacency normalize_adjacency(const Matrix& raw, double raw_min, double raw_max,
                                      double epsilon_offset) {
    if (raw.rows() != raw.cols()) throw DimensionError("raw adjacency must be square");
    if (!(epsilon_offset > 0.0 && epsilon_offset < 0.5))
        throw InvalidArgument("epsilon offset must lie in (0, 0.5)");
    if (raw_min > raw_max) throw InvalidArgument("adjacency raw min exceeds raw max");

    const Index n = raw.rows();
    const double lo = epsilon_offset;
    const double hi = 1.0 - epsilon_offset;
    const double range = raw_max - raw_min;

    Matrix w(n, n);
    for (Index i = 0; i < n; ++i) {
        w(i, i) = kSelfLoopWeight;
        for (Index j = i + 1; j < n; ++j) {
            double v = 0.5;
            if (range > 0.0) {
                v = lo + (hi - lo) * (raw(i, j) - raw_min) / range;
                v = std::clamp(v, lo, hi);
            }
            w(i, j) = v;
            w(j, i) = v;
        }
    }
    return WeightedAdjacency(std::move(w));
}

Matrix symmetric_normalize(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("symmetric_normalize needs a square matrix");
    const Index n = a.rows();

    // Row sums over sorted entries, so relabeling nodes cannot change a degree
    // by a rounding step.
    std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = a(i, j);
        std::sort(row.begin(), row.end());
        double degree = 0.0;
        for (double v : row) degree += v;
        if (!(degree > 0.0))
            throw InvalidArgument("symmetric_normalize: non-positive row sum at node " +
                                  std::to_string(i));
        inv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(degree);
    }

    Matrix out(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            out(i, j) = a(i, j) * (inv_sqrt[static_cast<std::size_t>(i)] *
                                   inv_sqrt[static_cast<std::size_t>(j)]);
    return out;
}

Matrix symmetric_normalize(const WeightedAdjacency& adjacency) {
    return symmetric_normalize(adjacency.weights());
}

std::vector<Matrix> chebyshev_basis(const Matrix& propagation, int order) {
    if (order < 1) throw InvalidArgument("chebyshev order must be >= 1");
    std::vector<Matrix> basis;
    basis.reserve(static_cast<std::size_t>(order));
    basis.push_back(propagation);
    if (order >= 2) {
        const Matrix identity = Matrix::Identity(propagation.rows(), propagation.cols());
        Matrix prev = identity;
        for (int k = 2; k <= order; ++k) {
            Matrix next = 2.0 * propagation * basis.back() - prev;
            prev = basis.back();
            basis.push_back(std::move(next));
        }
    }
    return basis;
}

} // namespace icegnn::graph
