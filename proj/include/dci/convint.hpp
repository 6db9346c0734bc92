#pragma once

#include <dci/tn.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dci {

using Point2 = std::array<double, 2>;

/// One affine cell u(x) = G x + b on a triangle.
struct Cell {
    std::array<Point2, 3> v;
    FMat grad;          // 2x2
    Point2 offset{};
    enum class Tag { leaf, spiral, transition } tag = Tag::leaf;
    int target = -1;    // witness position for leaf/spiral cells

    double area() const;
    Point2 centroid() const;
};

/// Piecewise-affine map on the unit square with an affine boundary trace.
struct PiecewiseAffineMap {
    std::vector<Cell> cells;
    FMat boundary_grad;
    Point2 boundary_offset{};
    int depth = 0;
    double displacement_bound = 0; // sup |u - boundary affine|

    double total_area() const;
};

/// Build parameters: the ordered loop witness, the contraction schedule
/// rho_d = 1 - delta0 * shrink^(d-1), the per-split cone steepness and
/// budget guards.
struct StageParams {
    TnConfig<double> witness;     // ordered loop data (base, legs, factors)
    std::vector<FMat> targets;    // the matrices the witness points at
    double delta0 = 0.5;
    double shrink = 0.5;
    int laps = 2;                 // loop passes per build
    double kappa0 = 24.0;         // cone slope at contraction gap 1
    double area_floor = 1e-9;     // smallest cell the loop keeps splitting
    std::size_t max_cells = 100000;
    int grid = 4;                 // root subdivision (grid x grid squares)

    double rho(int depth) const { return 1.0 - delta0 * std::pow(shrink, depth - 1); }
};

/// Affine start accepted when the boundary gradient sits on the loop
/// structure (a target, the barycenter, or a point of the splitting
/// segment family).
struct InitialPlacement {
    enum class Kind { target, spiral, segment } kind = Kind::spiral;
    int index = 0;        // witness position
    double level = 0;     // position along the leg for segment starts
};

std::optional<InitialPlacement> classify_start(const FMat& a0, const StageParams& params,
                                               double tol = 1e-7);

PiecewiseAffineMap initial_map(const FMat& a0, const StageParams& params);

/// Advances the construction by `stages` contraction levels. Each level
/// re-realizes the loop at its own contraction: every leaf anchor sits
/// exactly on the contracted structure, so the leaf distance to the
/// targets scales with (1 - rho). The boundary trace never changes.
PiecewiseAffineMap refine(const PiecewiseAffineMap& map, const StageParams& params, int stages);

/// Area bookkeeping and distance metrics against the target set.
struct AnalyzeReport {
    std::vector<double> fractions;        // per-target area fractions (all cells)
    double fraction_sum = 0;
    double sup_all = 0;                   // max cell distance to the targets
    double sup_leaf = 0;                  // over leaf cells only
    double l1_all = 0;                    // area-weighted mean distance
    double leaf_mass = 0, spiral_mass = 0, transition_mass = 0;
    int dyadic_depth = 0;
    std::vector<int> distinct_targets_per_square; // row-major 2^d x 2^d
    int min_distinct_targets = 0;
    double max_edge_value_jump = 0;       // continuity defect, gradient-scaled
    double max_tangential_jump = 0;       // tangential-derivative defect, scaled
    double lift_sup = 0;                  // stacked distance, when lift given
    double boundary_defect = 0;           // trace vs the affine datum
};

AnalyzeReport analyze(const PiecewiseAffineMap& map, const std::vector<FMat>& targets,
                      int dyadic_depth,
                      const std::optional<std::array<FMat, 4>>& lift = std::nullopt,
                      const std::vector<FMat>* lifted_targets = nullptr);

} // namespace dci
