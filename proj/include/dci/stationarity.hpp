#pragma once

#include <dci/convint.hpp>
#include <dci/extension.hpp>
#include <dci/inclusion.hpp>

namespace dci {

/// Graph of a piecewise-affine map weighted by a positive per-cell
/// multiplicity (integral currents carry integers).
struct GraphCurrent {
    const PiecewiseAffineMap* map = nullptr;
    std::vector<double> beta; // per cell

    static GraphCurrent with_nearest_multiplicity(const PiecewiseAffineMap& map,
                                                  const std::vector<FMat>& targets,
                                                  const std::vector<double>& beta_of_target);
};

/// Weighted integrand energy of the graph: per-cell
/// f(Du) * beta * area, cross-checked against the 2-vector route
/// Psi(W(Du)) * beta * area.
struct EnergyResult {
    double direct = 0;
    double psi_route = 0;
    double mass = 0; // weighted graph area
};
EnergyResult sigma_energy(const GraphCurrent& t, const IntegrandOracle& f,
                          const PsiIntegrand* psi = nullptr);

/// Compactly-supported tensor-product quadratic bumps on a coarse grid.
struct TestBasis {
    int grid = 4;
    double spacing() const { return 1.0 / (grid + 2); }
    std::size_t size() const { return static_cast<std::size_t>(grid) * grid; }
    // bump value and gradient for bump index (bx, by)
    double value(int bx, int by, const Point2& p) const;
    Point2 gradient(int bx, int by, const Point2& p) const;
};

/// Weak residuals of the two stationarity equations over the basis:
/// outer  int <Df(Du), Dv> beta dx,
/// inner  int [<Df(Du), Du Dphi> - f(Du) div phi] beta dx,
/// with exact per-cell integration (cells clipped to the polynomial
/// patches of the bumps, then a degree-4 triangle rule).
struct ResidualReport {
    std::size_t basis_size = 0;
    double outer_max = 0, outer_rms = 0;
    double inner_max = 0, inner_rms = 0;
};
ResidualReport weak_residual(const GraphCurrent& t, const IntegrandOracle& f,
                             const TestBasis& basis);

/// First variation along a compactly supported field of R^4, evaluated by
/// the wedge-expansion formula and cross-checked by a central difference
/// of the pushed-forward energy under the flow.
struct VariationResult {
    double formula = 0;
    double finite_difference = 0;
    double step = 0;
};
using VectorField4 = std::function<std::vector<double>(const std::vector<double>&)>; // R^4 -> R^4
using VectorField4Jac = std::function<FMat(const std::vector<double>&)>;              // 4x4

VariationResult first_variation(const GraphCurrent& t, const PsiIntegrand& psi,
                                const VectorField4& g, const VectorField4Jac& dg, double h_step,
                                int subdivision = 8, int quad_order = 4);

} // namespace dci
