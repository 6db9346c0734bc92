#pragma once

#include <dci/inclusion.hpp>

#include <array>

namespace dci {

/// The embedded sign-changing example: five stacked 6x2 rational points,
/// multiplicities, values, determinant coefficients, the affine lift
/// matrices, and the three orderings that make the X-block large.
struct CounterexampleData {
    std::vector<RMat> a;                    // five 6x2 blocks
    std::vector<RMat> x, y, z;              // 2x2 slices
    std::vector<Rational> beta, c, d;
    RMat lift_a, lift_b, lift_c, lift_d;    // Y = A X + B, Z = C X + D
    std::array<std::array<int, 5>, 3> orderings; // 1-based
};

CounterexampleData load_builtin();

struct ConditionsReport {
    bool cond1 = false; // all off-diagonal gaps strictly negative, exact
    bool cond2 = false; // three validated orderings with independent legs
    bool cond3 = false; // affine lift and the Z-consistency, exact
    bool lifted_t5 = false;
    RMat q;             // exact gap matrix (curl form)
    std::vector<DetectResult> witnesses;
    double min_leg_gram = 0; // smallest per-matrix leg Gram determinant
    std::vector<std::string> failures;
};

ConditionsReport verify_conditions(const CounterexampleData& data, std::uint64_t seed = 1);

/// One affine function on R^5 (coordinates: X column-major, then the
/// determinant slot).
struct AffinePiece {
    std::array<double, 5> w{};
    double b = 0;

    double at(const std::array<double, 5>& z) const {
        double s = b;
        for (int i = 0; i < 5; ++i) s += w[i] * z[i];
        return s;
    }
};

/// The constructed smooth polyconvex integrand
///   f(X) = eps * Area(X) + g(X, det X),
/// with g a mollified max of five affine pieces capped against the
/// area-shaped tail. Evaluation uses an exact affine path inside
/// certified balls, the closed tail form outside the certified radius,
/// and a fixed symmetric quadrature rule (a positive combination of
/// shifted maxima, hence convex by construction) in between.
class BuiltIntegrand {
public:
    double epsilon = 0, sigma = 0, delta = 0, moll_radius = 0;
    double big_r = 0, big_r2 = 0, m_tail = 0, l_tail = 0, eta = 0;
    double c_bound = 0;
    std::vector<AffinePiece> pieces;
    std::vector<std::array<double, 5>> anchors;
    std::string variant_d;       // coefficient choice certified by the identity
    double variant_defect_adopted = 0, variant_defect_rejected = 0;
    std::vector<std::array<double, 5>> nodes; // antithetic mollification nodes

    static std::array<double, 5> pack(const FMat& x, double d);

    struct Eval {
        double value = 0;
        std::array<double, 5> grad{}; // d/dz of the convex model h
        enum class Region { affine, tail, quadrature } region = Region::quadrature;
        double error_bound = 0;
    };

    // convex model h(z) = eps a(z) + g(z) on R^5 and its pieces
    double g1(const std::array<double, 5>& z) const;
    double g2(const std::array<double, 5>& z) const;
    std::array<double, 5> g2_grad(const std::array<double, 5>& z) const;
    double tail_f(const std::array<double, 5>& z) const; // M a(z) - L
    double smooth_max(double a, double b) const;
    double smooth_max_da(double a, double b) const;
    double g(const std::array<double, 5>& z) const;
    Eval h_eval(const std::array<double, 5>& z) const;
    double h(const std::array<double, 5>& z) const { return h_eval(z).value; }

    // integrand on matrices
    double f(const FMat& x) const;
    FMat df(const FMat& x) const;
    Eval f_eval(const FMat& x) const;

    /// Certified radius around anchor j inside which g equals piece j.
    double certified_radius(std::size_t j) const;
    /// True when one piece dominates on the mollification ball at z.
    std::optional<std::size_t> single_piece(const std::array<double, 5>& z) const;

    IntegrandOracle oracle() const;
};

/// Runs the construction: picks the largest dyadic eps keeping every
/// perturbed gap strictly negative, builds the affine pieces, certifies
/// the piece-domination radius, and fixes the tail constants.
BuiltIntegrand build_integrand(const CounterexampleData& data,
                               std::optional<double> eps = std::nullopt,
                               std::size_t node_count = 1 << 14, std::uint64_t seed = 99);

} // namespace dci
