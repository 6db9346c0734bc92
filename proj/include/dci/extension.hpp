#pragma once

#include <dci/multivector.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dci {

using Vec = std::vector<double>;

/// A convex function on R^k with gradient access and a declared
/// area-shaped tail: h(z) = m_tail sqrt(1 + |z|^2) - l_tail once
/// |z| >= r_tail. The tail makes recession and extension closed-form.
struct ConvexModel {
    std::size_t dim = 0;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient; // empty -> finite differences
    std::optional<double> m_tail, l_tail, r_tail;

    double at(const Vec& z) const { return value(z); }
    Vec grad(const Vec& z) const;
    bool has_tail() const { return m_tail && l_tail && r_tail; }
};

/// Asymptotic slope function h*(z) = lim_{y->0+} y h(z/y); closed form
/// m_tail |z| with a declared tail, numeric shrinking-parameter limit with
/// a step-halving consistency check otherwise.
struct RecessionResult {
    double value = 0;
    bool closed_form = false;
    double limit_defect = 0; // difference of the last two numeric levels
};
RecessionResult recession(const ConvexModel& h, const Vec& z);

/// Positively 1-homogeneous convex extension of the perspective function
/// G(z, t) = t h(z/t) to all signs of t:
///   t > 0: t h(z/t);  t = 0: h*(z);  t < 0: h*(z) + lambda t,
/// with lambda = inf_z [h(z) - <Dh(z), z>] (= -l_tail for tail models).
struct ExtendedG {
    ConvexModel h;
    double lambda = 0;

    double at(const Vec& z, double t) const;
    Vec grad(const Vec& z, double t) const; // gradient in (z, t), size k+1
};

ExtendedG extend(const ConvexModel& h);

/// Lower bound on the extension by maximizing the supporting-plane form
/// <DG(x, y), (z, t)> over a log-radial grid with local refinement.
double extension_support_bound(const ConvexModel& h, const Vec& z, double t,
                               std::size_t budget = 10000, std::uint64_t seed = 4);

/// Sampled verdicts for the growth/boundedness properties and the
/// symmetric-extension inequality.
struct PropertyReport {
    bool p = false;             // convex + linear growth + bounded slope gap
    bool pe = false;            // additionally the two-point inequality
    double growth_a = 0, growth_b = 0;
    double slope_gap_inf = 0;   // inf h - <Dh, z> over samples
    std::string counterexample; // set when a check fails
};
PropertyReport check_properties(const ConvexModel& h, std::size_t samples = 2000,
                                std::uint64_t seed = 7);

/// Even extension |t| h(z/t) (with h* on t = 0); convex exactly when the
/// two-point inequality holds.
double symmetric_extension(const ConvexModel& h, const Vec& z, double t);

/// Integrand on 2-vectors: Psi(tau) = G(phi(tau)) with the fixed slot
/// table; f_from_psi pulls it back to matrices through the graph frame.
struct PsiIntegrand {
    ExtendedG g;

    double psi(const MultiVector& tau) const;
    double f_from_psi(const FMat& x) const;
};

/// Discrete competitor families against a flat comparand: the weighted
/// integrand sum must dominate (Jensen route), with a mass-gap margin for
/// the uniform version.
struct EllipticityReport {
    bool pass = true;
    std::size_t trials = 0;
    double min_slack = 0;        // min of (sum w Psi(tau) - m Psi(sigma))
    double min_margin_slack = 0; // same with the eps/2 mass-gap subtracted
    std::string failure;
};
EllipticityReport ellipticity_test(const PsiIntegrand& psi, std::size_t trials,
                                   double margin_eps = 0, std::uint64_t seed = 11);

} // namespace dci
