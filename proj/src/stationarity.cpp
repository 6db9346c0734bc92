#include <dci/stationarity.hpp>

#include <cmath>

namespace dci {

namespace {

// 1D quadratic B-spline on [0, 3]
double bspline(double t) {
    if (t <= 0 || t >= 3) return 0;
    if (t < 1) return 0.5 * t * t;
    if (t < 2) return 0.5 * (-2 * t * t + 6 * t - 3);
    double u = 3 - t;
    return 0.5 * u * u;
}
double bspline_d(double t) {
    if (t <= 0 || t >= 3) return 0;
    if (t < 1) return t;
    if (t < 2) return -2 * t + 3;
    return -(3 - t);
}

// degree-4 exact triangle rule (6 points)
struct TriQuad {
    std::array<std::array<double, 3>, 6> bary;
    std::array<double, 6> w;
};
const TriQuad& tri_rule() {
    static TriQuad q = [] {
        TriQuad r;
        const double a1 = 0.445948490915965, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, w2 = 0.109951743655322;
        r.bary = {{{1 - 2 * a1, a1, a1},
                   {a1, 1 - 2 * a1, a1},
                   {a1, a1, 1 - 2 * a1},
                   {1 - 2 * a2, a2, a2},
                   {a2, 1 - 2 * a2, a2},
                   {a2, a2, 1 - 2 * a2}}};
        r.w = {w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return q;
}

using Poly = std::vector<Point2>;

double poly_area_signed(const Poly& p) {
    double a = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& q = p[i];
        const auto& r = p[(i + 1) % p.size()];
        a += q[0] * r[1] - r[0] * q[1];
    }
    return 0.5 * a;
}

Poly clip_axis(const Poly& poly, int axis, double level, bool keep_below) {
    Poly out;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % n];
        double fa = keep_below ? a[axis] - level : level - a[axis];
        double fb = keep_below ? b[axis] - level : level - b[axis];
        if (fa <= 0) out.push_back(a);
        if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0)) {
            double t = fa / (fa - fb);
            out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
        }
    }
    return out;
}

/// Integral of the bump gradient over a triangle, exact: the triangle is
/// clipped to the spline patches, then the rule integrates the
/// polynomial pieces.
Point2 integral_grad_bump(const TestBasis& basis, int bx, int by,
                          const std::array<Point2, 3>& tri) {
    double s = basis.spacing();
    double x0 = bx * s, y0 = by * s;
    Point2 acc{0, 0};
    // quick reject
    double xmin = std::min({tri[0][0], tri[1][0], tri[2][0]});
    double xmax = std::max({tri[0][0], tri[1][0], tri[2][0]});
    double ymin = std::min({tri[0][1], tri[1][1], tri[2][1]});
    double ymax = std::max({tri[0][1], tri[1][1], tri[2][1]});
    if (xmax <= x0 || xmin >= x0 + 3 * s || ymax <= y0 || ymin >= y0 + 3 * s) return acc;
    Poly base{tri[0], tri[1], tri[2]};
    if (poly_area_signed(base) < 0) std::swap(base[1], base[2]);
    for (int px = 0; px < 3; ++px) {
        Poly colp = clip_axis(base, 0, x0 + px * s, false);
        colp = clip_axis(colp, 0, x0 + (px + 1) * s, true);
        if (colp.size() < 3) continue;
        for (int py = 0; py < 3; ++py) {
            Poly patch = clip_axis(colp, 1, y0 + py * s, false);
            patch = clip_axis(patch, 1, y0 + (py + 1) * s, true);
            if (patch.size() < 3) continue;
            for (std::size_t t = 1; t + 1 < patch.size(); ++t) {
                std::array<Point2, 3> sub{patch[0], patch[t], patch[t + 1]};
                double area = std::abs(poly_area_signed({sub[0], sub[1], sub[2]}));
                if (area < 1e-18) continue;
                const auto& rule = tri_rule();
                for (int qp = 0; qp < 6; ++qp) {
                    Point2 p{rule.bary[qp][0] * sub[0][0] + rule.bary[qp][1] * sub[1][0] +
                                 rule.bary[qp][2] * sub[2][0],
                             rule.bary[qp][0] * sub[0][1] + rule.bary[qp][1] * sub[1][1] +
                                 rule.bary[qp][2] * sub[2][1]};
                    double tx = (p[0] - x0) / s, ty = (p[1] - y0) / s;
                    double gx = bspline_d(tx) / s * bspline(ty);
                    double gy = bspline(tx) * bspline_d(ty) / s;
                    acc[0] += rule.w[qp] * area * gx;
                    acc[1] += rule.w[qp] * area * gy;
                }
            }
        }
    }
    return acc;
}

} // namespace

double TestBasis::value(int bx, int by, const Point2& p) const {
    double s = spacing();
    return bspline((p[0] - bx * s) / s) * bspline((p[1] - by * s) / s);
}

Point2 TestBasis::gradient(int bx, int by, const Point2& p) const {
    double s = spacing();
    double tx = (p[0] - bx * s) / s, ty = (p[1] - by * s) / s;
    return {bspline_d(tx) / s * bspline(ty), bspline(tx) * bspline_d(ty) / s};
}

GraphCurrent GraphCurrent::with_nearest_multiplicity(const PiecewiseAffineMap& map,
                                                     const std::vector<FMat>& targets,
                                                     const std::vector<double>& beta_of_target) {
    GraphCurrent t;
    t.map = &map;
    t.beta.reserve(map.cells.size());
    for (const auto& c : map.cells) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            double d = frob_norm(c.grad - targets[i]);
            if (d < best) {
                best = d;
                arg = i;
            }
        }
        t.beta.push_back(beta_of_target[arg]);
    }
    return t;
}

EnergyResult sigma_energy(const GraphCurrent& t, const IntegrandOracle& f,
                          const PsiIntegrand* psi) {
    EnergyResult out;
    for (std::size_t ci = 0; ci < t.map->cells.size(); ++ci) {
        const auto& c = t.map->cells[ci];
        double a = c.area();
        double b = t.beta[ci];
        out.direct += f.value(c.grad) * b * a;
        auto frame = graph_frame(c.grad);
        out.mass += frame.area * b * a;
        if (psi) out.psi_route += psi->psi(frame.w) * b * a;
    }
    return out;
}

ResidualReport weak_residual(const GraphCurrent& t, const IntegrandOracle& f,
                             const TestBasis& basis) {
    ResidualReport rep;
    rep.basis_size = 2 * basis.size(); // two components per bump

    // per-cell constants
    std::size_t nc = t.map->cells.size();
    std::vector<FMat> df(nc, FMat(2, 2));
    std::vector<double> fv(nc);
    for (std::size_t ci = 0; ci < nc; ++ci) {
        df[ci] = f.grad(t.map->cells[ci].grad);
        fv[ci] = f.value(t.map->cells[ci].grad);
    }

    double outer_sq = 0, inner_sq = 0;
    for (int bx = 0; bx < basis.grid; ++bx)
        for (int by = 0; by < basis.grid; ++by) {
            Point2 outer_acc[2]{{0, 0}, {0, 0}}; // per component a
            Point2 inner_acc[2]{{0, 0}, {0, 0}};
            double outer_res[2]{0, 0}, inner_res[2]{0, 0};
            (void)outer_acc;
            (void)inner_acc;
            for (std::size_t ci = 0; ci < nc; ++ci) {
                const auto& c = t.map->cells[ci];
                Point2 ig = integral_grad_bump(basis, bx, by, c.v);
                if (ig[0] == 0 && ig[1] == 0) continue;
                double b = t.beta[ci];
                for (int a = 0; a < 2; ++a) {
                    // outer: row a of Df dotted with the bump gradient
                    outer_res[a] += b * (df[ci](a, 0) * ig[0] + df[ci](a, 1) * ig[1]);
                    // inner: (G e_a)^T Df grad b - f (grad b)_a
                    double ge0 = c.grad(0, a), ge1 = c.grad(1, a);
                    double v0 = ge0 * df[ci](0, 0) + ge1 * df[ci](1, 0);
                    double v1 = ge0 * df[ci](0, 1) + ge1 * df[ci](1, 1);
                    inner_res[a] += b * (v0 * ig[0] + v1 * ig[1] - fv[ci] * ig[a]);
                }
            }
            for (int a = 0; a < 2; ++a) {
                rep.outer_max = std::max(rep.outer_max, std::abs(outer_res[a]));
                rep.inner_max = std::max(rep.inner_max, std::abs(inner_res[a]));
                outer_sq += outer_res[a] * outer_res[a];
                inner_sq += inner_res[a] * inner_res[a];
            }
        }
    rep.outer_rms = std::sqrt(outer_sq / rep.basis_size);
    rep.inner_rms = std::sqrt(inner_sq / rep.basis_size);
    return rep;
}

VariationResult first_variation(const GraphCurrent& t, const PsiIntegrand& psi,
                                const VectorField4& g, const VectorField4Jac& dg, double h_step,
                                int subdivision, int quad_order) {
    (void)quad_order;
    VariationResult out;
    out.step = h_step;

    // formula route: per cell, integrate the wedge expansion over the
    // (flat) graph patch by the degree-4 rule
    const auto& rule = tri_rule();
    for (std::size_t ci = 0; ci < t.map->cells.size(); ++ci) {
        const auto& c = t.map->cells[ci];
        auto frame = graph_frame(c.grad);
        // unit orientation and tangent columns
        std::vector<std::vector<double>> cols(2, std::vector<double>(4));
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 4; ++i) cols[j][i] = frame.m_frame(i, j);
        MultiVector tau = (1.0 / frame.area) * frame.w;
        auto phi_tau = phi_coords(tau);
        Vec z(phi_tau.begin(), phi_tau.begin() + 5);
        Vec dG = psi.g.grad(z, phi_tau[5]); // gradient of the extension at phi(tau)
        double cell_acc = 0;
        for (int qp = 0; qp < 6; ++qp) {
            Point2 p{rule.bary[qp][0] * c.v[0][0] + rule.bary[qp][1] * c.v[1][0] +
                         rule.bary[qp][2] * c.v[2][0],
                     rule.bary[qp][0] * c.v[0][1] + rule.bary[qp][1] * c.v[1][1] +
                         rule.bary[qp][2] * c.v[2][1]};
            std::vector<double> pos{p[0], p[1],
                                    c.grad(0, 0) * p[0] + c.grad(0, 1) * p[1] + c.offset[0],
                                    c.grad(1, 0) * p[0] + c.grad(1, 1) * p[1] + c.offset[1]};
            FMat jac = dg(pos);
            double val = 0;
            for (int which = 0; which < 2; ++which) {
                std::vector<double> pushed(4, 0.0);
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j) pushed[i] += jac(i, j) * cols[which][j];
                auto wv = which == 0 ? wedge({pushed, cols[1]}) : wedge({cols[0], pushed});
                auto pw = phi_coords(wv);
                // <dPsi(tau), sigma> = <DG(phi tau), phi(sigma)>
                double term = 0;
                for (int q = 0; q < 5; ++q) term += dG[q] * pw[q];
                term += dG[5] * pw[5];
                val += term;
            }
            // the wedge of the raw frame columns has norm area, tau is unit;
            // the expansion is evaluated on the unit pair: divide once
            cell_acc += rule.w[qp] * val / frame.area;
        }
        out.formula += cell_acc * t.beta[ci] * c.area() * frame.area;
    }

    // finite-difference route: push the sampled graph through the flow
    auto energy_at = [&](double eps) {
        double acc = 0;
        int sub = std::max(1, subdivision);
        for (std::size_t ci = 0; ci < t.map->cells.size(); ++ci) {
            const auto& c = t.map->cells[ci];
            double b = t.beta[ci];
            for (int si = 0; si < sub; ++si)
                for (int sj = 0; sj + si < sub; ++sj) {
                    // two small triangles of the barycentric refinement
                    auto bc = [&](double l0, double l1) {
                        Point2 p{c.v[0][0] + l0 * (c.v[1][0] - c.v[0][0]) +
                                     l1 * (c.v[2][0] - c.v[0][0]),
                                 c.v[0][1] + l0 * (c.v[1][1] - c.v[0][1]) +
                                     l1 * (c.v[2][1] - c.v[0][1])};
                        return p;
                    };
                    double h = 1.0 / sub;
                    std::array<std::array<Point2, 3>, 2> subtris;
                    int nsub = (sj + si + 1 < sub) ? 2 : 1;
                    subtris[0] = {bc(si * h, sj * h), bc((si + 1) * h, sj * h),
                                  bc(si * h, (sj + 1) * h)};
                    if (nsub == 2)
                        subtris[1] = {bc((si + 1) * h, sj * h), bc((si + 1) * h, (sj + 1) * h),
                                      bc(si * h, (sj + 1) * h)};
                    for (int stx = 0; stx < nsub; ++stx) {
                        std::array<std::vector<double>, 3> q;
                        for (int vtx = 0; vtx < 3; ++vtx) {
                            const Point2& p = subtris[stx][vtx];
                            std::vector<double> pos{
                                p[0], p[1],
                                c.grad(0, 0) * p[0] + c.grad(0, 1) * p[1] + c.offset[0],
                                c.grad(1, 0) * p[0] + c.grad(1, 1) * p[1] + c.offset[1]};
                            // RK4 flow for time eps
                            int steps = 4;
                            double dt = eps / steps;
                            for (int st = 0; st < steps; ++st) {
                                auto k1 = g(pos);
                                std::vector<double> p2(4);
                                for (int i = 0; i < 4; ++i) p2[i] = pos[i] + 0.5 * dt * k1[i];
                                auto k2 = g(p2);
                                for (int i = 0; i < 4; ++i) p2[i] = pos[i] + 0.5 * dt * k2[i];
                                auto k3 = g(p2);
                                for (int i = 0; i < 4; ++i) p2[i] = pos[i] + dt * k3[i];
                                auto k4 = g(p2);
                                for (int i = 0; i < 4; ++i)
                                    pos[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
                            }
                            q[vtx] = pos;
                        }
                        std::vector<double> e1(4), e2(4);
                        for (int i = 0; i < 4; ++i) {
                            e1[i] = q[1][i] - q[0][i];
                            e2[i] = q[2][i] - q[0][i];
                        }
                        auto wv = wedge({e1, e2});
                        // 1-homogeneous integrand: Psi(w)/2 is the patch energy
                        acc += 0.5 * b * psi.psi(wv);
                    }
                }
        }
        return acc;
    };
    out.finite_difference = (energy_at(h_step) - energy_at(-h_step)) / (2 * h_step);
    return out;
}

} // namespace dci
