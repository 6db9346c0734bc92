#include <dci/convint.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace dci {

namespace {

using Poly = std::vector<Point2>;

double poly_area(const Poly& p) {
    double a = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& q = p[i];
        const auto& r = p[(i + 1) % p.size()];
        a += q[0] * r[1] - r[0] * q[1];
    }
    return 0.5 * a;
}

/// Affine scalar field g . x + c.
struct Aff {
    Point2 g{};
    double c = 0;
    double at(const Point2& p) const { return g[0] * p[0] + g[1] * p[1] + c; }
};

/// Clip a convex polygon against {f <= 0}.
Poly clip_halfplane(const Poly& poly, const Aff& f) {
    Poly out;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % n];
        double fa = f.at(a), fb = f.at(b);
        if (fa <= 0) out.push_back(a);
        if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0)) {
            double t = fa / (fa - fb);
            out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
        }
    }
    return out;
}

struct Region {
    Poly poly;
    Aff phi; // the active affine piece of the displacement height
    int kind; // 0 = low-slope zone, 1 = high-slope zone, 2 = cone
};

/// Arrangement of phi = min(sawtooth(<x,n>), kappa * edge cones) over a
/// triangle: regions where one affine candidate attains the minimum. The
/// sawtooth runs `periods` times across the s-extent of the triangle.
std::vector<Region> min_arrangement(const std::array<Point2, 3>& tri, const Point2& n,
                                    double s_min, double s_max, double theta, double c_len,
                                    double kappa, int periods) {
    Poly base{tri[0], tri[1], tri[2]};
    if (poly_area(base) < 0) std::swap(base[1], base[2]);

    std::array<Aff, 3> cones;
    for (int e = 0; e < 3; ++e) {
        Point2 a = base[e], b = base[(e + 1) % 3];
        Point2 edge{b[0] - a[0], b[1] - a[1]};
        double len = std::hypot(edge[0], edge[1]);
        Point2 nu{-edge[1] / len, edge[0] / len}; // inward for ccw polygons
        cones[e] = Aff{{kappa * nu[0], kappa * nu[1]}, -kappa * (nu[0] * a[0] + nu[1] * a[1])};
    }

    double pp = (s_max - s_min) / periods;
    double slope_b = (1 - theta) * c_len;
    double slope_a = -theta * c_len;
    std::vector<Region> out;
    for (int q = 0; q < periods; ++q) {
        double s0 = s_min + q * pp;
        double s_kink = s0 + theta * pp;
        double peak = slope_b * theta * pp;
        for (int slab = 0; slab < 2; ++slab) {
            Poly part = base;
            if (slab == 0) {
                // rising zone: s0 <= s <= s_kink
                part = clip_halfplane(part, Aff{{-n[0], -n[1]}, s0});
                part = clip_halfplane(part, Aff{{n[0], n[1]}, -s_kink});
            } else {
                part = clip_halfplane(part, Aff{{-n[0], -n[1]}, s_kink});
                part = clip_halfplane(part, Aff{{n[0], n[1]}, -(s0 + pp)});
            }
            if (part.size() < 3) continue;
            Aff saw;
            if (slab == 0)
                saw = Aff{{slope_b * n[0], slope_b * n[1]}, -slope_b * s0};
            else
                saw = Aff{{slope_a * n[0], slope_a * n[1]}, peak - slope_a * s_kink};
            std::array<Aff, 4> cand{saw, cones[0], cones[1], cones[2]};
            for (int a = 0; a < 4; ++a) {
                Poly reg = part;
                for (int b = 0; b < 4 && reg.size() >= 3; ++b) {
                    if (a == b) continue;
                    Aff diff{{cand[a].g[0] - cand[b].g[0], cand[a].g[1] - cand[b].g[1]},
                             cand[a].c - cand[b].c};
                    reg = clip_halfplane(reg, diff);
                }
                if (reg.size() < 3) continue;
                double ar = std::abs(poly_area(reg));
                if (ar < 1e-18) continue;
                out.push_back(Region{reg, cand[a], a == 0 ? slab : 2});
            }
        }
    }
    return out;
}

FMat rank_one_of(const FMat& w, Point2& n_out, Point2& u_out) {
    // dominant right direction of a (numerically) rank-one 2x2 matrix
    FMat g = w.transposed() * w;
    double tr = g(0, 0) + g(1, 1);
    double dd = std::sqrt(std::max(0.0, (g(0, 0) - g(1, 1)) * (g(0, 0) - g(1, 1)) +
                                             4 * g(0, 1) * g(0, 1)));
    double lam = 0.5 * (tr + dd);
    Point2 n{g(0, 1), lam - g(0, 0)};
    double nn = std::hypot(n[0], n[1]);
    if (nn < 1e-14) {
        n = {1.0, 0.0};
        nn = 1.0;
    }
    n = {n[0] / nn, n[1] / nn};
    Point2 u{w(0, 0) * n[0] + w(0, 1) * n[1], w(1, 0) * n[0] + w(1, 1) * n[1]};
    n_out = n;
    u_out = u;
    FMat rec(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) rec(i, j) = u[i] * n[j];
    return rec;
}

struct SplitSpec {
    FMat grad_a, grad_b;      // zone gradients
    double theta;             // mass fraction of the b-zone
    Cell::Tag tag_a, tag_b;
    int idx_a, idx_b;
};

/// Replace one cell by the laminate between grad_a and grad_b with
/// piecewise-affine cone cutoffs vanishing on the cell boundary.
void apply_split(const Cell& cell, const SplitSpec& sp, double kappa, int periods,
                 double& disp_bound, std::vector<Cell>& out) {
    FMat w = sp.grad_b - sp.grad_a;
    Point2 n{}, u{};
    rank_one_of(w, n, u);
    double ulen = std::hypot(u[0], u[1]);
    if (ulen < 1e-15) {
        out.push_back(cell);
        return;
    }
    Point2 udir{u[0] / ulen, u[1] / ulen};
    double c = ulen; // |B - A| along the unit pair

    // s-extent of the triangle
    double smin = std::numeric_limits<double>::infinity(), smax = -smin;
    for (const auto& p : cell.v) {
        double s = p[0] * n[0] + p[1] * n[1];
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    double p = smax - smin;
    if (p < 1e-14) {
        out.push_back(cell);
        return;
    }
    double theta = sp.theta;
    double peak = (1 - theta) * c * theta * p / periods;
    disp_bound = std::max(disp_bound, peak);

    auto regions = min_arrangement(cell.v, n, smin, smax, theta, c, kappa * c, periods);
    if (regions.empty()) {
        out.push_back(cell);
        return;
    }
    // relate the zone gradients back to the cell's own
    // G + udir (x) grad(phi): phi = saw: zone gradients; cones: transitions
    for (const auto& reg : regions) {
        // fan triangulation
        for (std::size_t t = 1; t + 1 < reg.poly.size(); ++t) {
            Cell child;
            child.v = {reg.poly[0], reg.poly[t], reg.poly[t + 1]};
            FMat bump(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) bump(i, j) = udir[i] * reg.phi.g[j];
            child.grad = cell.grad + bump;
            child.offset = {cell.offset[0] + reg.phi.c * udir[0],
                            cell.offset[1] + reg.phi.c * udir[1]};
            if (reg.kind == 0) {
                child.tag = sp.tag_b;
                child.target = sp.idx_b;
            } else if (reg.kind == 1) {
                child.tag = sp.tag_a;
                child.target = sp.idx_a;
            } else {
                child.tag = Cell::Tag::transition;
                child.target = -1;
            }
            out.push_back(child);
        }
    }
}

} // namespace

double Cell::area() const {
    return 0.5 * std::abs((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) -
                          (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]));
}

Point2 Cell::centroid() const {
    return {(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0};
}

double PiecewiseAffineMap::total_area() const {
    double a = 0;
    for (const auto& c : cells) a += c.area();
    return a;
}

std::optional<InitialPlacement> classify_start(const FMat& a0, const StageParams& params,
                                               double tol) {
    std::size_t n = params.witness.count();
    double scale = 1;
    for (const auto& t : params.targets) scale = std::max(scale, frob_norm(t));
    // exact target?
    auto xs = assemble(params.witness);
    for (std::size_t i = 0; i < n; ++i)
        if (frob_norm(a0 - xs[i]) <= tol * scale)
            return InitialPlacement{InitialPlacement::Kind::target, static_cast<int>(i), 1.0};
    // loop points and the splitting segments
    FMat base = params.witness.p;
    for (std::size_t i = 0; i < n; ++i) {
        if (frob_norm(a0 - base) <= tol * scale)
            return InitialPlacement{InitialPlacement::Kind::spiral, static_cast<int>(i), 0.0};
        // segment base .. base + k_i C_i
        FMat leg = params.witness.k[i] * params.witness.c[i];
        double ll = frobenius_inner(leg, leg);
        if (ll > 0) {
            double t = frobenius_inner(a0 - base, leg) / ll;
            if (t > 0 && t < 1) {
                FMat proj = base + t * leg;
                if (frob_norm(a0 - proj) <= tol * scale)
                    return InitialPlacement{InitialPlacement::Kind::segment, static_cast<int>(i),
                                            t};
            }
        }
        base = base + params.witness.c[i];
    }
    return std::nullopt;
}

PiecewiseAffineMap initial_map(const FMat& a0, const StageParams& params) {
    auto place = classify_start(a0, params);
    if (!place)
        throw std::invalid_argument(
            "boundary gradient is not reachable: it lies on neither the targets, the loop "
            "barycenter, nor the splitting segments");
    PiecewiseAffineMap map;
    map.boundary_grad = a0;
    map.boundary_offset = {0.0, 0.0};
    map.depth = 0;
    int g = std::max(1, params.grid);
    double h = 1.0 / g;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            Point2 p00{i * h, j * h}, p10{(i + 1) * h, j * h};
            Point2 p01{i * h, (j + 1) * h}, p11{(i + 1) * h, (j + 1) * h};
            for (int t = 0; t < 2; ++t) {
                Cell c;
                c.v = t == 0 ? std::array<Point2, 3>{p00, p10, p11}
                             : std::array<Point2, 3>{p00, p11, p01};
                c.grad = a0;
                c.offset = {0.0, 0.0};
                switch (place->kind) {
                    case InitialPlacement::Kind::target:
                        c.tag = Cell::Tag::leaf;
                        break;
                    case InitialPlacement::Kind::spiral:
                    case InitialPlacement::Kind::segment:
                        c.tag = Cell::Tag::spiral;
                        break;
                }
                c.target = place->index;
                map.cells.push_back(c);
            }
        }
    return map;
}

PiecewiseAffineMap refine(const PiecewiseAffineMap& map, const StageParams& params, int stages) {
    if (stages <= 0) return map;
    int depth = map.depth + stages;
    double rho = params.rho(depth);
    std::size_t n = params.witness.count();
    auto xs = assemble(params.witness);
    const FMat& base = params.witness.p;

    // contracted structure: legs rho C_i, loop points base + rho (P_i - base)
    std::vector<FMat> loop_pts, leaf_pts;
    FMat acc = base;
    for (std::size_t i = 0; i < n; ++i) {
        loop_pts.push_back(base + rho * (acc - base));
        leaf_pts.push_back(base + rho * (acc + params.witness.k[i] * params.witness.c[i] - base));
        acc = acc + params.witness.c[i];
    }

    PiecewiseAffineMap out;
    out.boundary_grad = map.boundary_grad;
    out.boundary_offset = map.boundary_offset;
    out.depth = depth;
    // transition volume scales with the sawtooth period: more periods at
    // deeper levels keep the off-structure mass proportional to (1 - rho)
    double kappa = params.kappa0;
    int periods = std::max(1, static_cast<int>(std::ceil(0.5 / (1.0 - rho))));
    double disp = 0;

    // rebuild each root cell of the previous structure: start again from
    // the boundary-level cells (the construction is per-level, not
    // incremental: every level realizes the loop at its own contraction)
    PiecewiseAffineMap fresh = initial_map(map.boundary_grad, params);
    std::vector<Cell> work = fresh.cells;
    // each spiral/segment cell descends the loop; leaves stay
    std::vector<Cell> done;
    auto place = classify_start(map.boundary_grad, params);
    int max_steps = static_cast<int>(n) * params.laps;

    for (auto& cell : work) {
        if (cell.tag != Cell::Tag::spiral) {
            done.push_back(cell);
            continue;
        }
        // segment starts first split along their own leg toward the leaf
        std::vector<std::pair<Cell, int>> stack{{cell, 0}};
        if (place && place->kind == InitialPlacement::Kind::segment) {
            // V = base-ish + t k_i C_i: realize as combination of the loop
            // point (spiral) and the contracted leaf along leg i
            stack.clear();
            Cell c0 = cell;
            int i = place->index;
            SplitSpec sp;
            sp.grad_b = leaf_pts[i] + (cell.grad - loop_pts[i]) -
                        (place->level / rho) * (leaf_pts[i] - loop_pts[i]);
            // anchor along the cell's own line: project onto the leg
            FMat leg = rho * params.witness.k[i] * params.witness.c[i];
            double ll = frobenius_inner(leg, leg);
            double t = ll > 0 ? frobenius_inner(cell.grad - loop_pts[i], leg) / ll : 0.0;
            t = std::clamp(t, 0.0, 0.999);
            sp.grad_a = cell.grad - t * leg;       // loop-point side
            sp.grad_b = sp.grad_a + leg;           // leaf side
            sp.theta = t;
            sp.tag_a = Cell::Tag::spiral;
            sp.idx_a = i;
            sp.tag_b = Cell::Tag::leaf;
            sp.idx_b = i;
            if (t > 1e-12) {
                std::vector<Cell> pieces;
                apply_split(c0, sp, kappa, periods, disp, pieces);
                for (auto& pc : pieces) {
                    if (pc.tag == Cell::Tag::spiral) stack.push_back({pc, 0});
                    else done.push_back(pc);
                }
            } else {
                stack.push_back({c0, 0});
            }
        }
        while (!stack.empty()) {
            auto [cur, step] = stack.back();
            stack.pop_back();
            if (cur.tag != Cell::Tag::spiral || step >= max_steps ||
                cur.area() < params.area_floor ||
                done.size() + stack.size() > params.max_cells) {
                done.push_back(cur);
                continue;
            }
            int i = cur.target;              // loop position of this cell
            int prev = (i + static_cast<int>(n) - 1) % static_cast<int>(n);
            SplitSpec sp;
            FMat leg = rho * params.witness.c[prev];
            sp.grad_a = cur.grad - leg;                                   // loop point prev
            sp.grad_b = cur.grad + (params.witness.k[prev] - 1.0) * leg;  // leaf prev
            sp.theta = 1.0 / params.witness.k[prev];
            sp.tag_a = Cell::Tag::spiral;
            sp.idx_a = prev;
            sp.tag_b = Cell::Tag::leaf;
            sp.idx_b = prev;
            std::vector<Cell> pieces;
            apply_split(cur, sp, kappa, periods, disp, pieces);
            if (pieces.size() == 1) {
                done.push_back(pieces[0]); // split degenerated, keep
                continue;
            }
            for (auto& pc : pieces) {
                if (pc.tag == Cell::Tag::spiral) stack.push_back({pc, step + 1});
                else done.push_back(pc);
            }
        }
    }
    out.cells = std::move(done);
    out.displacement_bound = disp;
    return out;
}

AnalyzeReport analyze(const PiecewiseAffineMap& map, const std::vector<FMat>& targets,
                      int dyadic_depth, const std::optional<std::array<FMat, 4>>& lift,
                      const std::vector<FMat>* lifted_targets) {
    AnalyzeReport rep;
    rep.dyadic_depth = dyadic_depth;
    std::size_t nt = targets.size();
    rep.fractions.assign(nt, 0.0);
    int res = 1 << dyadic_depth;
    std::vector<std::vector<bool>> seen(res * res, std::vector<bool>(nt, false));

    double total = 0;
    for (const auto& c : map.cells) {
        double a = c.area();
        total += a;
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < nt; ++i) {
            double d = frob_norm(c.grad - targets[i]);
            if (d < best) {
                best = d;
                arg = i;
            }
        }
        rep.fractions[arg] += a;
        rep.sup_all = std::max(rep.sup_all, best);
        rep.l1_all += best * a;
        switch (c.tag) {
            case Cell::Tag::leaf:
                rep.leaf_mass += a;
                rep.sup_leaf = std::max(rep.sup_leaf, best);
                break;
            case Cell::Tag::spiral:
                rep.spiral_mass += a;
                break;
            case Cell::Tag::transition:
                rep.transition_mass += a;
                break;
        }
        if (c.tag == Cell::Tag::leaf) {
            auto ctr = c.centroid();
            int qx = std::clamp(static_cast<int>(ctr[0] * res), 0, res - 1);
            int qy = std::clamp(static_cast<int>(ctr[1] * res), 0, res - 1);
            seen[qy * res + qx][arg] = true;
        }
    }
    rep.l1_all /= std::max(total, 1e-300);
    for (auto& f : rep.fractions) f /= std::max(total, 1e-300);
    rep.fraction_sum = 0;
    for (double f : rep.fractions) rep.fraction_sum += f;
    rep.min_distinct_targets = static_cast<int>(nt);
    for (const auto& sq : seen) {
        int cnt = 0;
        for (bool b : sq)
            if (b) ++cnt;
        rep.distinct_targets_per_square.push_back(cnt);
        rep.min_distinct_targets = std::min(rep.min_distinct_targets, cnt);
    }

    // lifted stack: w = (u, A u + B x, C u + D x)
    if (lift && lifted_targets) {
        const auto& [la, lb, lc, ld] = *lift;
        for (const auto& c : map.cells) {
            FMat dw(6, 2);
            FMat r1 = la * c.grad + lb, r2 = lc * c.grad + ld;
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 2; ++j) {
                    dw(i, j) = c.grad(i, j);
                    dw(2 + i, j) = r1(i, j);
                    dw(4 + i, j) = r2(i, j);
                }
            double best = std::numeric_limits<double>::infinity();
            for (const auto& t : *lifted_targets) best = std::min(best, frob_norm(dw - t));
            rep.lift_sup = std::max(rep.lift_sup, best);
        }
    }

    // continuity: compare affine values of collinear overlapping edges
    // between nearby cells, and the boundary trace against the datum
    struct Edge {
        Point2 a, b;
        std::size_t cell;
    };
    std::vector<Edge> edges;
    edges.reserve(map.cells.size() * 3);
    for (std::size_t ci = 0; ci < map.cells.size(); ++ci)
        for (int e = 0; e < 3; ++e)
            edges.push_back({map.cells[ci].v[e], map.cells[ci].v[(e + 1) % 3], ci});
    // grid index on edge midpoints
    int gres = std::max(4, static_cast<int>(std::sqrt(static_cast<double>(edges.size()) / 4)));
    std::map<std::pair<int, int>, std::vector<std::size_t>> grid;
    auto key_of = [&](const Point2& p) {
        return std::pair<int, int>{std::clamp(static_cast<int>(p[0] * gres), 0, gres - 1),
                                   std::clamp(static_cast<int>(p[1] * gres), 0, gres - 1)};
    };
    for (std::size_t ei = 0; ei < edges.size(); ++ei) {
        Point2 mid{0.5 * (edges[ei].a[0] + edges[ei].b[0]),
                   0.5 * (edges[ei].a[1] + edges[ei].b[1])};
        grid[key_of(mid)].push_back(ei);
    }
    auto value_at = [&](const Cell& c, const Point2& p) {
        return Point2{c.grad(0, 0) * p[0] + c.grad(0, 1) * p[1] + c.offset[0],
                      c.grad(1, 0) * p[0] + c.grad(1, 1) * p[1] + c.offset[1]};
    };
    auto check_pair = [&](const Edge& e1, const Edge& e2) {
        if (e1.cell == e2.cell) return;
        // collinear?
        Point2 d1{e1.b[0] - e1.a[0], e1.b[1] - e1.a[1]};
        double len1 = std::hypot(d1[0], d1[1]);
        if (len1 < 1e-14) return;
        Point2 t1{d1[0] / len1, d1[1] / len1};
        auto off = [&](const Point2& p) {
            return (p[0] - e1.a[0]) * (-t1[1]) + (p[1] - e1.a[1]) * t1[0];
        };
        if (std::abs(off(e2.a)) > 3e-13 || std::abs(off(e2.b)) > 3e-13) return;
        // overlapping parameter range along t1
        auto par = [&](const Point2& p) {
            return (p[0] - e1.a[0]) * t1[0] + (p[1] - e1.a[1]) * t1[1];
        };
        double lo = std::max(std::min(par(e2.a), par(e2.b)), 0.0);
        double hi = std::min(std::max(par(e2.a), par(e2.b)), len1);
        if (hi - lo < 1e-12) return;
        double gscale = 1 + frob_norm(map.cells[e1.cell].grad) + frob_norm(map.cells[e2.cell].grad);
        for (double s : {lo + 1e-9 * (hi - lo), 0.5 * (lo + hi), hi - 1e-9 * (hi - lo)}) {
            Point2 p{e1.a[0] + s * t1[0], e1.a[1] + s * t1[1]};
            auto v1 = value_at(map.cells[e1.cell], p);
            auto v2 = value_at(map.cells[e2.cell], p);
            rep.max_edge_value_jump = std::max(
                rep.max_edge_value_jump, std::hypot(v1[0] - v2[0], v1[1] - v2[1]) / gscale);
        }
        if (hi - lo < 1e-7) return; // too short to resolve a tangent direction
        FMat dg = map.cells[e1.cell].grad - map.cells[e2.cell].grad;
        double tj = std::hypot(dg(0, 0) * t1[0] + dg(0, 1) * t1[1],
                               dg(1, 0) * t1[0] + dg(1, 1) * t1[1]);
        rep.max_tangential_jump = std::max(rep.max_tangential_jump, tj / (1 + frob_norm(dg)));
    };
    for (const auto& [k, lst] : grid) {
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) {
                auto it = grid.find({k.first + dx, k.second + dy});
                if (it == grid.end()) continue;
                for (auto e1 : lst)
                    for (auto e2 : it->second)
                        if (e1 < e2) check_pair(edges[e1], edges[e2]);
            }
    }
    // boundary trace: edges on the unit-square boundary must carry the datum
    for (const auto& c : map.cells)
        for (const auto& p : c.v) {
            bool on = p[0] < 1e-12 || p[0] > 1 - 1e-12 || p[1] < 1e-12 || p[1] > 1 - 1e-12;
            if (!on) continue;
            auto v = value_at(c, p);
            Point2 want{map.boundary_grad(0, 0) * p[0] + map.boundary_grad(0, 1) * p[1] +
                            map.boundary_offset[0],
                        map.boundary_grad(1, 0) * p[0] + map.boundary_grad(1, 1) * p[1] +
                            map.boundary_offset[1]};
            rep.boundary_defect = std::max(rep.boundary_defect,
                                           std::hypot(v[0] - want[0], v[1] - want[1]));
        }
    return rep;
}

} // namespace dci
