#include <dci/counterexample.hpp>

#include <random>

namespace dci {

namespace {

RMat rm(const std::array<const char*, 4>& e) {
    RMat m(2, 2);
    m(0, 0) = rational_from_string(e[0]);
    m(0, 1) = rational_from_string(e[1]);
    m(1, 0) = rational_from_string(e[2]);
    m(1, 1) = rational_from_string(e[3]);
    return m;
}

} // namespace

CounterexampleData load_builtin() {
    CounterexampleData d;
    d.x = {
        rm({"8/5", "-2", "-2", "8/5"}),
        rm({"8/5", "2", "2", "8/5"}),
        rm({"2/5", "0", "0", "-18/5"}),
        rm({"-18/5", "0", "0", "2/5"}),
        rm({"3/4", "0", "0", "3/4"}),
    };
    d.y = {
        rm({"-8/1137", "7361/454800", "267/151600", "8/1137"}),
        rm({"8/1137", "7361/454800", "267/151600", "-8/1137"}),
        rm({"0", "-959/454800", "907/151600", "0"}),
        rm({"0", "5441/454800", "9121/454800", "0"}),
        rm({"0", "6001/454800", "2161/454800", "0"}),
    };
    d.z = {
        rm({"-3361/227400", "3361/284250", "4801/284250", "-4801/227400"}),
        rm({"3361/227400", "3361/284250", "4801/284250", "4801/227400"}),
        rm({"0", "-10083/379000", "4801/1137000", "0"}),
        rm({"0", "3361/1137000", "-14403/379000", "0"}),
        rm({"0", "3361/606400", "4801/606400", "0"}),
    };
    for (std::size_t i = 0; i < 5; ++i) {
        RMat a(6, 2);
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t cc = 0; cc < 2; ++cc) {
                a(r, cc) = d.x[i](r, cc);
                a(2 + r, cc) = d.y[i](r, cc);
                a(4 + r, cc) = d.z[i](r, cc);
            }
        d.a.push_back(a);
    }
    d.beta = {Rational(2), Rational(5), Rational(10), Rational(1), Rational(2)};
    d.d = {rational_from_string("-1204/828115"), Rational(0),
           rational_from_string("-1309/454800"), rational_from_string("-10097/2546880"),
           Rational(0)};
    d.c = {Rational(0), Rational(0), rational_from_string("-2929/1137000"),
           rational_from_string("5233/113700"), rational_from_string("-33/15160")};
    d.lift_a = rm({"0", "4/1137", "-4/1137", "0"});
    d.lift_b = rm({"0", "4801/454800", "3361/454800", "0"});
    d.lift_c = rm({"0", "3361/454800", "4801/454800", "0"});
    d.lift_d = RMat(2, 2);
    d.orderings = {{{1, 2, 3, 5, 4}, {1, 2, 4, 5, 3}, {1, 2, 5, 3, 4}}};
    return d;
}

ConditionsReport verify_conditions(const CounterexampleData& data, std::uint64_t seed) {
    ConditionsReport rep;

    // exact gap matrix in the rotated form
    std::vector<InclusionPoint<Rational>> pts;
    for (std::size_t i = 0; i < 5; ++i) {
        InclusionPoint<Rational> p;
        p.x = data.x[i];
        p.y = data.y[i];
        p.z = data.z[i];
        p.beta = data.beta[i];
        p.c = data.c[i];
        p.dz[MinorKey{{0, 1}, {0, 1}}] = data.d[i];
        pts.push_back(p);
    }
    auto qr = qij_report(pts, QijVariant::curl);
    rep.q = qr.q;
    rep.cond1 = qr.strictly_negative;
    for (auto [i, j] : qr.violations)
        rep.failures.push_back("gap not negative at (" + std::to_string(i + 1) + "," +
                               std::to_string(j + 1) + ")");

    // exact affine lift and Z-consistency
    rep.cond3 = true;
    RMat jrot = rotation_j<Rational>();
    for (std::size_t i = 0; i < 5; ++i) {
        if (!(data.lift_a * data.x[i] + data.lift_b == data.y[i])) {
            rep.cond3 = false;
            rep.failures.push_back("lift Y defect at " + std::to_string(i + 1));
        }
        if (!(data.lift_c * data.x[i] + data.lift_d == data.z[i])) {
            rep.cond3 = false;
            rep.failures.push_back("lift Z defect at " + std::to_string(i + 1));
        }
        RMat want = data.x[i].transposed() * data.y[i] - (data.beta[i] * data.c[i]) * jrot;
        if (!(data.z[i] == want)) {
            rep.cond3 = false;
            rep.failures.push_back("rotated inclusion structure fails at " + std::to_string(i + 1));
        }
    }

    // three validated orderings; legs attached to each matrix across the
    // orderings must be independent
    std::vector<std::vector<FMat>> legs_by_matrix(5);
    rep.cond2 = true;
    for (const auto& ord : data.orderings) {
        std::vector<FMat> xs;
        for (int ix : ord) xs.push_back(to_float(data.x[ix - 1]));
        auto res = detect_tn(xs, seed, 32);
        if (!res) {
            rep.cond2 = false;
            rep.failures.push_back("no validated witness for an ordering");
            continue;
        }
        for (std::size_t pos = 0; pos < 5; ++pos) {
            bool pos_k = res->config.k[pos] > 1;
            if (!pos_k) rep.cond2 = false;
            legs_by_matrix[ord[pos] - 1].push_back(res->config.c[pos]);
        }
        rep.witnesses.push_back(*res);
    }
    rep.min_leg_gram = std::numeric_limits<double>::infinity();
    if (rep.cond2 && rep.witnesses.size() == 3) {
        for (std::size_t mtx = 0; mtx < 5; ++mtx) {
            const auto& legs = legs_by_matrix[mtx];
            FMat g(3, 3);
            for (std::size_t a = 0; a < 3; ++a)
                for (std::size_t b = 0; b < 3; ++b) {
                    double na = frob_norm(legs[a]), nb = frob_norm(legs[b]);
                    g(a, b) = frobenius_inner(legs[a], legs[b]) / (na * nb);
                }
            double dg = det(g);
            rep.min_leg_gram = std::min(rep.min_leg_gram, dg);
            if (dg < 1e-12) {
                rep.cond2 = false;
                rep.failures.push_back("legs at matrix " + std::to_string(mtx + 1) +
                                       " are nearly dependent");
            }
        }
    } else {
        rep.min_leg_gram = 0;
    }

    // the stacked blocks inherit the first ordering's witness through the
    // affine lift, leg directions unchanged
    rep.lifted_t5 = false;
    if (!rep.witnesses.empty()) {
        const auto& w = rep.witnesses.front();
        const auto& ord = data.orderings.front();
        FMat la = to_float(data.lift_a), lb = to_float(data.lift_b);
        FMat lc = to_float(data.lift_c), ld = to_float(data.lift_d);
        auto lift = [&](const FMat& x, bool with_offset) {
            FMat out(6, 2);
            FMat ly = la * x, lz = lc * x;
            if (with_offset) {
                ly = ly + lb;
                lz = lz + ld;
            }
            for (std::size_t r = 0; r < 2; ++r)
                for (std::size_t cc = 0; cc < 2; ++cc) {
                    out(r, cc) = x(r, cc);
                    out(2 + r, cc) = ly(r, cc);
                    out(4 + r, cc) = lz(r, cc);
                }
            return out;
        };
        TnConfig<double> lifted;
        lifted.p = lift(w.config.p, true);
        lifted.k = w.config.k;
        for (const auto& ci : w.config.c) lifted.c.push_back(lift(ci, false));
        std::vector<FMat> stacked;
        for (int ix : ord) stacked.push_back(to_float(data.a[ix - 1]));
        rep.lifted_t5 = check_tn(stacked, lifted, 1e-8).pass;
        if (!rep.lifted_t5) rep.failures.push_back("lifted stack fails the witness check");
    }
    return rep;
}

std::array<double, 5> BuiltIntegrand::pack(const FMat& x, double d) {
    return {x(0, 0), x(1, 0), x(0, 1), x(1, 1), d};
}

namespace {

double norm5(const std::array<double, 5>& z) {
    double s = 0;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

double area5(const std::array<double, 5>& z) {
    double s = 1;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

std::array<double, 5> sub5(const std::array<double, 5>& a, const std::array<double, 5>& b) {
    std::array<double, 5> r;
    for (int i = 0; i < 5; ++i) r[i] = a[i] - b[i];
    return r;
}

// antiderivative of the quartic bump kernel on [-eta, eta]
double kernel_cdf(double t, double eta) {
    if (t <= -eta) return 0;
    if (t >= eta) return 1;
    double u = t / eta;
    return 0.5 + (15.0 / 16.0) * (u - (2.0 / 3.0) * u * u * u + u * u * u * u * u / 5.0);
}

} // namespace

double BuiltIntegrand::g1(const std::array<double, 5>& z) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces) best = std::max(best, p.at(z));
    return best;
}

std::optional<std::size_t> BuiltIntegrand::single_piece(const std::array<double, 5>& z) const {
    std::size_t arg = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        double v = pieces[i].at(z);
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i == arg) continue;
        double slope = 0;
        for (int q = 0; q < 5; ++q) {
            double dw = pieces[arg].w[q] - pieces[i].w[q];
            slope += dw * dw;
        }
        slope = std::sqrt(slope);
        if (best - pieces[i].at(z) <= moll_radius * slope) return std::nullopt;
    }
    return arg;
}

double BuiltIntegrand::g2(const std::array<double, 5>& z) const {
    if (auto j = single_piece(z)) return pieces[*j].at(z);
    double acc = 0;
    for (const auto& y : nodes) acc += g1(sub5(z, y));
    return acc / static_cast<double>(nodes.size());
}

std::array<double, 5> BuiltIntegrand::g2_grad(const std::array<double, 5>& z) const {
    std::array<double, 5> g{};
    if (auto j = single_piece(z)) return pieces[*j].w;
    for (const auto& y : nodes) {
        auto p = sub5(z, y);
        std::size_t arg = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            double v = pieces[i].at(p);
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        for (int q = 0; q < 5; ++q) g[q] += pieces[arg].w[q];
    }
    for (int q = 0; q < 5; ++q) g[q] /= static_cast<double>(nodes.size());
    return g;
}

double BuiltIntegrand::tail_f(const std::array<double, 5>& z) const {
    return m_tail * area5(z) - l_tail;
}

double BuiltIntegrand::smooth_max(double a, double b) const {
    double t = a - b;
    if (std::abs(t) >= eta) return std::max(a, b);
    double u = t / eta;
    double abs_eta = t * (2 * kernel_cdf(t, eta) - 1) +
                     (5.0 * eta / 16.0) * std::pow(1 - u * u, 3);
    return 0.5 * (a + b + abs_eta);
}

double BuiltIntegrand::smooth_max_da(double a, double b) const {
    return kernel_cdf(a - b, eta);
}

double BuiltIntegrand::g(const std::array<double, 5>& z) const {
    return smooth_max(tail_f(z), g2(z));
}

BuiltIntegrand::Eval BuiltIntegrand::h_eval(const std::array<double, 5>& z) const {
    Eval ev;
    double a = area5(z);
    // certified tail region: the cap equals the tail exactly
    double lower_gap = m_tail * a - l_tail - (c_bound * a); // F - upper bound on g2
    if (lower_gap >= eta) {
        ev.region = Eval::Region::tail;
        ev.value = (epsilon + m_tail) * a - l_tail;
        for (int q = 0; q < 5; ++q) ev.grad[q] = (epsilon + m_tail) * z[q] / a;
        return ev;
    }
    auto piece = single_piece(z);
    double g2v = g2(z);
    double fv = tail_f(z);
    double gv = smooth_max(fv, g2v);
    double da = smooth_max_da(fv, g2v);
    ev.value = epsilon * a + gv;
    auto g2g = g2_grad(z);
    for (int q = 0; q < 5; ++q)
        ev.grad[q] = epsilon * z[q] / a + da * (m_tail * z[q] / a) + (1 - da) * g2g[q];
    if (piece && fv - g2v <= -eta) {
        ev.region = Eval::Region::affine;
        ev.error_bound = 0;
    } else {
        ev.region = Eval::Region::quadrature;
        // spread of the shifted maxima over the mollification ball
        double wmax = 0;
        for (const auto& p : pieces) {
            double n = 0;
            for (double w : p.w) n += w * w;
            wmax = std::max(wmax, std::sqrt(n));
        }
        ev.error_bound = 2 * moll_radius * wmax;
    }
    return ev;
}

double BuiltIntegrand::f(const FMat& x) const { return f_eval(x).value; }

BuiltIntegrand::Eval BuiltIntegrand::f_eval(const FMat& x) const {
    auto z = pack(x, det(x));
    return h_eval(z);
}

FMat BuiltIntegrand::df(const FMat& x) const {
    auto ev = f_eval(x);
    FMat g(2, 2);
    g(0, 0) = ev.grad[0];
    g(1, 0) = ev.grad[1];
    g(0, 1) = ev.grad[2];
    g(1, 1) = ev.grad[3];
    // chain rule through the determinant slot
    FMat cof_t = adjugate(x).transposed();
    return g + ev.grad[4] * cof_t;
}

double BuiltIntegrand::certified_radius(std::size_t j) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i == j) continue;
        double margin = pieces[j].at(anchors[j]) - pieces[i].at(anchors[j]);
        double slope = 0;
        for (int q = 0; q < 5; ++q) {
            double dw = pieces[j].w[q] - pieces[i].w[q];
            slope += dw * dw;
        }
        slope = std::sqrt(slope);
        if (slope > 0) best = std::min(best, margin / slope);
    }
    return best - moll_radius;
}

IntegrandOracle BuiltIntegrand::oracle() const {
    IntegrandOracle o;
    o.value = [this](const FMat& x) { return f(x); };
    o.gradient = [this](const FMat& x) { return df(x); };
    o.minor_derivatives = [this](const FMat& x) {
        std::map<MinorKey, double> m;
        auto ev = f_eval(x);
        m[MinorKey{{0, 1}, {0, 1}}] = ev.grad[4];
        return m;
    };
    return o;
}

BuiltIntegrand build_integrand(const CounterexampleData& data, std::optional<double> eps_opt,
                               std::size_t node_count, std::uint64_t seed) {
    BuiltIntegrand b;
    std::vector<FMat> x, y;
    std::vector<double> beta, c, dcoef;
    for (std::size_t i = 0; i < 5; ++i) {
        x.push_back(to_float(data.x[i]));
        y.push_back(to_float(data.y[i]));
        beta.push_back(to_double(data.beta[i]));
        c.push_back(to_double(data.c[i]));
        dcoef.push_back(to_double(data.d[i]));
    }
    FMat jr = rotation_j<double>();

    auto area = [&](const FMat& m) {
        double n = frob_norm(m), dd = det(m);
        return std::sqrt(1 + n * n + dd * dd);
    };
    auto darea = [&](const FMat& m) {
        FMat g = m + det(m) * adjugate(m).transposed();
        return (1.0 / area(m)) * g;
    };

    // perturbed data for a given eps
    struct Perturbed {
        std::vector<FMat> yj;       // Y^eps J (the gradient-side rotation applied)
        std::vector<double> ce, de; // values and determinant coefficients
    };
    auto perturb = [&](double eps) {
        Perturbed p;
        for (std::size_t i = 0; i < 5; ++i) {
            FMat yeps = y[i] - (eps * beta[i]) * (darea(x[i]) * jr);
            p.yj.push_back(yeps * jr);
            p.ce.push_back(c[i] - eps * area(x[i]));
            p.de.push_back(dcoef[i] - eps * det(x[i]) / area(x[i]));
        }
        return p;
    };
    auto qeps = [&](const Perturbed& p, std::size_t i, std::size_t j) {
        return p.ce[i] - p.ce[j] + p.de[i] * det(x[i] - x[j]) +
               frobenius_inner(x[i] - x[j], p.yj[i]) / beta[i];
    };

    double eps = eps_opt.value_or(1.0);
    if (!eps_opt) {
        for (;; eps /= 2) {
            if (eps < 1e-12)
                throw std::runtime_error("no eps keeps the perturbed gaps negative");
            auto p = perturb(eps);
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < 5; ++i)
                for (std::size_t j = 0; j < 5; ++j)
                    if (i != j) worst = std::max(worst, qeps(p, i, j));
            if (worst < -1e-9) break;
        }
    }
    b.epsilon = eps;
    auto p = perturb(eps);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            if (i != j) worst = std::max(worst, qeps(p, i, j));
    if (!(worst < 0)) throw std::runtime_error("perturbed gaps are not strictly negative");
    b.sigma = -worst;

    // affine pieces l_i(z) = <w, z> + b on (X column-major, det)
    for (std::size_t i = 0; i < 5; ++i) {
        AffinePiece piece;
        FMat wx = (-1.0 / beta[i]) * p.yj[i] - p.de[i] * adjugate(x[i]).transposed();
        piece.w = {wx(0, 0), wx(1, 0), wx(0, 1), wx(1, 1), p.de[i]};
        piece.b = p.ce[i] + frobenius_inner(p.yj[i], x[i]) / beta[i] + p.de[i] * det(x[i]);
        b.pieces.push_back(piece);
        b.anchors.push_back(BuiltIntegrand::pack(x[i], det(x[i])));
    }

    // the printed piece uses the unperturbed determinant coefficient; the
    // interpolation identity l_i(z_j) = c^eps_j + Q^eps_ij selects the
    // perturbed one, checked numerically on both variants
    double defect_pert = 0, defect_plain = 0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            if (i == j) continue;
            double li = b.pieces[i].at(b.anchors[j]);
            defect_pert = std::max(defect_pert, std::abs(li - (p.ce[j] + qeps(p, i, j))));
            double li_plain = li + (dcoef[i] - p.de[i]) * (det(x[i] - x[j]));
            defect_plain = std::max(defect_plain, std::abs(li_plain - (p.ce[j] + qeps(p, i, j))));
        }
    if (defect_pert <= defect_plain) {
        b.variant_d = "perturbed";
        b.variant_defect_adopted = defect_pert;
        b.variant_defect_rejected = defect_plain;
    } else {
        // adopt the plain coefficient instead
        b.variant_d = "plain";
        b.variant_defect_adopted = defect_plain;
        b.variant_defect_rejected = defect_pert;
        for (std::size_t i = 0; i < 5; ++i) {
            FMat wx = (-1.0 / beta[i]) * p.yj[i] - dcoef[i] * adjugate(x[i]).transposed();
            b.pieces[i].w = {wx(0, 0), wx(1, 0), wx(0, 1), wx(1, 1), dcoef[i]};
            b.pieces[i].b = p.ce[i] + frobenius_inner(p.yj[i], x[i]) / beta[i] +
                            dcoef[i] * det(x[i]);
        }
    }

    // domination radius: piece j beats piece i on a ball of this size
    b.delta = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t i = 0; i < 5; ++i) {
            if (i == j) continue;
            double margin = b.pieces[j].at(b.anchors[j]) - b.pieces[i].at(b.anchors[j]);
            if (margin <= 0) throw std::runtime_error("piece anchors are not separated");
            double slope = 0;
            for (int q = 0; q < 5; ++q) {
                double dw = b.pieces[j].w[q] - b.pieces[i].w[q];
                slope += dw * dw;
            }
            slope = std::sqrt(slope);
            if (slope > 0) b.delta = std::min(b.delta, margin / slope);
        }
    b.delta *= 0.9;
    b.moll_radius = 0.249 * b.delta;

    // mollification nodes: antithetic uniform ball samples, fixed seed
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t q = 0; q < node_count / 2; ++q) {
        std::array<double, 5> v;
        double n = 0;
        for (auto& vi : v) {
            vi = gauss(rng);
            n += vi * vi;
        }
        n = std::sqrt(n);
        double r = b.moll_radius * std::pow(unif(rng), 0.2);
        for (auto& vi : v) vi *= r / n;
        b.nodes.push_back(v);
        std::array<double, 5> neg;
        for (int i = 0; i < 5; ++i) neg[i] = -v[i];
        b.nodes.push_back(neg);
    }

    // growth bound |g2| <= C |(1, z)| and the tail constants
    double cb = 0, wmax = 0;
    for (const auto& piece : b.pieces) {
        double wn = 0;
        for (double w : piece.w) wn += w * w;
        wn = std::sqrt(wn);
        wmax = std::max(wmax, wn);
        cb = std::max(cb, std::sqrt(piece.b * piece.b + wn * wn));
    }
    b.c_bound = cb + b.moll_radius * wmax;
    b.m_tail = b.c_bound + 1;

    double anchor_reach = 0;
    for (std::size_t i = 0; i < 5; ++i)
        anchor_reach = std::max(anchor_reach, frob_norm(x[i]) + std::abs(det(x[i])));
    b.big_r = 2.5 * anchor_reach;
    // cap below the pieces on the working ball with a unit margin
    b.l_tail = (b.m_tail + b.c_bound) * std::sqrt(1 + b.big_r * b.big_r) + 1;
    b.eta = 0.5;
    b.big_r2 = std::sqrt((b.l_tail + 1) * (b.l_tail + 1) - 1) + 1;
    return b;
}

} // namespace dci
