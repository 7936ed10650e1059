#include "strichartz/curves.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace strz {

namespace {

std::function<void(const std::string&)>& sink() {
    static std::function<void(const std::string&)> s = [](const std::string& m) {
        std::cerr << "warning: " << m << "\n";
    };
    return s;
}

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

double sgn(double x) { return (x > 0) - (x < 0); }

int pow2_exponent(double h) {
    if (!(h > 0.0)) throw ValidationError("scale h must be positive");
    int m = static_cast<int>(std::lround(std::log2(h)));
    if (std::abs(h - std::ldexp(1.0, m)) > 1e-12 * h)
        throw ValidationError("scale h must be a power of two on the grid");
    return m;
}

} // namespace

void set_warning_sink(std::function<void(const std::string&)> s) { sink() = std::move(s); }
void warn(const std::string& msg) {
    if (sink()) sink()(msg);
}

CurveSpec CurveSpec::hom_odd(int ell) {
    if (ell < 3 || ell % 2 == 0) throw ValidationError("hom-odd needs odd ell >= 3");
    return {CurveKind::HomOdd, ell, 1.0, 1};
}

CurveSpec CurveSpec::hom_even(int ell) {
    if (ell < 2 || ell % 2 != 0) throw ValidationError("hom-even needs even ell >= 2");
    return {CurveKind::HomEven, ell, 1.0, 1};
}

CurveSpec CurveSpec::schrod(double c, int sign) {
    if (!(c > 0.0)) throw ValidationError("schrod coefficient must be positive");
    if (sign != 1 && sign != -1) throw ValidationError("schrod sign must be +1 or -1");
    return {CurveKind::Schrod, 2, c, sign};
}

CurveSpec CurveSpec::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string head = text.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        if (head == "hom-odd") return hom_odd(std::stoi(arg));
        if (head == "hom-even") return hom_even(std::stoi(arg));
        if (head == "inhom35" && arg.empty()) return inhom35();
        if (head == "inhom-even35" && arg.empty()) return inhom_even35();
        if (head == "schrod" && !arg.empty()) {
            int s = 1;
            if (arg[0] == '+' || arg[0] == '-') {
                s = arg[0] == '-' ? -1 : 1;
                arg = arg.substr(1);
            }
            std::size_t used = 0;
            double c = std::stod(arg, &used);
            if (used != arg.size()) throw ValidationError("bad coefficient");
            return schrod(c, s);
        }
    } catch (const std::logic_error&) {
        // stoi/stod failures fall through
    }
    throw ValidationError("unrecognised curve '" + text + "'");
}

std::string CurveSpec::encode() const {
    std::ostringstream os;
    switch (kind) {
    case CurveKind::HomOdd: os << "hom-odd:" << ell; break;
    case CurveKind::HomEven: os << "hom-even:" << ell; break;
    case CurveKind::Inhom35: os << "inhom35"; break;
    case CurveKind::InhomEven35: os << "inhom-even35"; break;
    case CurveKind::Schrod: os << "schrod:" << (sign > 0 ? '+' : '-') << c; break;
    }
    return os.str();
}

double CurveSpec::phase(double xi) const {
    switch (kind) {
    case CurveKind::HomOdd: return ipow(xi, ell);
    case CurveKind::HomEven: return ipow(std::abs(xi), ell);
    case CurveKind::Inhom35: return ipow(xi, 3) + ipow(xi, 5);
    case CurveKind::InhomEven35: {
        double a = std::abs(xi);
        return ipow(a, 3) + ipow(a, 5);
    }
    case CurveKind::Schrod: return sign * c * xi * xi;
    }
    return 0.0;
}

double CurveSpec::phase_d1(double xi) const {
    switch (kind) {
    case CurveKind::HomOdd: return ell * ipow(xi, ell - 1);
    case CurveKind::HomEven: return sgn(xi) * ell * ipow(std::abs(xi), ell - 1);
    case CurveKind::Inhom35: return 3 * xi * xi + 5 * ipow(xi, 4);
    case CurveKind::InhomEven35: return sgn(xi) * (3 * xi * xi + 5 * ipow(xi, 4));
    case CurveKind::Schrod: return 2.0 * sign * c * xi;
    }
    return 0.0;
}

double CurveSpec::phase_d2(double xi) const {
    switch (kind) {
    case CurveKind::HomOdd: return ell * (ell - 1) * ipow(xi, ell - 2);
    case CurveKind::HomEven: return ell * (ell - 1) * ipow(std::abs(xi), ell - 2);
    case CurveKind::Inhom35: return 6 * xi + 20 * ipow(xi, 3);
    case CurveKind::InhomEven35: {
        double a = std::abs(xi);
        return 6 * a + 20 * ipow(a, 3);
    }
    case CurveKind::Schrod: return 2.0 * sign * c;
    }
    return 0.0;
}

double CurveSpec::weight(double xi) const {
    switch (kind) {
    case CurveKind::HomOdd:
    case CurveKind::HomEven:
        if (ell == 2) return 1.0;
        if (xi == 0.0) return 0.0;
        return std::pow(std::abs(xi), (ell - 2) / 6.0);
    case CurveKind::Inhom35:
    case CurveKind::InhomEven35: return std::pow(std::abs(xi + xi * xi * xi), 1.0 / 6.0);
    case CurveKind::Schrod: return 1.0;
    }
    return 1.0;
}

Multiplier Multiplier::tabulate(const Grid1D& g, const std::function<double(double)>& phase,
                                const std::function<double(double)>& weight) {
    Multiplier m;
    m.phase.resize(g.n);
    m.weight.resize(g.n);
    for (int k = 0; k < g.n; ++k) {
        m.phase[k] = phase(g.xi(k));
        m.weight[k] = weight(g.xi(k));
    }
    return m;
}

Multiplier Multiplier::of(const CurveSpec& c, const Grid1D& g, bool weighted) {
    return tabulate(
        g, [&](double x) { return c.phase(x); },
        [&](double x) { return weighted ? c.weight(x) : 1.0; });
}

void for_each_slice(const Multiplier& m, const SampledFunction& f, const SpaceTimeGrid& sg,
                    const std::function<void(int, cvec&)>& visit) {
    const Grid1D& g = f.grid();
    if (g != sg.spatial) throw DimensionError("function and space-time grid differ");
    cvec buf(g.n);
    for (int i = 0; i < sg.n_times; ++i) {
        const double t = sg.times[i];
        for (int k = 0; k < g.n; ++k) {
            double a = t * m.phase[k];
            buf[k] = f.freq()[k] * (m.weight[k] * cplx(std::cos(a), std::sin(a)));
        }
        buf = to_space(g, buf);
        visit(i, buf);
    }
}

void for_each_slice_multi(const Multiplier& m, const std::vector<const cvec*>& hats, const SpaceTimeGrid& sg,
                          const std::function<void(int, std::vector<cvec>&)>& visit) {
    const Grid1D& g = sg.spatial;
    cvec factor(g.n);
    std::vector<cvec> rows(hats.size(), cvec(g.n));
    for (int i = 0; i < sg.n_times; ++i) {
        const double t = sg.times[i];
        for (int k = 0; k < g.n; ++k) {
            double a = t * m.phase[k];
            factor[k] = m.weight[k] * cplx(std::cos(a), std::sin(a));
        }
        for (std::size_t h = 0; h < hats.size(); ++h) {
            const cvec& hat = *hats[h];
            for (int k = 0; k < g.n; ++k) rows[h][k] = hat[k] * factor[k];
            rows[h] = to_space(g, rows[h]);
        }
        visit(i, rows);
    }
}

SpaceTimeField apply_multiplier(const Multiplier& m, const SampledFunction& f, const SpaceTimeGrid& sg) {
    SpaceTimeField F;
    F.stgrid = sg;
    F.values.resize(static_cast<std::size_t>(sg.n_times) * sg.spatial.n);
    for_each_slice(m, f, sg, [&](int i, cvec& row) { std::copy(row.begin(), row.end(), F.row(i)); });
    return F;
}

SpaceTimeField evolve(const CurveSpec& curve, const SampledFunction& f, const SpaceTimeGrid& sg) {
    check_band(f, "evolve");
    return apply_multiplier(Multiplier::of(curve, f.grid(), false), f, sg);
}

SpaceTimeField extend(const CurveSpec& curve, const SampledFunction& f, const SpaceTimeGrid& sg) {
    check_band(f, "extend");
    return apply_multiplier(Multiplier::of(curve, f.grid(), true), f, sg);
}

SampledFunction extend_adjoint(const CurveSpec& curve, const SpaceTimeField& F) {
    const auto& sg = F.stgrid;
    const Grid1D& g = sg.spatial;
    Multiplier m = Multiplier::of(curve, g, true);
    std::vector<Accumulator> re(g.n), im(g.n);
    cvec row(g.n);
    for (int i = 0; i < sg.n_times; ++i) {
        std::copy(F.row(i), F.row(i) + g.n, row.begin());
        cvec hat = to_freq(g, row);
        const double t = sg.times[i], w = sg.weights[i];
        for (int k = 0; k < g.n; ++k) {
            double a = -t * m.phase[k];
            cplx v = hat[k] * cplx(std::cos(a), std::sin(a)) * w;
            re[k].add(v.real());
            im[k].add(v.imag());
        }
    }
    cvec out(g.n);
    for (int k = 0; k < g.n; ++k) out[k] = m.weight[k] * cplx(re[k].value(), im[k].value());
    return SampledFunction::from_freq(g, std::move(out));
}

double multiplier_lp_norm(const Multiplier& m, const SampledFunction& f, const SpaceTimeGrid& sg,
                          double p) {
    Accumulator total;
    double mx = 0.0;
    const bool inf = std::isinf(p);
    for_each_slice(m, f, sg, [&](int i, cvec& row) {
        if (inf) {
            for (const auto& v : row) mx = std::max(mx, std::abs(v));
            return;
        }
        Accumulator r;
        for (const auto& v : row) r.add(pow_abs(std::abs(v), p));
        total.add(r.value() * sg.weights[i]);
    });
    if (inf) return mx;
    return std::pow(total.value() * sg.spatial.dx(), 1.0 / p);
}

double extend_lp_norm(const CurveSpec& curve, const SampledFunction& f, const SpaceTimeGrid& sg,
                      double p) {
    check_band(f, "extend");
    return multiplier_lp_norm(Multiplier::of(curve, f.grid(), true), f, sg, p);
}

SampledFunction project_halfline(const SampledFunction& f, int sign) {
    if (sign != 1 && sign != -1) throw ValidationError("projection sign must be +1 or -1");
    cvec hat(f.freq());
    for (int k = 0; k < f.size(); ++k) {
        double xi = f.grid().xi(k);
        bool keep = sign > 0 ? xi >= 0.0 : xi < 0.0;
        if (!keep) hat[k] = 0.0;
    }
    return SampledFunction::from_freq(f.grid(), std::move(hat));
}

SampledFunction modulate(const SampledFunction& f, double freq) {
    if (freq == 0.0) return f;
    cvec s(f.space());
    for (int j = 0; j < f.size(); ++j) {
        double a = freq * f.grid().x(j);
        s[j] *= cplx(std::cos(a), std::sin(a));
    }
    return SampledFunction::from_space(f.grid(), std::move(s));
}

SampledFunction rescale(const SampledFunction& f, double h) {
    int m = pow2_exponent(h);
    if (m == 0) return f;
    const Grid1D& g = f.grid();
    const int n = g.n;
    if (m > 0) {
        // stretch: fhat_h(xi) = h^{1/2} fhat(h xi), every h-th bin
        const long step = 1L << m;
        cvec hat(n, 0.0);
        const double s = std::sqrt(h);
        for (int k = 0; k < n; ++k) {
            long ks = k < n / 2 ? k : k - n;
            long kk = ks * step;
            if (kk > -n / 2 && kk < n / 2) hat[k] = s * f.freq()[kk >= 0 ? kk : kk + n];
        }
        return SampledFunction::from_freq(g, std::move(hat));
    }
    // compress: f_h(x_j) = h^{-1/2} f(2^{|m|} x_j), a grid point or outside the box
    const long step = 1L << (-m);
    cvec s(n, 0.0);
    const double amp = 1.0 / std::sqrt(h);
    for (int j = 0; j < n; ++j) {
        long i = step * j - (step - 1) * (n / 2);
        if (i >= 0 && i < n) s[j] = amp * f.space()[i];
    }
    return SampledFunction::from_space(g, std::move(s));
}

SampledFunction translate(const SampledFunction& f, double x0) {
    if (x0 == 0.0) return f;
    if (std::abs(x0) >= f.grid().L / 2) warn("translation beyond L/2 wraps around the periodic box");
    cvec hat(f.freq());
    for (int k = 0; k < f.size(); ++k) {
        double a = -x0 * f.grid().xi(k);
        hat[k] *= cplx(std::cos(a), std::sin(a));
    }
    return SampledFunction::from_freq(f.grid(), std::move(hat));
}

SampledFunction evolve_at(const CurveSpec& curve, const SampledFunction& f, double t) {
    if (t == 0.0) return f;
    cvec hat(f.freq());
    for (int k = 0; k < f.size(); ++k) {
        double a = t * curve.phase(f.grid().xi(k));
        hat[k] *= cplx(std::cos(a), std::sin(a));
    }
    return SampledFunction::from_freq(f.grid(), std::move(hat));
}

SampledFunction apply_symmetry(const SymmetryParams& p, const SampledFunction& f, const CurveSpec& curve) {
    SampledFunction g = rescale(f, p.h);
    check_band(g, "apply_symmetry");
    g = translate(g, p.x0);
    return evolve_at(curve, g, p.t0);
}

SampledFunction apply_profile_op(const ProfileParams& p, int sign, const SampledFunction& phi,
                                 const CurveSpec& curve) {
    if (sign != 1 && sign != -1) throw ValidationError("profile sign must be +1 or -1");
    SampledFunction g = modulate(phi, sign * p.h * p.xi);
    g = rescale(g, p.h);
    check_band(g, "apply_profile_op");
    g = translate(g, p.x0);
    return evolve_at(curve, g, p.t0);
}

SampledFunction invert_profile_op(const ProfileParams& p, int sign, const SampledFunction& f,
                                  const CurveSpec& curve) {
    if (sign != 1 && sign != -1) throw ValidationError("profile sign must be +1 or -1");
    SampledFunction g = evolve_at(curve, f, -p.t0);
    g = translate(g, -p.x0);
    g = rescale(g, 1.0 / p.h);
    return modulate(g, -sign * p.h * p.xi);
}

Multiplier approximate_multiplier(double N, int sign, const Grid1D& g) {
    if (!(N > 0.0)) throw ValidationError("carrier N must be positive");
    if (sign != 1 && sign != -1) throw ValidationError("sign must be +1 or -1");
    const double s = sign, inv = 1.0 / (N * N * N);
    return Multiplier::tabulate(
        g,
        [=](double x) {
            double x2 = x * x, x3 = x2 * x;
            return inv * (x3 * x2 + s * 5 * N * x2 * x2 + 10 * N * N * x3 + s * 10 * N * N * N * x2 + x3 +
                          s * 3 * N * x2);
        },
        [=](double x) {
            double y = x + s * N;
            return std::pow(std::abs(inv * (y + y * y * y)), 1.0 / 6.0);
        });
}

SpaceTimeField approximate_op(double N, int sign, const SampledFunction& f, const SpaceTimeGrid& sg) {
    Multiplier m = approximate_multiplier(N, sign, f.grid());
    check_band(f, "approximate_op");
    return apply_multiplier(m, f, sg);
}

} // namespace strz
