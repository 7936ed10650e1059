#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "strichartz/dyadic.hpp"
#include "strichartz/extremizer.hpp"
#include "strichartz/profile.hpp"
#include "strichartz/refined.hpp"
#include "strichartz/two_profile.hpp"

namespace strz::cli {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json grid_block(double L, int n, double T0, int n_times) {
    return {{"L", L}, {"n_points", n}, {"T0", T0}, {"n_times", n_times}};
}

json base(const std::string& curve, json grid) {
    return {{"curve", curve}, {"grid", std::move(grid)}, {"seed", 1}};
}

json profile_block(double h, double x0, double xi, double t0) {
    return {{"h", h}, {"x0", x0}, {"xi", xi}, {"t0", t0}};
}

const std::map<std::string, json>& defaults() {
    static const std::map<std::string, json> d = [] {
        std::map<std::string, json> m;
        m["norm"] = base("hom-odd:3", grid_block(64, 1024, 1.0, 256));
        m["norm"]["input"] = {{"kind", "gaussian"}, {"width", 1.0}, {"velocity", 0.0}, {"x0", 0.0}, {"file", ""}};

        m["sweep"] = base("hom-odd:3", grid_block(64, 4096, 0.0, 0));
        m["sweep"]["sweep"] = {{"N_list", {8, 16, 32, 64, 128}}, {"conjugate", false}, {"width", 1.0},
                               {"S", 16.0},  {"n_times", 320},  {"path", "auto"}};

        m["homogenize"] = base("hom-odd:3", grid_block(64, 4096, 0.0, 0));
        m["homogenize"]["homogenize"] = {
            {"width1", 1.0}, {"width2", 1.0}, {"conjugate", true}, {"S", 16.0}, {"n_times", 320}};

        m["decompose"] = base("hom-odd:3", grid_block(64, 1024, 0.5, 256));
        m["decompose"]["decompose"] = {{"eps", 0.05},         {"J_max", 4},     {"carriers", {32, 96}},
                                       {"positions", {0, 0}}, {"width", 4.0},   {"input_file", ""}};

        m["classify"] = base("hom-odd:3", grid_block(64, 1024, 0.0, 0));
        // linear: entry n = base + n * rate (scale: h 2^{n log2_h_rate});
        // embed: a and b are single-shot parameters, rates ignored
        json a = profile_block(1, 0, 0, 0), b = profile_block(1, 0, 0, 0);
        for (auto* p : {&a, &b})
            (*p).update({{"log2_h_rate", 0.0}, {"x0_rate", 0.0}, {"xi_rate", 0.0}, {"t0_rate", 0.0}});
        a["xi_rate"] = 1.0;
        b["xi_rate"] = -1.0;
        m["classify"]["classify"] = {
            {"mode", "both"}, {"sequence", "linear"}, {"a", a}, {"b", b}, {"length", 4096}, {"theta", 1e3}};

        m["geometry"] = base("hom-odd:3", grid_block(0, 0, 0.0, 0));
        m["geometry"]["geometry"] = {{"check", "all"},  {"pairs", 100}, {"j_min", -6},
                                     {"j_max", 4},      {"samples", 65}, {"windows", json::array()}};

        m["refined"] = base("inhom35", grid_block(256, 2048, 0.05, 64));
        m["refined"]["refined"] = {{"band", 8.0},          {"n_random", 50},      {"n_concentrated", 10},
                                   {"packet_width", 4.0},  {"scales", {-1, 2}},   {"theta", 1.0 / 3.0}};

        m["extremize"] = base("schrod:+1", grid_block(64, 1024, 16.0, 1024));
        m["extremize"]["extremize"] = {
            {"max_iter", 200}, {"tol", 1e-10}, {"mask_level", 1.2}, {"width", 1.0}, {"perturbation", 0.2}};

        m["threshold"] = base("hom-odd:3", grid_block(64, 1024, 16.0, 1024));
        m["threshold"]["threshold"] = {{"max_iter", 200}, {"tol", 1e-9},         {"restarts", 3},
                                       {"tolerance", 0.01}, {"mask_level", 1.2}, {"width", 1.0},
                                       {"S", 16.0},       {"window_n_times", 320}};

        m["gradcheck"] = base("hom-odd:3", grid_block(64, 1024, 16.0, 1024));
        m["gradcheck"]["gradcheck"] = {{"directions", 4}, {"width", 1.0}, {"velocity", 0.5}, {"mask_level", 1.2}};
        return m;
    }();
    return d;
}

void check_keys(const json& def, const json& user, const std::string& where) {
    if (!user.is_object()) throw ValidationError("config " + where + " must be an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (!def.contains(it.key())) throw ValidationError("unknown config key " + where + it.key());
        const json& d = def[it.key()];
        if (d.is_object()) check_keys(d, it.value(), where + it.key() + ".");
    }
}

// ---- artifact writers ----

struct Context {
    const json& cfg;
    std::string hash;

    std::string preamble() const {
        const json& g = cfg["grid"];
        std::ostringstream os;
        os << "# config_hash=" << hash << " curve=" << cfg["curve"].get<std::string>() << " L=" << num(g["L"])
           << " n_points=" << g["n_points"].get<long long>() << " T0=" << num(g["T0"])
           << " n_times=" << g["n_times"].get<long long>() << " seed=" << cfg["seed"].get<long long>() << "\n";
        return os.str();
    }
    json envelope(json body) const {
        body["config_hash"] = hash;
        body["grid"] = cfg["grid"];
        body["config"] = cfg;
        return body;
    }
};

class Csv {
public:
    explicit Csv(std::vector<std::string> cols) : cols_(std::move(cols)) {}
    void row(const std::vector<std::string>& cells) {
        if (cells.size() != cols_.size()) throw std::logic_error("csv row width");
        rows_.push_back(cells);
    }
    std::string str(const Context& ctx) const {
        std::ostringstream os;
        os << ctx.preamble();
        for (std::size_t i = 0; i < cols_.size(); ++i) os << (i ? "," : "") << cols_[i];
        os << "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << "\n";
        }
        return os.str();
    }

private:
    std::vector<std::string> cols_;
    std::vector<std::vector<std::string>> rows_;
};

Artifact json_artifact(const std::string& name, const Context& ctx, json body) {
    return {name, ctx.envelope(std::move(body)).dump(2) + "\n"};
}

// ---- inputs ----

Grid1D grid_of(const json& cfg) {
    const json& g = cfg["grid"];
    return Grid1D::make(g["L"].get<double>(), g["n_points"].get<int>());
}

SpaceTimeGrid st_grid_of(const json& cfg, const Grid1D& g) {
    const json& gr = cfg["grid"];
    return SpaceTimeGrid::uniform(gr["T0"].get<double>(), gr["n_times"].get<int>(), g);
}

SampledFunction gaussian(const Grid1D& g, double a, double v = 0.0, double x0 = 0.0) {
    return packet_input(g, a, v, x0);
}

// rows "x,re,im"; lines starting with '#' and a non-numeric header are skipped
SampledFunction read_function_csv(const std::string& path, const Grid1D& g) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file " + path);
    cvec vals;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x, re, im;
        if (!(ls >> x >> re >> im)) {
            if (vals.empty()) continue; // header
            throw ValidationError("malformed row in " + path);
        }
        if (vals.size() < static_cast<std::size_t>(g.n) && std::abs(x - g.x(static_cast<int>(vals.size()))) > 1e-9 * g.L)
            throw ValidationError("input abscissae do not match the configured grid");
        vals.emplace_back(re, im);
    }
    if (static_cast<int>(vals.size()) != g.n) throw ValidationError("input has the wrong number of samples");
    return SampledFunction::from_space(g, std::move(vals));
}

std::string function_csv(const SampledFunction& f, const Context& ctx) {
    Csv c({"x", "re", "im"});
    const Grid1D& g = f.grid();
    for (int j = 0; j < g.n; ++j) c.row({num(g.x(j)), num(f.space()[j].real()), num(f.space()[j].imag())});
    return c.str(ctx);
}

ProfileParams params_of(const json& p) {
    return {p["h"].get<double>(), p["x0"].get<double>(), p["xi"].get<double>(), p["t0"].get<double>()};
}

ParamSequence linear_sequence(const json& p, OrthoMode mode, double alpha, int length) {
    ProfileParams base = params_of(p);
    if (!(base.h > 0)) throw ValidationError("classify scales must be positive");
    ParamSequence s{{}, mode, alpha};
    for (int n = 1; n <= length; ++n)
        s.entries.push_back({base.h * std::exp2(p["log2_h_rate"].get<double>() * n),
                             base.x0 + p["x0_rate"].get<double>() * n, base.xi + p["xi_rate"].get<double>() * n,
                             base.t0 + p["t0_rate"].get<double>() * n});
    return s;
}

json params_json(const ProfileParams& p) { return profile_block(p.h, p.x0, p.xi, p.t0); }

// ---- commands ----

std::vector<Artifact> cmd_norm(const Context& ctx) {
    const json& cfg = ctx.cfg;
    auto curve = CurveSpec::parse(cfg["curve"]);
    Grid1D g = grid_of(cfg);
    auto sg = st_grid_of(cfg, g);
    const json& in = cfg["input"];
    SampledFunction f;
    std::string kind = in["kind"];
    if (kind == "gaussian")
        f = gaussian(g, in["width"], in["velocity"], in["x0"]);
    else if (kind == "file")
        f = read_function_csv(in["file"], g);
    else
        throw ValidationError("input.kind must be gaussian or file");
    check_band(f, "norm");

    Multiplier m = Multiplier::of(curve, g, true);
    Csv slices({"t", "weight", "sixth_power"});
    Accumulator total;
    bool finite = true;
    for_each_slice(m, f, sg, [&](int i, cvec& row) {
        Accumulator s;
        for (const auto& v : row) s.add(std::pow(std::norm(v), 3));
        double val = s.value() * g.dx();
        finite = finite && std::isfinite(val);
        total.add(val * sg.weights[i]);
        slices.row({num(sg.times[i]), num(sg.weights[i]), num(val)});
    });
    if (!finite) throw NumericError("non-finite extension values");
    double norm6 = std::pow(total.value(), 1.0 / 6.0), l2 = l2_norm(f);
    json body = {{"command", "norm"}, {"curve", curve.encode()}, {"l6_norm", norm6}, {"l2_norm", l2},
                 {"quotient", l2 > 0 ? norm6 / l2 : 0.0}};
    return {json_artifact("norm.json", ctx, body), {"slices.csv", slices.str(ctx)}};
}

std::vector<Artifact> cmd_sweep(const Context& ctx) {
    const json& cfg = ctx.cfg;
    const json& s = cfg["sweep"];
    auto curve = CurveSpec::parse(cfg["curve"]);
    Grid1D g = grid_of(cfg);
    WindowConfig w{s["S"], s["n_times"]};
    auto f = gaussian(g, s["width"]);
    std::vector<double> Ns;
    for (const auto& b : s["N_list"]) Ns.push_back(b.get<double>() * g.dxi());
    std::string p = s["path"];
    SweepPath path = p == "raw" ? SweepPath::Raw : p == "approx" ? SweepPath::Approx : SweepPath::Auto;
    if (p != "raw" && p != "approx" && p != "auto") throw ValidationError("sweep.path must be auto, raw or approx");
    bool conj = s["conjugate"];
    auto r = sweep_two_profile(curve, f, f, Ns, conj, w, path);

    Csv c({"N_bins", "N", "norm", "ratio_to_schrodinger", "relative_gap", "overlap", "path"});
    bool decreasing = true;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        c.row({num(s["N_list"][i].get<double>()), num(r.N_values[i]), num(r.norms[i]),
               num(r.norms[i] / r.schrodinger_reference), num(r.relative_gaps[i]), num(r.overlaps[i]), r.paths[i]});
        if (i && r.relative_gaps[i] >= r.relative_gaps[i - 1]) decreasing = false;
    }
    json body = {{"command", "sweep"},
                 {"curve", curve.encode()},
                 {"conjugate", conj},
                 {"limit_prediction", r.limit_prediction},
                 {"schrodinger_reference", r.schrodinger_reference},
                 {"final_ratio", r.norms.back() / r.schrodinger_reference},
                 {"final_relative_gap", r.relative_gaps.back()},
                 {"gaps_decreasing", decreasing}};
    return {json_artifact("sweep.json", ctx, body), {"sweep.csv", c.str(ctx)}};
}

std::vector<Artifact> cmd_homogenize(const Context& ctx) {
    const json& cfg = ctx.cfg;
    const json& h = cfg["homogenize"];
    auto curve = CurveSpec::parse(cfg["curve"]);
    Grid1D g = grid_of(cfg);
    WindowConfig w{h["S"], h["n_times"]};
    auto g1 = gaussian(g, h["width1"]), g2 = gaussian(g, h["width2"]);
    bool conj = h["conjugate"];
    double val = homogenized_norm(curve, g1, g2, conj, w);
    double n1 = schrodinger_norm(g1, 1.0, w), n2 = schrodinger_norm(g2, 1.0, w);
    json body = {{"command", "homogenize"},
                 {"curve", curve.encode()},
                 {"conjugate", conj},
                 {"homogenized_norm", val},
                 {"schrodinger_norm_g1", n1},
                 {"schrodinger_norm_g2", n2},
                 {"ratio_to_g1", val / n1},
                 {"schrodinger_coefficient", schrodinger_coefficient(curve)},
                 {"pair_upper_bound", std::pow(4.0, -1.0 / 6.0) * std::sqrt(n1 * n1 + n2 * n2)}};
    if (curve.kind == CurveKind::HomOdd) body["equal_profile_constant"] = std::pow(40.0 / (curve.ell * (curve.ell - 1.0)), 1.0 / 6.0);
    if (curve.kind == CurveKind::Inhom35) body["equal_profile_constant"] = std::pow(2.0, 1.0 / 6.0);
    return {json_artifact("homogenize.json", ctx, body)};
}

std::vector<Artifact> cmd_decompose(const Context& ctx) {
    const json& cfg = ctx.cfg;
    const json& d = cfg["decompose"];
    auto curve = CurveSpec::parse(cfg["curve"]);
    Grid1D g = grid_of(cfg);
    const json& gr = cfg["grid"];
    DecompositionConfig dc;
    dc.T = gr["T0"];
    dc.n_times = gr["n_times"];

    std::vector<ProfileParams> planted;
    SampledFunction phi = gaussian(g, d["width"]);
    SampledFunction f = SampledFunction::zero(g);
    std::string file = d["input_file"];
    if (!file.empty()) {
        f = read_function_csv(file, g);
    } else {
        if (d["carriers"].size() != d["positions"].size())
            throw ValidationError("decompose.carriers and decompose.positions differ in length");
        for (std::size_t i = 0; i < d["carriers"].size(); ++i) {
            ProfileParams P{1.0, d["positions"][i].get<double>(), d["carriers"][i].get<double>() * g.dxi(), 0.0};
            planted.push_back(P);
            f = f + apply_profile_op(P, 1, phi, curve) + apply_profile_op(P, -1, phi.conj(), curve);
        }
    }
    auto rep = decompose(curve, f, d["J_max"], d["eps"], dc);

    Csv pairs({"index", "h", "x0", "xi", "t0", "grouped", "mass_plus", "mass_minus", "recovery_error"});
    json jp = json::array();
    for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
        const auto& p = rep.pairs[i];
        double rec = -1.0;
        if (!planted.empty()) {
            // nearest planted carrier; error measured in the planted frame
            std::size_t best = 0;
            for (std::size_t k = 1; k < planted.size(); ++k)
                if (std::abs(planted[k].xi - p.params.xi) < std::abs(planted[best].xi - p.params.xi)) best = k;
            const auto& P = planted[best];
            auto rp = invert_profile_op(P, 1, apply_profile_op(p.params, 1, p.phi_plus, curve), curve);
            auto rm = invert_profile_op(P, -1, apply_profile_op(p.params, -1, p.phi_minus, curve), curve);
            rec = std::max(l2_norm(rp - phi), l2_norm(rm - phi.conj()));
        }
        double mp = std::pow(l2_norm(p.phi_plus), 2), mm = std::pow(l2_norm(p.phi_minus), 2);
        pairs.row({std::to_string(i), num(p.params.h), num(p.params.x0), num(p.params.xi), num(p.params.t0),
                   rep.grouped[i] ? "1" : "0", num(mp), num(mm), num(rec)});
        jp.push_back({{"params", params_json(p.params)}, {"grouped", static_cast<bool>(rep.grouped[i])},
                      {"recovery_error", rec}});
    }
    Csv rem({"step", "remainder_l2"});
    rem.row({"0", num(l2_norm(f))});
    for (std::size_t i = 0; i < rep.remainder_l2.size(); ++i) rem.row({std::to_string(i + 1), num(rep.remainder_l2[i])});
    double max_cross = 0.0;
    for (std::size_t a = 0; a < rep.pairwise_bilinear.size(); ++a)
        for (std::size_t b = 0; b < rep.pairwise_bilinear.size(); ++b)
            if (a != b) max_cross = std::max(max_cross, rep.pairwise_bilinear[a][b]);
    double f2 = std::pow(l2_norm(f), 2), ef2 = std::pow(rep.initial_strichartz, 2);
    json body = {{"command", "decompose"},
                 {"curve", curve.encode()},
                 {"pairs", jp},
                 {"initial_strichartz", rep.initial_strichartz},
                 {"remainder_strichartz", rep.remainder_strichartz},
                 {"l2_budget_residual", rep.l2_budget_residual},
                 {"l2_budget_relative", f2 > 0 ? rep.l2_budget_residual / f2 : 0.0},
                 {"sixth_power_gap", rep.sixth_power_gap},
                 {"sixth_power_sum", rep.sixth_power_sum},
                 {"pairwise_bilinear", rep.pairwise_bilinear},
                 {"max_cross_bilinear_relative", ef2 > 0 ? max_cross / ef2 : 0.0},
                 {"pair_orthogonal", rep.pair_orthogonal}};
    return {json_artifact("decompose.json", ctx, body), {"pairs.csv", pairs.str(ctx)},
            {"remainder.csv", rem.str(ctx)}, {"remainder_function.csv", function_csv(rep.remainder, ctx)}};
}

std::vector<Artifact> cmd_classify(const Context& ctx) {
    const json& cfg = ctx.cfg;
    const json& c = cfg["classify"];
    auto curve = CurveSpec::parse(cfg["curve"]);
    std::string mode = c["mode"];
    bool inhom = curve.kind == CurveKind::Inhom35 || curve.kind == CurveKind::InhomEven35;
    std::vector<std::pair<std::string, OrthoMode>> modes;
    if (mode == "auto") modes.push_back({curve.odd_phase() ? "odd" : "even", ortho_mode(curve)});
    if (mode == "odd" || mode == "both") modes.push_back({"odd", inhom ? OrthoMode::OddInhom35 : OrthoMode::OddHom});
    if (mode == "even" || mode == "both") modes.push_back({"even", inhom ? OrthoMode::EvenInhom35 : OrthoMode::EvenHom});
    if (modes.empty()) throw ValidationError("classify.mode must be auto, odd, even or both");
    const double theta = c["theta"];
    const int length = c["length"];

    json verdicts = json::object();
    std::vector<Artifact> out;
    for (const auto& [name, m] : modes) {
        ParamSequence A, B;
        if (c["sequence"] == "embed") {
            std::tie(A, B) = embed_parameters(params_of(c["a"]), params_of(c["b"]), m, ortho_alpha(curve), length);
        } else if (c["sequence"] == "linear") {
            if (length < 3) throw ValidationError("classify.length must be at least 3");
            A = linear_sequence(c["a"], m, ortho_alpha(curve), length);
            B = linear_sequence(c["b"], m, ortho_alpha(curve), length);
        } else {
            throw ValidationError("classify.sequence must be linear or embed");
        }
        auto v = classify_orthogonality(A, B, theta);
        json diag = json::array();
        std::vector<std::string> cols{"n"};
        for (const auto& s : v.diagnostics) {
            diag.push_back({{"name", s.name}, {"diverges", s.diverges}, {"final", s.values.empty() ? 0.0 : s.values.back()}});
            cols.push_back(s.name);
        }
        verdicts[name] = {{"orthogonal", v.orthogonal}, {"matched_case", v.matched_case}, {"diagnostics", diag}};
        Csv series(cols);
        const std::size_t len = v.diagnostics.empty() ? 0 : v.diagnostics.front().values.size();
        std::vector<std::size_t> idx;
        for (std::size_t n = 0; n < len; n += 64) idx.push_back(n);
        if (len && idx.back() != len - 1) idx.push_back(len - 1);
        for (std::size_t n : idx) {
            std::vector<std::string> row{std::to_string(n + 1)};
            for (const auto& s : v.diagnostics) row.push_back(num(s.values[n]));
            series.row(row);
        }
        out.push_back({"diagnostics_" + name + ".csv", series.str(ctx)});
    }
    json body = {{"command", "classify"}, {"curve", curve.encode()}, {"a", c["a"]}, {"b", c["b"]}, {"verdicts", verdicts}};
    out.insert(out.begin(), json_artifact("classify.json", ctx, body));
    return out;
}

std::vector<Artifact> cmd_geometry(const Context& ctx) {
    const json& cfg = ctx.cfg;
    const json& gm = cfg["geometry"];
    auto curve = CurveSpec::parse(cfg["curve"]);
    int ell;
    if (curve.kind == CurveKind::HomOdd)
        ell = curve.ell;
    else if (curve.kind == CurveKind::Inhom35)
        ell = 5;
    else
        throw ValidationError("geometry needs a hom-odd or inhom35 curve");
    std::string check = gm["check"];
    const bool all = check == "all";
    if (!all && check != "coefficients" && check != "depth" && check != "containment" && check != "cover")
        throw ValidationError("geometry.check must be all, coefficients, depth, containment or cover");

    const int depth = min_adjacency_depth(ell);
    json body = {{"command", "geometry"}, {"curve", curve.encode()}, {"ell", ell}, {"N", depth}};
    std::vector<Artifact> out;
    if (all || check == "coefficients") {
        auto pc = p_coefficients(ell);
        body["coefficients"] = {{"b", pc.b}, {"max_index", pc.max_index},
                                {"recursion_agrees", p_coefficients_recursive(ell) == pc.b}};
    }
    if (all || check == "depth") {
        body["depth"] = {{"rhs", adjacency_rhs(ell)},
                         {"lhs_at_N", adjacency_lhs(ell, depth)},
                         {"lhs_at_N_minus_1", adjacency_lhs(ell, depth - 1)}};
    }
    if (all || check == "containment") {
        Csv c({"j", "k", "j_partner", "k_partner", "contained"});
        int ok = 0;
        auto pairs = sample_whitney_pairs(depth, gm["pairs"], cfg["seed"].get<std::uint64_t>(), gm["j_min"], gm["j_max"]);
        for (const auto& [t, tp] : pairs) {
            bool in = containment_check(t, tp, curve, depth, gm["samples"]);
            ok += in;
            c.row({std::to_string(t.j), std::to_string(t.k), std::to_string(tp.j), std::to_string(tp.k), in ? "1" : "0"});
        }
        body["containment"] = {{"pairs", pairs.size()}, {"contained", ok}};
        out.push_back({"containment.csv", c.str(ctx)});
    }
    if (all || check == "cover") {
        std::vector<CoverWindow> windows;
        for (const auto& w : gm["windows"])
            windows.push_back({w["j_min"], w["j_max"], w["freq_lo"], w["freq_hi"]});
        if (windows.empty()) {
            // second window is the first dilated by 2^4
            CoverWindow w0 = ell == 3 ? CoverWindow{0, 4, 1, 4096} : CoverWindow{0, 2, 1, 8192};
            windows = {w0, {w0.j_min + 4, w0.j_max + 4, w0.freq_lo * 16, w0.freq_hi * 16}};
        }
        double beta = select_beta(curve, depth);
        json jw = json::array();
        for (const auto& w : windows) {
            auto r = cover_multiplicity(curve, depth, beta, w);
            jw.push_back({{"j_min", w.j_min}, {"j_max", w.j_max}, {"freq_lo", w.freq_lo}, {"freq_hi", w.freq_hi},
                          {"pairs", r.pairs}, {"multiplicity", r.multiplicity}});
        }
        bool equal = true;
        for (const auto& w : jw) equal = equal && w["multiplicity"] == jw.front()["multiplicity"];
        body["cover"] = {{"beta", beta}, {"windows", jw}, {"multiplicity_equal", equal},
                         {"multiplicity", jw.front()["multiplicity"]}};
    }
    out.insert(out.begin(), json_artifact("geometry.json", ctx, body));
    return out;
}

std::vector<Artifact> cmd_refined(const Context& ctx) {
    const json& cfg = ctx.cfg;
    const json& r = cfg["refined"];
    const json& gr = cfg["grid"];
    DetectorConfig dc;
    dc.curve = CurveSpec::parse(cfg["curve"]);
    dc.L = gr["L"];
    dc.n = gr["n_points"];
    dc.T = gr["T0"];
    dc.n_times = gr["n_times"];
    dc.band = r["band"];
    dc.n_random = r["n_random"];
    dc.n_concentrated = r["n_concentrated"];
    dc.packet_width = r["packet_width"];
    dc.scales = {r["scales"][0].get<int>(), r["scales"][1].get<int>()};
    dc.theta = r["theta"];
    dc.seed = cfg["seed"];
    auto st = run_detector_study(dc);

    Csv c({"kind", "index", "functional_value", "constant_estimate", "extension_l6", "l2", "cell_j", "cell_k"});
    auto add = [&](const char* kind, const std::vector<RefinedReport>& v) {
        for (std::size_t i = 0; i < v.size(); ++i)
            c.row({kind, std::to_string(i), num(v[i].functional_value), num(v[i].constant_estimate),
                   num(v[i].extension_l6), num(v[i].l2), std::to_string(v[i].best_cell.j),
                   std::to_string(v[i].best_cell.k)});
    };
    add("random", st.random);
    add("concentrated", st.concentrated);
    json body = {{"command", "refined"},
                 {"curve", dc.curve.encode()},
                 {"fitted_constant", st.fitted_constant},
                 {"median_random", st.median_random},
                 {"min_concentrated_over_median", st.min_concentrated_over_median},
                 {"covered", st.covered}};
    return {json_artifact("refined.json", ctx, body), {"detector.csv", c.str(ctx)}};
}

std::vector<Artifact> cmd_extremize(const Context& ctx) {
    const json& cfg = ctx.cfg;
    const json& e = cfg["extremize"];
    auto curve = CurveSpec::parse(cfg["curve"]);
    Grid1D g = grid_of(cfg);
    AscentConfig ac{cfg["grid"]["T0"], cfg["grid"]["n_times"], e["mask_level"]};
    const double a = e["width"], eps = e["perturbation"];
    cvec s(g.n);
    for (int j = 0; j < g.n; ++j) {
        double x = g.x(j);
        s[j] = std::exp(-x * x / (2 * a * a)) * (1.0 + eps * std::exp(-(x - a) * (x - a) / (a * a)));
    }
    auto f0 = apply_band_mask(curve, SampledFunction::from_space(g, s), ac);
    f0 = f0.scaled(1.0 / l2_norm(f0));
    auto st = search_extremizer(curve, f0, e["max_iter"], e["tol"], ac);

    Csv trace({"iteration", "quotient"});
    for (std::size_t i = 0; i < st.trace.size(); ++i) trace.row({std::to_string(i), num(st.trace[i])});
    json body = {{"command", "extremize"},
                 {"curve", curve.encode()},
                 {"quotient", st.quotient},
                 {"iterations", st.iteration},
                 {"converged", st.converged},
                 {"mask_limit", band_mask_limit(curve, ac)},
                 {"l2_norm", l2_norm(st.f)}};
    if (curve.kind == CurveKind::Schrod) {
        double oracle = gaussian_schrodinger_quotient(1.0, curve.c, ac.T);
        body["gaussian_oracle"] = oracle;
        body["relative_to_oracle"] = st.quotient / oracle - 1.0;
    }
    return {json_artifact("extremize.json", ctx, body), {"trace.csv", trace.str(ctx)},
            {"profile.csv", function_csv(st.f, ctx)}};
}

std::vector<Artifact> cmd_threshold(const Context& ctx) {
    const json& cfg = ctx.cfg;
    const json& t = cfg["threshold"];
    auto curve = CurveSpec::parse(cfg["curve"]);
    ThresholdConfig tc;
    tc.L = cfg["grid"]["L"];
    tc.n = cfg["grid"]["n_points"];
    tc.ascent = {cfg["grid"]["T0"], cfg["grid"]["n_times"], t["mask_level"]};
    tc.window = {t["S"], t["window_n_times"]};
    tc.gaussian_width = t["width"];
    tc.max_iter = t["max_iter"];
    tc.tol = t["tol"];
    tc.tolerance = t["tolerance"];
    tc.restarts = t["restarts"];
    tc.seed = cfg["seed"];
    auto r = threshold_report(curve, tc);
    json body = {{"command", "threshold"},
                 {"curve", curve.encode()},
                 {"factor", r.factor},
                 {"threshold", r.threshold},
                 {"schrodinger_M2", r.schrodinger_M2},
                 {"schrodinger_search", r.schrodinger_search},
                 {"schrodinger_oracle", r.schrodinger_oracle},
                 {"m2_from_oracle", r.m2_from_oracle},
                 {"search_M", r.search_M},
                 {"restart_M", r.restart_M},
                 {"multimodal", r.multimodal},
                 {"two_profile_M", r.two_profile_M},
                 {"two_profile_relative_gap", r.two_profile_rel_gap},
                 {"lower_bound_M", r.lower_bound_M},
                 {"verdict", r.verdict},
                 {"notes", r.notes}};
    return {json_artifact("threshold.json", ctx, body)};
}

std::vector<Artifact> cmd_gradcheck(const Context& ctx) {
    const json& cfg = ctx.cfg;
    const json& gc = cfg["gradcheck"];
    auto curve = CurveSpec::parse(cfg["curve"]);
    Grid1D g = grid_of(cfg);
    AscentConfig ac{cfg["grid"]["T0"], cfg["grid"]["n_times"], gc["mask_level"]};
    auto f = apply_band_mask(curve, gaussian(g, gc["width"], gc["velocity"]), ac);
    auto r = gradient_check(curve, f, gc["directions"], cfg["seed"].get<std::uint64_t>(), ac);
    json body = {{"command", "gradcheck"},
                 {"curve", curve.encode()},
                 {"max_relative_error_step_1e-5", r.error_coarse},
                 {"max_relative_error_step_1e-6", r.error_fine},
                 {"pass", r.worst() < 1e-4}};
    return {json_artifact("gradcheck.json", ctx, body)};
}

} // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"norm",     "sweep",   "homogenize", "decompose", "classify",
                                                "geometry", "refined", "extremize",  "threshold", "gradcheck"};
    return names;
}

bool is_command(const std::string& name) {
    const auto& n = command_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

json default_config(const std::string& command) {
    auto it = defaults().find(command);
    if (it == defaults().end()) throw ValidationError("unknown command " + command);
    return it->second;
}

json resolve_config(const std::string& command, const json& user) {
    json cfg = default_config(command);
    if (user.is_null()) return cfg;
    check_keys(cfg, user, "");
    cfg.merge_patch(user);
    return cfg;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const json& resolved) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(resolved.dump())));
    return buf;
}

std::vector<Artifact> run_command(const std::string& command, const json& resolved) {
    Context ctx{resolved, config_hash(resolved)};
    std::vector<Artifact> out;
    try {
        if (command == "norm") out = cmd_norm(ctx);
        else if (command == "sweep") out = cmd_sweep(ctx);
        else if (command == "homogenize") out = cmd_homogenize(ctx);
        else if (command == "decompose") out = cmd_decompose(ctx);
        else if (command == "classify") out = cmd_classify(ctx);
        else if (command == "geometry") out = cmd_geometry(ctx);
        else if (command == "refined") out = cmd_refined(ctx);
        else if (command == "extremize") out = cmd_extremize(ctx);
        else if (command == "threshold") out = cmd_threshold(ctx);
        else if (command == "gradcheck") out = cmd_gradcheck(ctx);
        else throw ValidationError("unknown command " + command);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad config value: ") + e.what());
    }
    out.push_back({"config.json", resolved.dump(2) + "\n"});
    return out;
}

} // namespace strz::cli
