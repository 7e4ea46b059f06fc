// meanaction command-line front end. JSON is the canonical output; csv and
// table flatten nested objects into dotted column names.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "meanaction/meanaction.hpp"

namespace {

using namespace meanaction;
using ojson = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailed = 2;

// Invariant breaches and numerical guards map to exit 2; bad input to exit 1.
int exit_code_for(const Error& e) {
    static const std::vector<std::string> failures = {"FloorGuardTripped",     "OrderingMismatch",    "RankNotFound",
                                                      "BoundViolated",         "QuadratureNotConverged",
                                                      "IntegratorDivergence"};
    return std::find(failures.begin(), failures.end(), e.kind()) != failures.end() ? kExitFailed : kExitUsage;
}

void report_error(const std::string& kind, const std::string& message, int code) {
    ojson e;
    e["error"] = kind;
    e["message"] = message;
    e["exit_code"] = code;
    e["version"] = kVersion;
    std::cerr << e.dump() << "\n";
}

// ---------------------------------------------------------------- output

enum class Format { Json, Csv, Table };

const std::map<std::string, Format> kFormats = {{"json", Format::Json}, {"csv", Format::Csv}, {"table", Format::Table}};

ojson meta(double guard_eps, const QuadratureConfig& q) {
    ojson m;
    m["version"] = kVersion;
    m["guard_eps"] = guard_eps;
    m["tolerances"] = {{"quad_tol", q.tol}, {"nx", q.nx}, {"ny", q.ny}, {"line_order", q.line_order}};
    return m;
}

void append(ojson& rec, const ojson& extra) {
    for (const auto& [k, v] : extra.items()) rec[k] = v;
}

void flatten(const ojson& j, const std::string& prefix, std::vector<std::pair<std::string, ojson>>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else {
        out.emplace_back(prefix, j);
    }
}

std::string cell(const ojson& v, Format f) {
    if (v.is_null()) return "";
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (f == Format::Csv && s.find_first_of(",\"\n") != std::string::npos) {
            std::string q = "\"";
            for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            return q + "\"";
        }
        return s;
    }
    if (v.is_number_float() && f == Format::Table) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
        return buf;
    }
    if (v.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + cell(v[i], Format::Table);
        return s;
    }
    return v.dump();
}

/// `columns` fixes the header so that an empty list still prints one.
void emit(const std::vector<ojson>& records, Format f, bool single, const std::vector<std::string>& columns) {
    if (f == Format::Json) {
        if (single)
            std::cout << records.front().dump(2) << "\n";
        else
            std::cout << ojson(records).dump(2) << "\n";
        return;
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : records) {
        std::vector<std::pair<std::string, ojson>> flat;
        flatten(r, "", flat);
        std::map<std::string, ojson> by_key(flat.begin(), flat.end());
        std::vector<std::string> row;
        for (const auto& c : columns) row.push_back(by_key.count(c) ? cell(by_key[c], f) : "");
        rows.push_back(std::move(row));
    }
    if (f == Format::Csv) {
        for (std::size_t i = 0; i < columns.size(); ++i) std::cout << (i ? "," : "") << columns[i];
        std::cout << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << row[i];
            std::cout << "\n";
        }
        return;
    }
    if (single && !rows.empty()) {
        std::size_t w = 0;
        for (const auto& c : columns) w = std::max(w, c.size());
        for (std::size_t i = 0; i < columns.size(); ++i)
            std::cout << columns[i] << std::string(w - columns[i].size() + 2, ' ') << rows[0][i] << "\n";
        return;
    }
    std::vector<std::size_t> width(columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) {
        width[i] = columns[i].size();
        for (const auto& row : rows) width[i] = std::max(width[i], row[i].size());
    }
    auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i)
            std::cout << (i ? "  " : "") << std::string(width[i] - row[i].size(), ' ') << row[i];
        std::cout << "\n";
    };
    line(columns);
    for (const auto& row : rows) line(row);
}

std::vector<std::string> columns_of(const ojson& prototype) {
    std::vector<std::pair<std::string, ojson>> flat;
    flatten(prototype, "", flat);
    std::vector<std::string> cols;
    for (const auto& [k, v] : flat) cols.push_back(k);
    return cols;
}

void emit_one(const ojson& rec, Format f) { emit({rec}, f, true, columns_of(rec)); }

ojson point_json(const AnnulusPoint& p) { return {{"x", p.x}, {"y", p.y}}; }

// ---------------------------------------------------------------- map commands

struct MapArgs {
    std::string spec;
    std::optional<int> offset;
    std::string format = "json";
};

MapSpec load(const MapArgs& a) {
    MapSpec s = load_mapspec(a.spec);
    if (a.offset) s.ctx.offset = *a.offset;
    return s;
}

int cmd_analyze(const MapArgs& a) {
    const MapSpec s = load(a);
    const auto& ctx = s.ctx;
    const auto grid = action_grid(ctx);
    const double V = detail::omega_average(grid);
    const double F = flux(ctx);
    const auto range = action_range(grid);
    const MapInvariants inv{ctx.y_plus(), ctx.y_minus(), F, V};
    const auto cls = hypothesis_classifier(inv, s.rational);
    const auto disk = disk_collapse_stats(inv);
    // flux through a second radial arc; the two must agree
    const double F_pi = ctx.y_plus() + ctx.y_minus() - line_integral(ctx, {-1.0, M_PI}, {1.0, M_PI});
    const double arc_diff = std::abs(F - F_pi), arc_tol = 10.0 * ctx.quad.tol * (1.0 + std::abs(F));

    ojson r;
    r["name"] = s.name;
    r["map_kind"] = ctx.map.kind_name();
    r["admissible"] = ctx.map.admissible();
    r["offset"] = ctx.offset;
    r["y_plus"] = inv.y_plus;
    r["y_minus"] = inv.y_minus;
    r["flux"] = F;
    r["calabi"] = V;
    r["f_boundary"] = {{"plus", action_function(ctx, {1.0, 0.0})}, {"minus", action_function(ctx, {-1.0, 0.0})}};
    r["f_range"] = {{"min", range.min}, {"max", range.max}};
    r["hypothesis_main_theorem"] = cls.hypothesis_holds;
    r["hypothesis_reason"] = cls.hypothesis_reason;
    r["disk_collapse"] = {{"f_kappa_origin", disk.f_kappa_origin},
                          {"calabi_kappa", disk.calabi_kappa},
                          {"criterion_half_flux_le_calabi", disk.criterion_12fv},
                          {"classification", disk.classification},
                          {"swapped", disk.swapped}};
    r["checks"] = {{"flux_arc_independence", {{"diff", arc_diff}, {"tol", arc_tol}, {"pass", arc_diff <= arc_tol}}}};
    append(r, meta(ech::kDefaultGuardEps, ctx.quad));
    emit_one(r, kFormats.at(a.format));
    return arc_diff <= arc_tol ? kExitOk : kExitFailed;
}

struct OrbitArgs {
    MapArgs map{{}, {}, "csv"};
    int q_max = 1;
    std::vector<int> seeds{64, 64};
    std::vector<int> winding;
    double newton_tol = 1e-10;
    double dedupe_tol = 1e-6;
};

/// max over the orbit of |ψ(γᵢ) − γᵢ₊₁|, closing with the 2πk translate.
double reverify(const LiftedMap& map, const OrbitRecord& o) {
    double worst = 0.0;
    const int n = static_cast<int>(o.points.size());
    for (int i = 0; i < n; ++i) {
        const AnnulusPoint img = evaluate_lift(map, o.points[i]);
        AnnulusPoint next = o.points[(i + 1) % n];
        double dy = img.y - next.y;
        dy -= kTwoPi * std::round(dy / kTwoPi);
        worst = std::max({worst, std::abs(img.x - next.x), std::abs(dy)});
    }
    // the lifted total turn must equal k
    AnnulusPoint p = o.points.front();
    for (int i = 0; i < n; ++i) p = evaluate_lift(map, p);
    const double turns = (p.y - o.points.front().y) / kTwoPi;
    return std::max(worst, std::abs(turns - o.winding) * kTwoPi);
}

int cmd_orbits(const OrbitArgs& a) {
    const MapSpec s = load(a.map);
    SearchConfig cfg;
    cfg.q_max = a.q_max;
    cfg.seed_nx = a.seeds[0];
    cfg.seed_ny = a.seeds[1];
    if (!a.winding.empty()) cfg.winding_range = std::pair{a.winding[0], a.winding[1]};
    cfg.newton.tol = a.newton_tol;
    cfg.dedupe_tol = a.dedupe_tol;
    const auto found = find_periodic_orbits(s.ctx, cfg);

    const ojson m = meta(ech::kDefaultGuardEps, s.ctx.quad);
    auto row = [&](const OrbitRecord& o, double recheck) {
        const AnnulusPoint p = detail::minimal_point(o);
        ojson r;
        r["period"] = o.period;
        r["winding"] = o.winding;
        r["x0"] = p.x;
        r["y0"] = p.y;
        r["total_action"] = o.total_action;
        r["mean_action"] = o.mean_action;
        r["residual"] = o.residual;
        r["family_suspected"] = o.family_suspected;
        r["reverified_residual"] = recheck;
        r["newton_tol"] = cfg.newton.tol;
        append(r, m);
        return r;
    };
    std::vector<ojson> rows;
    bool ok = true;
    for (const auto& o : found.orbits) {
        const double recheck = reverify(s.ctx.map, o);
        ok = ok && recheck <= 10.0 * cfg.newton.tol;
        rows.push_back(row(o, recheck));
    }
    const Format f = kFormats.at(a.map.format);
    if (f == Format::Json) {
        ojson doc;
        doc["orbits"] = rows;
        doc["seeds_tried"] = found.seeds_tried;
        doc["seeds_converged"] = found.seeds_converged;
        doc["seeds_failed"] = found.seeds_failed;
        doc["family_members_dropped"] = found.family_members_dropped;
        doc["note"] = "orbits found by a seeded search; the list need not be complete";
        append(doc, m);
        std::cout << doc.dump(2) << "\n";
    } else {
        emit(rows, f, false, columns_of(row(OrbitRecord{{{0.0, 0.0}}}, 0.0)));
    }
    return ok ? kExitOk : kExitFailed;
}

struct ContactArgs {
    MapArgs map;
    int points = 100;
    std::uint64_t seed = 1;
};

int cmd_contact(const ContactArgs& a) {
    const MapSpec s = load(a.map);
    const auto eta = build_eta(s.ctx);
    const MappingTorusForm form{s.ctx, eta.eta, eta.f_min, eta.f_max};

    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> ux(-1.0 + 1e-3, 1.0 - 1e-3), uy(0.0, kTwoPi), ut(0.0, 1.0);
    std::vector<AnnulusPoint> pts;
    std::vector<std::pair<double, AnnulusPoint>> samples;
    for (int i = 0; i < a.points; ++i) {
        const AnnulusPoint p{ux(rng), uy(rng)};
        pts.push_back(p);
        samples.push_back({ut(rng), p});
    }
    const auto contact = verify_contact(form);
    const double ret = verify_return_time(form, pts);
    const auto vol = verify_volume(form);
    const auto dl = verify_d_lambda(form, samples);
    const double glue = verify_gluing(form, pts);

    constexpr double kPointTol = 1e-8, kVolumeTol = 1e-6;
    const bool ok_contact = contact.min_wedge_coeff > 0.0, ok_ret = ret <= kPointTol, ok_vol = vol.diff <= kVolumeTol;
    const bool ok_dl = dl.max_theta_terms <= kPointTol && dl.max_omega_defect <= kPointTol, ok_glue = glue <= kPointTol;

    ojson r;
    r["name"] = s.name;
    r["offset"] = s.ctx.offset;
    r["f_min"] = eta.f_min;
    r["f_max"] = eta.f_max;
    r["eta"] = {{"dip", eta.eta.dip()},
                {"lower_bound", eta.lower_bound},
                {"lower_margin", eta.lower_margin},
                {"upper_margin", eta.upper_margin},
                {"eta_at_one", eta.eta_at_one}};
    r["contact"] = {{"min_wedge_coeff", contact.min_wedge_coeff},
                    {"theta_at_min", contact.theta_at_min},
                    {"point_at_min", point_json(contact.point_at_min)},
                    {"pass", ok_contact}};
    r["return_time"] = {{"max_dev", ret}, {"tol", kPointTol}, {"points", a.points}, {"pass", ok_ret}};
    r["volume"] = {{"volume", vol.volume},
                   {"two_calabi_plus_offset", vol.two_calabi},
                   {"diff", vol.diff},
                   {"tol", kVolumeTol},
                   {"pass", ok_vol}};
    r["d_lambda"] = {{"max_theta_terms", dl.max_theta_terms},
                     {"max_omega_defect", dl.max_omega_defect},
                     {"tol", kPointTol},
                     {"pass", ok_dl}};
    r["gluing"] = {{"max_dev", glue}, {"tol", kPointTol}, {"pass", ok_glue}};
    try {
        const auto rot = binding_rotation_numbers(s.ctx.y_plus(), s.ctx.y_minus(), flux(s.ctx));
        r["binding"] = {{"p_tilde", rot.p_tilde},
                        {"rot_page", {rot.rot_page.first, rot.rot_page.second}},
                        {"rot_seifert", {rot.rot_seifert.first, rot.rot_seifert.second}},
                        {"rot_e", {rot.rot_e.first, rot.rot_e.second}}};
    } catch (const Error& e) {
        r["binding"] = {{"skipped", e.kind()}};
    }
    const bool all = ok_contact && ok_ret && ok_vol && ok_dl && ok_glue;
    r["all_pass"] = all;
    r["seed"] = a.seed;
    append(r, meta(ech::kDefaultGuardEps, s.ctx.quad));
    emit_one(r, kFormats.at(a.map.format));
    return all ? kExitOk : kExitFailed;
}

struct BoundArgs {
    MapArgs map;
    int N = 0;
    std::optional<int> N_max;
};

int cmd_bound(const BoundArgs& a) {
    const MapSpec s = load(a.map);
    const auto inv = map_invariants(s.ctx);
    const ojson m = meta(ech::kDefaultGuardEps, s.ctx.quad);
    std::vector<ojson> rows;
    const int last = a.N_max.value_or(a.N);
    if (last < a.N) throw DomainError("--N-max must be at least --N");
    for (int N = a.N; N <= last; ++N) {
        const auto b = penultimate_bound(inv, N);
        ojson r;
        r["N"] = N;
        r["y_plus"] = inv.y_plus;
        r["y_minus"] = inv.y_minus;
        r["flux"] = inv.F;
        r["calabi"] = inv.calabi;
        r["hm"] = b.hm;
        r["bound"] = b.bound;
        r["calabi_plus_N"] = inv.calabi + N;
        r["gap"] = b.gap;
        r["gap_limit"] = b.gap_limit;
        append(r, m);
        rows.push_back(std::move(r));
    }
    const Format f = kFormats.at(a.map.format);
    emit(rows, f, rows.size() == 1, columns_of(rows.front()));
    return kExitOk;
}

int cmd_classify(const MapArgs& a) {
    const MapSpec s = load(a);
    const auto inv = map_invariants(s.ctx);
    const auto c = hypothesis_classifier(inv, s.rational);
    const auto d = disk_collapse_stats(inv);
    ojson r;
    r["name"] = s.name;
    r["y_plus"] = inv.y_plus;
    r["y_minus"] = inv.y_minus;
    r["flux"] = inv.F;
    r["calabi"] = inv.calabi;
    r["case"] = c.label;
    r["m"] = c.m;
    r["M"] = c.M;
    r["hm"] = c.hm;
    r["y_m_is_plus"] = c.y_m_is_plus;
    r["y_m_rational"] = c.y_m_rational;
    r["hypothesis_holds"] = c.hypothesis_holds;
    r["hypothesis_reason"] = c.hypothesis_reason;
    r["confidence"] = c.confidence;
    r["disk_collapse"] = {{"f_kappa_origin", d.f_kappa_origin},
                          {"calabi_kappa", d.calabi_kappa},
                          {"criterion_half_flux_le_calabi", d.criterion_12fv},
                          {"classification", d.classification},
                          {"swapped", d.swapped}};
    append(r, meta(ech::kDefaultGuardEps, s.ctx.quad));
    emit_one(r, kFormats.at(a.format));
    return kExitOk;
}

// ---------------------------------------------------------------- ech

struct SlopeArgs {
    std::optional<double> a, b;
    std::optional<long> p;
    double guard_eps = ech::kDefaultGuardEps;
    std::string precision = "double";
    std::string format = "json";
};

/// Missing values are completed from p = a + b; with nothing given the
/// slopes default to a = 1 + e/30, p = 3.
template <class Real>
ech::SlopeData<Real> slopes_from(const SlopeArgs& s) {
    const Real e = std::exp(Real(1));
    std::int64_t p = s.p ? *s.p : 0;
    Real a, b;
    if (!s.a && !s.b) {
        if (!s.p) p = 3;
        a = p == 3 ? 1 + e / 30 : Real(p) / 2 + e / 30;
        b = Real(p) - a;
    } else if (s.a && s.b) {
        a = static_cast<Real>(*s.a);
        b = static_cast<Real>(*s.b);
        if (!s.p) p = std::llround(static_cast<double>(a + b));
    } else {
        if (!s.p) throw DomainError("give --p together with only one of --a, --b");
        a = s.a ? static_cast<Real>(*s.a) : Real(p) - static_cast<Real>(*s.b);
        b = s.b ? static_cast<Real>(*s.b) : Real(p) - a;
    }
    return ech::make_slopes<Real>(a, b, p, static_cast<Real>(s.guard_eps));
}

template <class Real>
ojson slope_meta(const ech::SlopeData<Real>& s, const SlopeArgs& args) {
    ojson m;
    m["a"] = static_cast<double>(s.a);
    m["b"] = static_cast<double>(s.b);
    m["p"] = s.p;
    m["precision"] = args.precision;
    append(m, meta(static_cast<double>(s.guard_eps), QuadratureConfig{}));
    return m;
}

template <class Real>
ojson generator_json(const ech::SlopeData<Real>& s, const ech::Generator& g) {
    const auto k = ech::knot_filtrations(s, g);
    return {{"m_plus", g.m_plus},
            {"m_minus", g.m_minus},
            {"d", g.d},
            {"width", static_cast<double>(k.sum)},
            {"f_plus", static_cast<double>(k.f_plus)},
            {"f_minus", static_cast<double>(k.f_minus)}};
}

struct EchIndexArgs {
    SlopeArgs slopes;
    long m_plus = 0, m_minus = 0;
};

template <class Real>
int ech_index_cmd(const EchIndexArgs& args) {
    const auto s = slopes_from<Real>(args.slopes);
    const auto g = ech::make_generator(args.m_plus, args.m_minus, s.p);
    const auto idx = ech::ech_index(s, g);
    const auto oracle = ech::ech_index_oracle(s, g);
    ojson r = generator_json(s, g);
    r["index"] = idx;
    r["oracle_index"] = oracle;
    r["agree"] = idx == oracle;
    r["q_term"] = -s.p * g.d * g.d;
    r["cz_sum_plus"] = ech::detail::cz_sum(g.m_plus, s.a, s.guard_eps);
    r["cz_sum_minus"] = ech::detail::cz_sum(g.m_minus, s.b, s.guard_eps);
    append(r, slope_meta(s, args.slopes));
    emit_one(r, kFormats.at(args.slopes.format));
    return idx == oracle ? kExitOk : kExitFailed;
}

struct EchListArgs {
    SlopeArgs slopes;
    long n = 0;
    std::string of = "reciprocals";
};

template <class Real>
int ech_order_cmd(const EchListArgs& args) {
    const auto s = slopes_from<Real>(args.slopes);
    const auto gens = ech::generators_by_index(s, args.n);
    const ojson m = slope_meta(s, args.slopes);
    std::vector<ojson> rows;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        ojson r;
        r["rank"] = i;
        r["index"] = 2 * static_cast<std::int64_t>(i);
        append(r, generator_json(s, gens[i]));
        append(r, m);
        rows.push_back(std::move(r));
    }
    emit(rows, kFormats.at(args.slopes.format), false, columns_of(rows.front()));
    return kExitOk;
}

template <class Real>
int ech_wk_cmd(const EchListArgs& args) {
    const auto s = slopes_from<Real>(args.slopes);
    const auto w = ech::w_sequence(s, args.n);
    const auto gens = ech::generators_by_index(s, 2 * args.n);
    const ojson m = slope_meta(s, args.slopes);
    std::vector<ojson> rows;
    for (std::size_t k = 0; k < w.size(); ++k) {
        ojson r;
        r["k"] = k;
        r["w"] = w[k];
        r["width"] = static_cast<double>(ech::width(s, gens[k]));
        append(r, m);
        rows.push_back(std::move(r));
    }
    emit(rows, kFormats.at(args.slopes.format), false, columns_of(rows.front()));
    return kExitOk;
}

template <class Real>
int ech_nseq_cmd(const EchListArgs& args) {
    const auto s = slopes_from<Real>(args.slopes);
    if (args.n < 1) throw DomainError("--count must be at least 1");
    const bool recip = args.of == "reciprocals";
    const Real alpha = recip ? 1 / s.a : s.a, beta = recip ? 1 / s.b : s.b;
    const auto seq = ech::n_sequence_entries(alpha, beta, static_cast<std::size_t>(args.n));
    ojson m = slope_meta(s, args.slopes);
    m["alpha"] = static_cast<double>(alpha);
    m["beta"] = static_cast<double>(beta);
    std::vector<ojson> rows;
    for (std::size_t k = 0; k < seq.size(); ++k) {
        ojson r;
        r["rank"] = k;
        r["value"] = static_cast<double>(seq[k].value);
        r["i"] = seq[k].i;
        r["j"] = seq[k].j;
        append(r, m);
        rows.push_back(std::move(r));
    }
    emit(rows, kFormats.at(args.slopes.format), false, columns_of(rows.front()));
    return kExitOk;
}

template <class Real>
int ech_nk_cmd(const EchListArgs& args) {
    const auto s = slopes_from<Real>(args.slopes);
    const auto rep = ech::nk_lower_bound_check(s, args.n, false);
    ojson r;
    r["k_max"] = args.n;
    r["c0"] = static_cast<double>(rep.c0);
    r["c1"] = static_cast<double>(rep.c1);
    r["c2"] = static_cast<double>(rep.c2);
    r["c0_empirical"] = static_cast<double>(rep.c0_empirical);
    std::int64_t failures = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& row : rep.rows) {
        if (!row.nk_ok) ++failures;
        worst = std::min(worst, static_cast<double>(row.N * row.N - row.nk_rhs));
    }
    r["min_slack"] = worst;
    r["violations"] = failures;
    r["all_pass"] = rep.all_pass;
    append(r, slope_meta(s, args.slopes));
    emit_one(r, kFormats.at(args.slopes.format));
    return rep.all_pass ? kExitOk : kExitFailed;
}

template <template <class> class Cmd, class Args>
int by_precision(const Args& args, const std::string& precision) {
    return precision == "long" ? Cmd<long double>::run(args) : Cmd<double>::run(args);
}

#define MEANACTION_PRECISION_CMD(Name, Fn, Args)                                                                    \
    template <class Real>                                                                                           \
    struct Name {                                                                                                   \
        static int run(const Args& a) { return Fn<Real>(a); }                                                       \
    }
MEANACTION_PRECISION_CMD(EchIndex, ech_index_cmd, EchIndexArgs);
MEANACTION_PRECISION_CMD(EchOrder, ech_order_cmd, EchListArgs);
MEANACTION_PRECISION_CMD(EchWk, ech_wk_cmd, EchListArgs);
MEANACTION_PRECISION_CMD(EchNseq, ech_nseq_cmd, EchListArgs);
MEANACTION_PRECISION_CMD(EchNk, ech_nk_cmd, EchListArgs);
#undef MEANACTION_PRECISION_CMD

// ---------------------------------------------------------------- verify-suite

struct SuiteArgs {
    bool quick = false;
    std::uint64_t seed = 1;
    std::string format = "table";
};

struct Check {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double tol = 0.0;
    std::string detail;
};

Check near(const std::string& name, double got, double want, double tol) {
    return {name, std::abs(got - want) <= tol, std::abs(got - want), tol, "value " + std::to_string(got)};
}

std::vector<Check> run_suite(const SuiteArgs& a) {
    std::vector<Check> out;
    auto guarded = [&](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            out.push_back({name, false, 0.0, 0.0, std::string("threw: ") + e.what()});
        }
    };
    QuadratureConfig q;
    q.nx = 256;
    q.ny = a.quick ? 8 : 32;

    guarded("twist_invariants", [&] {
        ActionContext ctx{twist(Profile::polynomial({0.0, 0.5})), 0, q};
        out.push_back(near("twist.flux", flux(ctx), 0.0, 1e-8));
        out.push_back(near("twist.f_center", action_function(ctx, {0.0, 1.0}), 0.25, 1e-8));
        out.push_back(near("twist.calabi", calabi(ctx), 1.0 / 3.0, 1e-7));
    });
    guarded("rotation", [&] {
        ActionContext half{rigid(0.5), 0, q};
        out.push_back(near("rigid_half.flux", flux(half), 1.0, 1e-9));
        out.push_back(near("rigid_half.calabi", calabi(half), 0.5, 1e-9));
        SearchConfig cfg;
        cfg.q_max = 2;
        cfg.seed_nx = cfg.seed_ny = a.quick ? 6 : 16;
        const auto found = find_periodic_orbits(half, cfg);
        const bool ok = !found.orbits.empty() && std::all_of(found.orbits.begin(), found.orbits.end(), [](const auto& o) {
            return o.period == 2 && std::abs(o.mean_action - 0.5) <= 1e-9;
        });
        out.push_back({"rigid_half.period2_orbits", ok, static_cast<double>(found.orbits.size()), 0.0,
                       "orbits found, all period 2 with mean action 1/2"});
        cfg.q_max = a.quick ? 6 : 12;
        const auto none = find_periodic_orbits(ActionContext{rigid(1.0 / std::sqrt(2.0)), 0, q}, cfg);
        out.push_back({"rigid_irrational.no_orbits", none.orbits.empty(), static_cast<double>(none.orbits.size()), 0.0,
                       "q_max " + std::to_string(cfg.q_max)});
    });
    const double e = std::exp(1.0);
    const auto example = ech::make_slopes(1.0 + e / 30.0, 2.0 - e / 30.0, 3);
    std::vector<ech::SlopeData<double>> fixtures{example, ech::make_slopes(std::sqrt(2.0) - 1.0, 2.0 - std::sqrt(2.0), 1),
                                                 ech::make_slopes(M_PI / 3.0, 2.0 - M_PI / 3.0, 2)};
    guarded("ech_w_regression", [&] {
        const std::vector<std::int64_t> want{0, 4, 5, 12, 13, 14, 15, 25, 26, 27, 28, 30};
        const auto w = ech::w_sequence(example, 11);
        out.push_back({"ech.w_0_11", w == want, 0.0, 0.0, "slopes a = 1 + e/30, p = 3"});
    });
    guarded("ech_oracle", [&] {
        const std::int64_t top = a.quick ? 100 : 400;
        for (const auto& s : fixtures) {
            const auto gens = ech::generators_by_index(s, top);
            std::int64_t bad = 0;
            for (std::size_t i = 0; i < gens.size(); ++i)
                if (ech::ech_index_oracle(s, gens[i]) != 2 * static_cast<std::int64_t>(i)) ++bad;
            out.push_back({"ech.oracle_p" + std::to_string(s.p), bad == 0, static_cast<double>(bad), 0.0,
                           "mismatches up to index " + std::to_string(top)});
        }
    });
    guarded("ech_filtration", [&] {
        const std::int64_t kmax = a.quick ? 200 : 2000;
        for (const auto& s : fixtures) {
            const auto w = ech::w_sequence(s, kmax);
            const auto gens = ech::generators_by_index(s, 2 * kmax);
            bool ok = true;
            for (std::int64_t k = 1; k <= kmax; ++k)
                ok = ok && w[k] > w[k - 1] && w[k] >= k && ech::width(s, gens[k]) > ech::width(s, gens[k - 1]) &&
                     (s.p != 1 || w[k] == k);
            out.push_back({"ech.filtration_p" + std::to_string(s.p), ok, 0.0, 0.0, "k <= " + std::to_string(kmax)});
        }
    });
    guarded("ech_nk", [&] {
        const std::int64_t kmax = a.quick ? 500 : 5000;
        for (const auto& s : fixtures) {
            const auto rep = ech::nk_lower_bound_check(s, kmax, false);
            out.push_back({"ech.nk_bound_p" + std::to_string(s.p), rep.all_pass, rep.c1, 0.0,
                           "c1 shown; k <= " + std::to_string(kmax)});
        }
    });
    guarded("disk_family", [&] {
        std::mt19937_64 rng(a.seed);
        std::uniform_real_distribution<double> uc(0.2, 2.0);
        std::uniform_int_distribution<int> un(0, 5);
        const int n_cases = a.quick ? 3 : 20;
        double worst = 0.0;
        for (int i = 0; i < n_cases; ++i) {
            const double c = uc(rng);
            const int n = un(rng);
            std::vector<double> coeffs(n + 1, 0.0);
            coeffs[n] = c;
            const auto closed = appendix_family_report(c, n);
            ActionContext ctx{twist(Profile::polynomial(coeffs)), 0, q};
            worst = std::max({worst, std::abs(flux(ctx) - closed.F), std::abs(calabi(ctx) - closed.calabi)});
        }
        out.push_back({"disk.closed_forms", worst <= 1e-7, worst, 1e-7, std::to_string(n_cases) + " monomials"});
        const auto rot = disk_collapse_stats(map_invariants(ActionContext{rigid(0.3), 0, q}));
        const double gap = std::abs(rot.used.F / 2.0 - rot.used.calabi);
        out.push_back({"disk.rigid_equality", gap <= 1e-12 && rot.criterion_12fv, gap, 1e-12,
                       "F/2 = calabi for a rigid rotation"});
    });
    guarded("contact", [&] {
        QuadratureConfig cq = q;
        cq.nx = 64;
        cq.ny = 8;
        ActionContext ctx{rigid(0.3), 0, cq};
        const auto form = make_form(ctx);
        std::vector<AnnulusPoint> pts;
        std::mt19937_64 rng(a.seed);
        std::uniform_real_distribution<double> ux(-0.999, 0.999), uy(0.0, kTwoPi);
        for (int i = 0; i < (a.quick ? 20 : 100); ++i) pts.push_back({ux(rng), uy(rng)});
        const auto c = verify_contact(form, 16, 9, 4);
        out.push_back({"contact.rigid.min_wedge", c.min_wedge_coeff > 0.0, c.min_wedge_coeff, 0.0, "must be positive"});
        const double ret = verify_return_time(form, pts);
        out.push_back({"contact.rigid.return_time", ret <= 1e-8, ret, 1e-8, ""});
        const auto v = verify_volume(form, 32, 8, 4);
        out.push_back({"contact.rigid.volume", v.diff <= 1e-6, v.diff, 1e-6, ""});
    });
    return out;
}

int cmd_suite(const SuiteArgs& a) {
    const auto checks = run_suite(a);
    const ojson m = meta(ech::kDefaultGuardEps, QuadratureConfig{});
    std::vector<ojson> rows;
    bool all = true;
    for (const auto& c : checks) {
        ojson r;
        r["check"] = c.name;
        r["pass"] = c.pass;
        r["value"] = c.value;
        r["tol"] = c.tol;
        r["detail"] = c.detail;
        append(r, m);
        rows.push_back(std::move(r));
        all = all && c.pass;
    }
    const Format f = kFormats.at(a.format);
    if (f == Format::Table) {
        for (const auto& c : checks) std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  " << c.detail << "\n";
        std::cout << (all ? "all checks passed" : "some checks failed") << " (" << checks.size() << " checks, version "
                  << kVersion << ", guard_eps " << ech::kDefaultGuardEps << ")\n";
    } else {
        emit(rows, f, false, columns_of(rows.front()));
    }
    return all ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------- wiring

void add_format(CLI::App* sub, std::string& target) {
    sub->add_option("--format", target, "output format")->check(CLI::IsMember({"json", "csv", "table"}));
}

void add_map(CLI::App* sub, MapArgs& m) {
    sub->add_option("spec", m.spec, "map-spec JSON file")->required()->check(CLI::ExistingFile);
    add_format(sub, m.format);
}

void add_slopes(CLI::App* sub, SlopeArgs& s) {
    sub->add_option("--a", s.a, "slope a = y_plus (default 1 + e/30)");
    sub->add_option("--b", s.b, "slope b = -y_minus + F (default p - a)");
    sub->add_option("--p", s.p, "integer p = a + b (default 3)")->check(CLI::PositiveNumber);
    sub->add_option("--guard-eps", s.guard_eps, "floor guard distance")->check(CLI::PositiveNumber);
    sub->add_option("--precision", s.precision, "double or long")->check(CLI::IsMember({"double", "long"}));
    add_format(sub, s.format);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"meanaction: annulus-map invariants and lens-space ECH lattice tools"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    std::function<int()> action;

    MapArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "flux, action range, Calabi invariant and hypothesis of a map");
    add_map(analyze, analyze_args);
    analyze->add_option("--offset", analyze_args.offset, "override the lift offset N");
    analyze->callback([&] { action = [&] { return cmd_analyze(analyze_args); }; });

    OrbitArgs orbit_args;
    auto* orbits = app.add_subcommand("orbits", "seeded Newton search for periodic orbits (CSV by default)");
    add_map(orbits, orbit_args.map);
    orbits->add_option("--qmax", orbit_args.q_max, "largest period")->required()->check(CLI::PositiveNumber);
    orbits->add_option("--seeds", orbit_args.seeds, "seed grid NX NY")->expected(2)->check(CLI::PositiveNumber);
    orbits->add_option("--winding", orbit_args.winding, "winding range KMIN KMAX per unit period")->expected(2);
    orbits->add_option("--newton-tol", orbit_args.newton_tol)->check(CLI::PositiveNumber);
    orbits->add_option("--dedupe-tol", orbit_args.dedupe_tol)->check(CLI::PositiveNumber);
    orbits->add_option("--offset", orbit_args.map.offset, "override the lift offset N");
    orbits->callback([&] { action = [&] { return cmd_orbits(orbit_args); }; });

    ContactArgs contact_args;
    auto* contact = app.add_subcommand("contact-check", "contact form, return time, volume and gluing checks");
    add_map(contact, contact_args.map);
    contact->add_option("--offset", contact_args.map.offset, "lift offset N (default from the spec)");
    contact->add_option("--points", contact_args.points, "random sample points")->check(CLI::PositiveNumber);
    contact->add_option("--seed", contact_args.seed, "sample-point seed");
    contact->callback([&] { action = [&] { return cmd_contact(contact_args); }; });

    auto* ech_cmd = app.add_subcommand("ech", "ECH lattice combinatorics for L(p, p-1)");
    ech_cmd->require_subcommand(1);
    EchIndexArgs index_args;
    auto* index = ech_cmd->add_subcommand("index", "ECH index of e+^mplus e-^mminus, formula and lattice count");
    add_slopes(index, index_args.slopes);
    index->add_option("--mplus", index_args.m_plus)->required()->check(CLI::NonNegativeNumber);
    index->add_option("--mminus", index_args.m_minus)->required()->check(CLI::NonNegativeNumber);
    index->callback([&] {
        action = [&] { return by_precision<EchIndex>(index_args, index_args.slopes.precision); };
    });
    EchListArgs order_args, wk_args, nseq_args, nk_args;
    auto* order = ech_cmd->add_subcommand("order", "generators in index order");
    add_slopes(order, order_args.slopes);
    order->add_option("--max-index", order_args.n, "largest (even) index")->required();
    order->callback([&] { action = [&] { return by_precision<EchOrder>(order_args, order_args.slopes.precision); }; });
    auto* wk = ech_cmd->add_subcommand("wk", "w(k) for k = 0..kmax");
    add_slopes(wk, wk_args.slopes);
    wk->add_option("--kmax", wk_args.n)->required()->check(CLI::NonNegativeNumber);
    wk->callback([&] { action = [&] { return by_precision<EchWk>(wk_args, wk_args.slopes.precision); }; });
    auto* nseq = ech_cmd->add_subcommand("nseq", "sorted combinations i*alpha + j*beta");
    add_slopes(nseq, nseq_args.slopes);
    nseq->add_option("--count", nseq_args.n)->required();
    nseq->add_option("--of", nseq_args.of, "reciprocals (1/a, 1/b) or slopes (a, b)")
        ->check(CLI::IsMember({"reciprocals", "slopes"}));
    nseq->callback([&] { action = [&] { return by_precision<EchNseq>(nseq_args, nseq_args.slopes.precision); }; });
    auto* nk = ech_cmd->add_subcommand("nk", "lower bound on N_w(k) for k = 0..kmax");
    add_slopes(nk, nk_args.slopes);
    nk->add_option("--kmax", nk_args.n)->required()->check(CLI::NonNegativeNumber);
    nk->callback([&] { action = [&] { return by_precision<EchNk>(nk_args, nk_args.slopes.precision); }; });

    BoundArgs bound_args;
    auto* bound = app.add_subcommand("bound", "harmonic-mean bound on the mean action");
    add_map(bound, bound_args.map);
    bound->add_option("--N", bound_args.N, "offset N in the bound")->required();
    bound->add_option("--N-max", bound_args.N_max, "emit rows N..N-max");
    bound->callback([&] { action = [&] { return cmd_bound(bound_args); }; });

    MapArgs classify_args;
    auto* classify = app.add_subcommand("classify", "proof case and disk-collapse criterion");
    add_map(classify, classify_args);
    classify->callback([&] { action = [&] { return cmd_classify(classify_args); }; });

    SuiteArgs suite_args;
    auto* suite = app.add_subcommand("verify-suite", "built-in regression checks");
    suite->add_flag("--quick", suite_args.quick, "smaller grids and ranges");
    suite->add_option("--seed", suite_args.seed, "seed of the randomized checks");
    add_format(suite, suite_args.format);
    suite->callback([&] { action = [&] { return cmd_suite(suite_args); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("UsageError", e.what(), kExitUsage);
        return kExitUsage;
    }
    try {
        return action();
    } catch (const Error& e) {
        const int code = exit_code_for(e);
        report_error(e.kind(), e.what(), code);
        return code;
    } catch (const nlohmann::json::exception& e) {
        report_error("SpecFormatError", e.what(), kExitUsage);
        return kExitUsage;
    } catch (const std::exception& e) {
        report_error("InternalError", e.what(), kExitFailed);
        return kExitFailed;
    }
}
