#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "kummer/classical.hpp"
#include "kummer/coherent.hpp"
#include "kummer/errors.hpp"
#include "kummer/quantum.hpp"
#include "kummer/tolerances.hpp"

namespace kummer::cli {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Column data with metadata, rendered as CSV (header + rows) or JSON {columns, rows, ...meta}.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json meta = nlohmann::json::object();

    std::string csv() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << num(r[i]);
            os << '\n';
        }
        return os.str();
    }
    nlohmann::json json() const {
        nlohmann::json doc = meta;
        doc["columns"] = columns;
        doc["rows"] = rows;
        return doc;
    }
};

std::string dump(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

void require_format(const Context& ctx, std::initializer_list<const char*> allowed) {
    for (const char* f : allowed)
        if (ctx.format == f) return;
    throw ValidationError("cli.format", "unsupported output format '" + ctx.format + "'");
}

void emit_table(const Context& ctx, const Table& t) {
    require_format(ctx, {"csv", "json"});
    emit(ctx, ctx.format == "csv" ? t.csv() : dump(t.json()));
}

std::pair<int, int> parse_grid(const std::string& text) {
    const auto x = text.find('x');
    try {
        if (x != std::string::npos) {
            const int a = std::stoi(text.substr(0, x)), b = std::stoi(text.substr(x + 1));
            if (a > 0 && b > 0) return {a, b};
        }
    } catch (const std::exception&) {
    }
    throw ValidationError("cli.grid", "grid must look like 64x64");
}

struct Range {
    double lo, hi;
    int n;
};

Range parse_range(const std::string& text) {
    std::stringstream ss(text);
    std::string a, b, c;
    if (std::getline(ss, a, ':') && std::getline(ss, b, ':') && std::getline(ss, c)) {
        try {
            Range r{std::stod(a), std::stod(b), std::stoi(c)};
            if (r.n >= 1 && r.lo <= r.hi) return r;
        } catch (const std::exception&) {
        }
    }
    throw ValidationError("cli.grid", "grid must look like tmin:tmax:n");
}

cplx parse_complex(const std::string& text) {
    const auto comma = text.find(',');
    try {
        if (comma == std::string::npos) return {std::stod(text), 0.0};
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ValidationError("cli.complex", "complex numbers are written re,im");
    }
}

BracketOperand parse_operand(const std::string& text) {
    if (text == "A0" || text == "I0") return BracketOperand::a0();
    if (text == "z") return BracketOperand::poly(SymbolPolynomial::monomial(0, 1));
    if (text == "zbar") return BracketOperand::poly(SymbolPolynomial::monomial(1, 0));
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        try {
            const int k = std::stoi(text.substr(0, colon)), l = std::stoi(text.substr(colon + 1));
            if (k >= 0 && l >= 0) return BracketOperand::poly(SymbolPolynomial::monomial(k, l));
        } catch (const std::exception&) {
        }
    }
    throw ValidationError("cli.operand", "operands are A0, z, zbar or k:l for zbar^k z^l");
}

nlohmann::json cjson(cplx v) { return nlohmann::json::array({v.real(), v.imag()}); }

int check_failed(const std::string& what, const nlohmann::json& extra = nlohmann::json::object()) {
    diagnostic("check.failed", what, kNumerical, extra);
    return kNumerical;
}

} // namespace

Commands::Commands(CLI::App& app) {
    add_shape(app);
    add_classical_trajectory(app);
    add_quadrature(app);
    add_spectrum(app);
    add_evolve(app);
    add_verify_relations(app);
    add_kernel_check(app);
    add_density(app);
    add_limit_bracket(app);
    add_preset(app);
    add_verify_all(app);
}

int Commands::run() {
    for (const auto& e : entries_)
        if (e.app->parsed()) return e.body();
    throw ValidationError("cli.usage", "no subcommand given");
}

void Commands::add_shape(CLI::App& app) {
    auto* sub = app.add_subcommand("shape", "Sample the reduced shape surface C = 0 over a grid in (I0, psi0)");
    sub->footer("CSV columns: i0,psi0,x,y,casimir (x + iy = sqrt(G0(i0)) e^{i psi0}, casimir = -(x^2+y^2-G0)/2)");
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    auto& grid = slot<std::string>();
    auto& i0_max = slot<double>();
    grid = "64x64";
    add_system_options(sub, sys);
    add_output_options(sub, out, "csv");
    sub->add_option("--grid", grid, "Grid size n_i0 x n_angle (default 64x64)");
    sub->add_option("--i0-max", i0_max, "Upper I0 for unbounded cones");
    add(sub, [&] {
        const Context ctx = resolve(sys, out, "csv");
        const auto [ni, na] = parse_grid(grid);
        const auto c = ctx.classical_momentum();
        const ReducedSystem rs(ctx.spec, c);
        Table t;
        t.columns = {"i0", "psi0", "x", "y", "casimir"};
        for (const auto& pt : kummer_shape_sample(ctx.spec, c, ni, na, i0_max)) {
            double psi = std::atan2(pt.y, pt.x);
            if (psi <= 0.0) psi += 2.0 * kPi;
            t.rows.push_back({pt.i0, psi, pt.x, pt.y, -0.5 * (pt.x * pt.x + pt.y * pt.y - rs.G0(pt.i0))});
        }
        t.meta["momentum"] = c;
        t.meta["cone"] = {rs.cone().a, rs.cone().bounded() ? nlohmann::json(rs.cone().b) : nlohmann::json()};
        emit_table(ctx, t);
        return kOk;
    });
}

void Commands::add_classical_trajectory(CLI::App& app) {
    auto* sub = app.add_subcommand("classical-trajectory", "Integrate the reduced equations from (I0, psi0)");
    sub->footer("CSV columns: t,i0,psi0,x,y,energy_drift,casimir_drift, then psi<k>,psi<k>_mod for k = 1..N with "
                "--angles");
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    struct Args {
        double i0 = 0.0, psi0 = 0.0, t_end = 10.0, dt = 0.1;
        bool angles = false;
        std::vector<double> psi_init;
    };
    auto& a = slot<Args>();
    add_system_options(sub, sys);
    add_output_options(sub, out, "csv");
    sub->add_option("--i0", a.i0, "Initial I0")->required();
    sub->add_option("--psi0", a.psi0, "Initial psi0 (default 0)");
    sub->add_option("--t-end", a.t_end, "Final time (default 10)")->check(CLI::PositiveNumber);
    sub->add_option("--dt", a.dt, "Sampling interval (default 0.1)")->check(CLI::PositiveNumber);
    sub->add_flag("--angles", a.angles, "Reconstruct the angles psi_1..psi_N");
    sub->add_option("--psi-init", a.psi_init, "Initial psi_1..psi_N (default 0)");
    add(sub, [&] {
        const Context ctx = resolve(sys, out, "csv");
        const auto c = ctx.classical_momentum();
        const ReducedTrajectory tr = integrate_reduced(ctx.spec, c, a.i0, a.psi0, a.t_end, a.dt);
        Table t;
        t.columns = {"t", "i0", "psi0", "x", "y", "energy_drift", "casimir_drift"};
        for (std::size_t k = 0; k < tr.t.size(); ++k)
            t.rows.push_back({tr.t[k], tr.i0[k], tr.psi0[k], tr.x[k], tr.y[k], tr.energy_drift[k], tr.casimir_drift[k]});
        const int n = ctx.spec.n_invariants();
        if (a.angles && n > 0) {
            std::vector<double> init = a.psi_init.empty() ? std::vector<double>(n, 0.0) : a.psi_init;
            if (static_cast<int>(init.size()) != n) throw ValidationError("cli.angles", "--psi-init needs N values");
            const AngleSeries as = reconstruct_angles(ctx.spec, c, tr, init);
            for (int k = 1; k <= n; ++k) {
                t.columns.push_back("psi" + std::to_string(k));
                t.columns.push_back("psi" + std::to_string(k) + "_mod");
            }
            for (std::size_t s = 0; s < t.rows.size() && s < as.t.size(); ++s)
                for (int k = 0; k < n; ++k) {
                    t.rows[s].push_back(as.psi[k][s]);
                    t.rows[s].push_back(as.psi_mod[k][s]);
                }
        }
        t.meta["energy"] = tr.energy;
        t.meta["completed"] = tr.completed;
        t.meta["status"] = tr.status;
        t.meta["momentum"] = c;
        emit_table(ctx, t);
        if (!tr.completed) {
            diagnostic("trajectory.incomplete", tr.status, kNumerical, {{"t_reached", tr.t.empty() ? 0.0 : tr.t.back()}});
            return kNumerical;
        }
        return kOk;
    });
}

void Commands::add_quadrature(CLI::App& app) {
    auto* sub = app.add_subcommand("quadrature", "I0(t) by quadrature of dI0/dt = +-sqrt(4 G0 - (E - H0)^2)");
    sub->footer("CSV columns: t,i0");
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    struct Args {
        std::optional<double> energy;
        double i0 = 0.0, psi0 = 0.0, t_end = 10.0, dt = 0.1;
        int branch = 1;
    };
    auto& a = slot<Args>();
    add_system_options(sub, sys);
    add_output_options(sub, out, "csv");
    sub->add_option("--i0", a.i0, "Initial I0")->required();
    sub->add_option("--energy", a.energy, "Energy E (default: H at (I0, psi0))");
    sub->add_option("--psi0", a.psi0, "Initial psi0 used for the default energy");
    sub->add_option("--branch", a.branch, "Initial direction +1 or -1")->check(CLI::IsMember({-1, 1}));
    sub->add_option("--t-end", a.t_end, "Final time (default 10)")->check(CLI::PositiveNumber);
    sub->add_option("--dt", a.dt, "Sampling interval (default 0.1)")->check(CLI::PositiveNumber);
    add(sub, [&] {
        const Context ctx = resolve(sys, out, "csv");
        const auto c = ctx.classical_momentum();
        const double energy = a.energy ? *a.energy : ReducedSystem(ctx.spec, c).energy(a.i0, a.psi0);
        const QuadratureTrajectory q = integrate_quadrature(ctx.spec, c, energy, a.i0, a.branch, a.t_end, a.dt);
        Table t;
        t.columns = {"t", "i0"};
        for (std::size_t k = 0; k < q.t.size(); ++k) t.rows.push_back({q.t[k], q.i0[k]});
        t.meta["energy"] = energy;
        t.meta["turning_points"] = q.turning_points;
        t.meta["period"] = q.period;
        emit_table(ctx, t);
        return kOk;
    });
}

void Commands::add_spectrum(CLI::App& app) {
    auto* sub = app.add_subcommand("spectrum", "Spectrum of a reduced tridiagonal operator");
    sub->footer("JSON: {label, dim, diag, off, eigenvalues, max_residual, orthogonality}. CSV columns: index,eigenvalue");
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    auto& op = slot<std::string>();
    op = "H";
    add_system_options(sub, sys);
    add_output_options(sub, out, "json");
    sub->add_option("--operator", op, "H, A0 or X (default H)")->check(CLI::IsMember({"H", "A0", "X"}));
    add(sub, [&] {
        const Context ctx = resolve(sys, out, "json");
        require_format(ctx, {"csv", "json"});
        const Sector s = ctx.sector();
        const TridiagonalOperator T = op == "H" ? reduced_hamiltonian(s, ctx.spec)
                                      : op == "A0" ? reduced_operators(s).A0
                                                   : reduced_operators(s).X;
        const Spectrum& sp = T.spectrum();
        if (ctx.format == "csv") {
            Table t;
            t.columns = {"index", "eigenvalue"};
            for (std::size_t k = 0; k < sp.values.size(); ++k) t.rows.push_back({double(k), sp.values[k]});
            emit(ctx, t.csv());
        } else {
            nlohmann::json doc{{"label", T.label()},       {"dim", T.dim()},
                               {"diag", T.diag()},         {"off", T.off()},
                               {"eigenvalues", sp.values}, {"max_residual", sp.max_residual},
                               {"orthogonality", sp.orthogonality}, {"finite", s.finite}};
            emit(ctx, dump(doc));
        }
        return kOk;
    });
}

void Commands::add_evolve(CLI::App& app) {
    auto* sub = app.add_subcommand("evolve", "Heisenberg evolution residuals of the reduced operators");
    sub->footer("CSV columns: t,heis1,heis2,heis3,x_identity,y_identity,nazero,h_norm_sq. Checks heis < tol and "
                "nazero < tol ||H||^2; exit 2 if a check fails");
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    auto& times = slot<std::vector<double>>();
    auto& tol = slot<double>();
    times = {0.0, 0.5, 1.0};
    tol = 1e-6;
    add_system_options(sub, sys);
    add_output_options(sub, out, "csv");
    sub->add_option("--times", times, "Times (default 0 0.5 1)");
    sub->add_option("--tol", tol, "Residual tolerance (default 1e-6)")->check(CLI::PositiveNumber);
    add(sub, [&] {
        const Context ctx = resolve(sys, out, "csv");
        const Sector s = ctx.sector();
        const TridiagonalOperator H = reduced_hamiltonian(s, ctx.spec);
        const Spectrum& sp = H.spectrum();
        const double hn = std::max(std::fabs(sp.values.front()), std::fabs(sp.values.back()));
        Table t;
        t.columns = {"t", "heis1", "heis2", "heis3", "x_identity", "y_identity", "nazero", "h_norm_sq"};
        bool pass = true;
        for (double tt : times) {
            const HeisenbergResiduals r = heisenberg_residuals(s, ctx.spec, tt);
            const double nz = nazero_residual(s, ctx.spec, tt);
            t.rows.push_back({tt, r.heis1, r.heis2, r.heis3, r.x_identity, r.y_identity, nz, hn * hn});
            pass = pass && std::max({r.heis1, r.heis2, r.heis3}) < tol && nz < tol * hn * hn;
        }
        t.meta["pass"] = pass;
        t.meta["finite"] = s.finite;
        emit_table(ctx, t);
        return pass ? kOk : check_failed("Heisenberg residuals above tolerance", {{"tol", tol}});
    });
}

void Commands::add_verify_relations(CLI::App& app) {
    auto* sub = app.add_subcommand("verify-relations", "Check the reduced algebra relations on the sector");
    sub->footer("CSV columns: name,norm,relative,pass. q-weyl presets add the q-deformed relations");
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    auto& tol = slot<double>();
    tol = tol::algebraic;
    add_system_options(sub, sys);
    add_output_options(sub, out, "json");
    sub->add_option("--tol", tol, "Relative tolerance (default 1e-12)")->check(CLI::PositiveNumber);
    add(sub, [&] {
        const Context ctx = resolve(sys, out, "json");
        require_format(ctx, {"csv", "json"});
        const Sector s = ctx.sector();
        std::vector<RelationReport> reports{verify_relations(s, ctx.spec, tol)};
        if (ctx.kind == PresetKind::QWeyl)
            reports.push_back(verify_q_relations(q_operators(ctx.spec.hbar, ctx.params.q, ctx.params.alpha, s.dim), tol));
        bool pass = true;
        nlohmann::json items = nlohmann::json::array();
        std::ostringstream csv;
        csv << "name,norm,relative,pass\n";
        for (const auto& rep : reports) {
            pass = pass && rep.pass;
            for (const auto& it : rep.items) {
                items.push_back({{"name", it.name}, {"norm", it.norm}, {"relative", it.relative}, {"pass", it.pass}});
                csv << '"' << it.name << "\"," << num(it.norm) << ',' << num(it.relative) << ',' << (it.pass ? 1 : 0)
                    << '\n';
            }
        }
        if (ctx.format == "csv") {
            emit(ctx, csv.str());
        } else {
            emit(ctx, dump({{"dim", s.dim},
                            {"block", reports.front().block},
                            {"scale", reports.front().scale},
                            {"finite", s.finite},
                            {"tol", tol},
                            {"pass", pass},
                            {"items", items}}));
        }
        return pass ? kOk : check_failed("relations above tolerance", {{"tol", tol}});
    });
}

void Commands::add_kernel_check(CLI::App& app) {
    auto* sub = app.add_subcommand("kernel-check",
                                   "Reproducing kernel: series vs hypergeometric form, eigenvector property, moments");
    sub->footer("JSON: {family, items: [{name, deviation, tolerance, pass, detail}], moments}. CSV columns: "
                "name,deviation,tolerance,pass");
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    struct Args {
        std::string family;
        int samples = 20;
        int n_max = 10;
        std::string route = "integrand";
        double tol = 1e-8;
    };
    auto& a = slot<Args>();
    add_system_options(sub, sys);
    add_output_options(sub, out, "json");
    sub->add_option("--family", a.family, "eigen or glauber (default: glauber on finite sectors, else eigen)");
    sub->add_option("--samples", a.samples, "Random sample points (default 20)")->check(CLI::PositiveNumber);
    sub->add_option("--n-max", a.n_max, "Highest moment (default 10, capped at the top level)");
    sub->add_option("--route", a.route, "Moment route: integrand or pointwise")
        ->check(CLI::IsMember({"integrand", "pointwise"}));
    sub->add_option("--tol", a.tol, "Tolerance (default 1e-8)")->check(CLI::PositiveNumber);
    add(sub, [&] {
        const Context ctx = resolve(sys, out, "json");
        require_format(ctx, {"csv", "json"});
        const Sector s = ctx.sector();
        const CoherentFamily family = a.family.empty()
                                          ? (s.finite && ctx.spec.g0.constant ? CoherentFamily::Glauber
                                                                              : CoherentFamily::Eigen)
                                          : parse_family(a.family);
        std::mt19937_64 rng(ctx.seed);
        auto disc = [&](double radius) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double r = radius * std::sqrt(u(rng));
            return std::polar(r, 2.0 * kPi * u(rng));
        };
        nlohmann::json items = nlohmann::json::array();
        bool pass = true;
        auto item = [&](const std::string& name, double dev, const std::string& detail) {
            const bool ok = std::isfinite(dev) && dev < a.tol;
            pass = pass && ok;
            items.push_back({{"name", name}, {"deviation", dev}, {"tolerance", a.tol}, {"pass", ok}, {"detail", detail}});
        };

        const ReproducingKernel K(s, ctx.spec, family);
        if (K.has_hypergeometric()) {
            // Points with |x_scale zbar w| <= 1/4, away from cancellations in the alternating series.
            const double radius = std::sqrt(0.25 / K.x_scale());
            double worst = 0.0;
            for (int k = 0; k < a.samples; ++k) {
                const cplx z = disc(radius), w = disc(radius);
                const cplx series = K(std::conj(z), w), pfq = K.hypergeometric(std::conj(z), w);
                worst = std::max(worst, std::abs(series - pfq) / std::abs(series));
            }
            item("kernel series vs hypergeometric form", worst, "");
        }
        if (family == CoherentFamily::Eigen) {
            const double radius = s.g_seq.empty() ? 1.0 : std::sqrt(s.g_seq.front());
            double worst = 0.0;
            for (int k = 0; k < a.samples; ++k)
                worst = std::max(worst, eigenvector_residual(s, coherent_state(s, ctx.spec, disc(radius))));
            item("eigenvector property", worst, "");
        }
        nlohmann::json moments;
        const bool density_known = family == CoherentFamily::Glauber || std::all_of(ctx.spec.l.begin(), ctx.spec.l.end(),
                                                                                   [](int li) { return li >= 0; });
        if (ctx.kind == PresetKind::QWeyl) {
            const QMeasureReport q = q_measure_check(ctx.spec.hbar, ctx.params.q, ctx.params.alpha, std::min(a.n_max, 8));
            item("atomic measure moments", q.max_deviation, std::to_string(q.atoms) + " atoms");
            moments = {{"deviation", q.deviation}, {"atoms", q.atoms}};
        } else if (density_known && ctx.spec.g0.constant && ctx.spec.modes() == 2 && ctx.spec.l[0] > 0) {
            const int n_max = s.finite ? std::min(a.n_max, s.L) : a.n_max;
            const MomentReport m = resolution_check(s, ctx.spec, n_max, a.route);
            item("resolution of identity moments", m.max_deviation, "route " + m.route);
            moments = {{"moments", m.moments}, {"expected", m.expected}, {"deviation", m.deviation}, {"route", m.route}};
        }
        if (ctx.format == "csv") {
            std::ostringstream os;
            os << "name,deviation,tolerance,pass\n";
            for (const auto& it : items)
                os << '"' << it["name"].get<std::string>() << "\"," << num(it["deviation"].get<double>()) << ','
                   << num(a.tol) << ',' << (it["pass"].get<bool>() ? 1 : 0) << '\n';
            emit(ctx, os.str());
        } else {
            emit(ctx, dump({{"family", family_name(family)}, {"pass", pass}, {"items", items}, {"moments", moments}}));
        }
        return pass ? kOk : check_failed("kernel checks above tolerance", {{"tol", a.tol}});
    });
}

void Commands::add_density(CLI::App& app) {
    auto* sub = app.add_subcommand("density", "Reproducing measure density rho(t), t = |z|^2, on a grid");
    sub->footer("CSV columns: t,rho");
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    auto& grid = slot<std::string>();
    auto& logspace = slot<bool>();
    grid = "0.05:10:20";
    add_system_options(sub, sys);
    add_output_options(sub, out, "csv");
    sub->add_option("--grid", grid, "tmin:tmax:n (default 0.05:10:20)");
    sub->add_flag("--log", logspace, "Logarithmic spacing");
    add(sub, [&] {
        const Context ctx = resolve(sys, out, "csv");
        const Range r = parse_range(grid);
        if (logspace && !(r.lo > 0.0)) throw ValidationError("cli.grid", "logarithmic grids need tmin > 0");
        const Sector s = ctx.sector();
        Table t;
        t.columns = {"t", "rho"};
        for (int k = 0; k < r.n; ++k) {
            const double f = r.n == 1 ? 0.0 : double(k) / (r.n - 1);
            const double tt = logspace ? r.lo * std::pow(r.hi / r.lo, f) : r.lo + (r.hi - r.lo) * f;
            t.rows.push_back({tt, measure_density(s, ctx.spec, tt)});
        }
        emit_table(ctx, t);
        return kOk;
    });
}

void Commands::add_limit_bracket(CLI::App& app) {
    auto* sub = app.add_subcommand("limit-bracket",
                                   "hbar -> 0 limit of (-i/hbar)<[F, G]> at fixed classical momentum c1");
    sub->footer("JSON: {hbars, values, estimate, order, status, target, deviation}. CSV columns: hbar,re,im. Operands: "
                "A0, z, zbar, or k:l for zbar^k z^l. Exit 2 if a known target is missed by more than --tol");
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    struct Args {
        std::string f = "A0", g = "z", z = "0.5,0.2";
        double hbar0 = 0.1, tol = 1e-3;
        int levels = 5, truncation = 400;
    };
    auto& a = slot<Args>();
    add_system_options(sub, sys);
    add_output_options(sub, out, "json");
    sub->add_option("--f", a.f, "First operand (default A0)");
    sub->add_option("--g", a.g, "Second operand (default z)");
    sub->add_option("--z", a.z, "Coherent-state label re,im (default 0.5,0.2)");
    sub->add_option("--hbar0", a.hbar0, "Largest hbar (default 0.1)")->check(CLI::PositiveNumber);
    sub->add_option("--levels", a.levels, "Number of hbar levels (default 5)")->check(CLI::Range(3, 12));
    sub->add_option("--family-truncation", a.truncation, "Truncation of infinite sectors (default 400)");
    sub->add_option("--tol", a.tol, "Tolerance against the classical bracket (default 1e-3)");
    add(sub, [&] {
        const Context ctx = resolve(sys, out, "json");
        require_format(ctx, {"csv", "json"});
        if (!ctx.kind) throw ValidationError("cli.preset", "limit-bracket needs --preset laguerre or krawtchouk");
        if (ctx.momentum.size() != 1) throw ValidationError("cli.momentum", "limit-bracket needs --c1");
        const double c1 = ctx.momentum[0];
        const cplx z = parse_complex(a.z);
        const FamilyBuilder builder = preset_family(*ctx.kind, ctx.params, c1, a.truncation);
        const LimitResult res = limit_bracket(builder, parse_operand(a.f), parse_operand(a.g), z, a.hbar0, a.levels);

        // Classical brackets of the coordinates: {I0, z} = i zeta, {z, zbar} = -i dG0/dI0.
        const ClassicalPoint cp = classical_point(ctx.spec, ctx.momentum, z);
        const double dg = ReducedSystem(ctx.spec, ctx.momentum).dG0(cp.i0);
        const cplx I(0.0, 1.0);
        std::optional<cplx> target;
        const std::string pair = a.f + "," + a.g;
        if (pair == "A0,z" || pair == "I0,z") target = I * cp.zeta;
        if (pair == "z,A0" || pair == "z,I0") target = -I * cp.zeta;
        if (pair == "A0,zbar" || pair == "I0,zbar") target = -I * std::conj(cp.zeta);
        if (pair == "zbar,A0" || pair == "zbar,I0") target = I * std::conj(cp.zeta);
        if (pair == "z,zbar") target = -I * dg;
        if (pair == "zbar,z") target = I * dg;

        nlohmann::json values = nlohmann::json::array();
        for (const auto& v : res.values) values.push_back(cjson(v));
        nlohmann::json doc{{"f", a.f},          {"g", a.g},           {"z", cjson(z)},
                           {"c1", c1},          {"hbars", res.hbars}, {"values", values},
                           {"estimate", cjson(res.estimate)},         {"order", res.order},
                           {"status", res.status}, {"classical_i0", cp.i0}};
        bool pass = res.status != "no convergence";
        if (target) {
            const double dev = std::abs(res.estimate - *target);
            doc["target"] = cjson(*target);
            doc["deviation"] = dev;
            pass = pass && dev < a.tol && (res.status == "exact" || (res.order >= 0.8 && res.order <= 1.2));
        }
        doc["pass"] = pass;
        if (ctx.format == "csv") {
            Table t;
            t.columns = {"hbar", "re", "im"};
            for (std::size_t k = 0; k < res.values.size(); ++k)
                t.rows.push_back({res.hbars[k], res.values[k].real(), res.values[k].imag()});
            emit(ctx, t.csv());
        } else {
            emit(ctx, dump(doc));
        }
        return pass ? kOk : check_failed("limit bracket did not reach the classical value", doc);
    });
}

void Commands::add_preset(CLI::App& app) {
    auto* sub = app.add_subcommand("preset", "Print the JSON system document of a preset");
    sub->footer("Output: the system document with the extra fields preset and vacuum; it is accepted by --config");
    auto& name = slot<std::string>();
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    sub->add_option("name", name, "laguerre, krawtchouk, q-weyl or three-wave")->required();
    sub->add_option("--hbar", sys.hbar, "Planck constant");
    sub->add_option("--p", sys.p, "Krawtchouk parameter p in (0, 1)");
    sub->add_option("--q", sys.q, "q-weyl deformation q in (0, 1)");
    sub->add_option("--alpha", sys.alpha, "q-weyl scale alpha > 0");
    sub->add_option("--frequencies", sys.frequencies, "three-wave frequencies w0 w1 w2")->expected(3);
    sub->add_option("--vacuum", sys.vacuum, "Vacuum occupations")->expected(1, 64);
    sub->add_option("-o,--output", out.path, "Output file (default: standard output)");
    add(sub, [&] {
        SystemOptions opts = sys;
        opts.preset = name;
        const Context ctx = resolve(opts, out, "json");
        const Sector s = ctx.sector();  // validates the vacuum
        nlohmann::json doc = spec_to_json(ctx.spec);
        doc["preset"] = preset_name(*ctx.kind);
        doc["vacuum"] = s.vacuum;
        emit(ctx, dump(doc));
        return kOk;
    });
}

void Commands::add_verify_all(CLI::App& app) {
    auto* sub = app.add_subcommand("verify-all", "Run every module check on one preset (default: all presets)");
    sub->footer("Table columns: preset, module, check, deviation, tolerance, result. JSON: list of rows");
    auto& sys = slot<SystemOptions>();
    auto& out = slot<OutputOptions>();
    add_system_options(sub, sys);
    add_output_options(sub, out, "table");
    add(sub, [&] {
        std::vector<std::string> names;
        if (!sys.preset.empty() || !sys.config.empty()) {
            const Context ctx = resolve(sys, out, "table");
            if (!ctx.kind) throw ValidationError("cli.preset", "verify-all runs on presets");
            names.push_back(preset_name(*ctx.kind));
        } else {
            names = preset_names();
        }
        std::vector<std::pair<std::string, CheckRow>> rows;
        std::string format = "table", path;
        std::uint64_t seed = 1;
        for (const auto& n : names) {
            SystemOptions opts = sys;
            if (opts.config.empty()) opts.preset = n;
            const Context ctx = resolve(opts, out, "table");
            format = ctx.format;
            path = ctx.path;
            seed = ctx.seed;
            for (auto& r : verify_all_rows(build_preset(*ctx.kind, ctx.params), seed)) rows.emplace_back(n, r);
        }
        Context sink;
        sink.format = format;
        sink.path = path;
        require_format(sink, {"table", "json", "csv"});
        bool pass = true;
        for (const auto& [n, r] : rows) pass = pass && r.pass;
        if (format == "json") {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& [n, r] : rows)
                list.push_back({{"preset", n},          {"module", r.module},       {"check", r.name},
                                {"deviation", r.deviation}, {"tolerance", r.tolerance}, {"pass", r.pass},
                                {"detail", r.detail}});
            emit(sink, dump({{"seed", seed}, {"pass", pass}, {"rows", list}}));
        } else if (format == "csv") {
            std::ostringstream os;
            os << "preset,module,check,deviation,tolerance,pass\n";
            for (const auto& [n, r] : rows)
                os << n << ',' << r.module << ",\"" << r.name << "\"," << num(r.deviation) << ',' << num(r.tolerance)
                   << ',' << (r.pass ? 1 : 0) << '\n';
            emit(sink, os.str());
        } else {
            std::ostringstream os;
            os << std::left << std::setw(11) << "preset" << std::setw(10) << "module" << std::setw(70) << "check"
               << std::setw(11) << "deviation" << std::setw(9) << "tol" << "result\n";
            for (const auto& [n, r] : rows) {
                char dev[16], tl[16];
                std::snprintf(dev, sizeof dev, "%.2e", r.deviation);
                std::snprintf(tl, sizeof tl, "%.0e", r.tolerance);
                os << std::setw(11) << n << std::setw(10) << r.module << std::setw(70) << r.name << std::setw(11) << dev
                   << std::setw(9) << tl << (r.pass ? "pass" : "FAIL");
                if (!r.detail.empty()) os << "  " << r.detail;
                os << '\n';
            }
            std::size_t failed = 0;
            for (const auto& [n, r] : rows) failed += r.pass ? 0 : 1;
            os << rows.size() - failed << "/" << rows.size() << " checks passed\n";
            emit(sink, os.str());
        }
        return pass ? kOk : check_failed("verify-all: some checks failed");
    });
}

} // namespace kummer::cli
