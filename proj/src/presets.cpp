#include "kummer/presets.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/hypergeometric_pFq.hpp>
#include <boost/math/special_functions/laguerre.hpp>

#include "kummer/classical.hpp"
#include "kummer/errors.hpp"
#include "kummer/tolerances.hpp"

namespace kummer {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd half_matrix(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return 0.5 * m;
}

void require(bool ok, const std::string& code, const std::string& message) {
    if (!ok) throw ValidationError(code, message);
}

} // namespace

PresetKind parse_preset(const std::string& name) {
    if (name == "laguerre") return PresetKind::Laguerre;
    if (name == "krawtchouk") return PresetKind::Krawtchouk;
    if (name == "q-weyl" || name == "q_weyl") return PresetKind::QWeyl;
    if (name == "three-wave" || name == "three_wave") return PresetKind::ThreeWave;
    throw ValidationError("preset.unknown", "unknown preset '" + name + "'");
}

std::string preset_name(PresetKind kind) {
    switch (kind) {
    case PresetKind::Laguerre: return "laguerre";
    case PresetKind::Krawtchouk: return "krawtchouk";
    case PresetKind::QWeyl: return "q-weyl";
    case PresetKind::ThreeWave: return "three-wave";
    }
    return "unknown";
}

std::vector<std::string> preset_names() { return {"laguerre", "krawtchouk", "q-weyl", "three-wave"}; }

std::vector<int> canonical_vacuum(PresetKind kind) {
    switch (kind) {
    case PresetKind::Laguerre: return {0, 2};
    case PresetKind::Krawtchouk: return {0, 10};
    case PresetKind::QWeyl: return {0};
    case PresetKind::ThreeWave: return {0, 4, 6};
    }
    return {};
}

SystemSpec preset_spec(PresetKind kind, const PresetParams& params) {
    require(params.hbar > 0.0 && std::isfinite(params.hbar), "preset.hbar", "hbar must be positive");
    const Expr x0 = Expr::arg(0), x1 = Expr::arg(1);
    switch (kind) {
    case PresetKind::Laguerre:
        return make_spec({1, 1}, half_matrix(1, 1, -1, 1), Expr(1.0), x0 + x1 + Expr::hbar(), params.hbar);
    case PresetKind::Krawtchouk: {
        const double p = params.p;
        require(p > 0.0 && p < 1.0, "preset.p", "krawtchouk requires p in (0, 1)");
        return make_spec({1, -1}, half_matrix(1, -1, 1, 1), Expr(std::sqrt(p * (1.0 - p))),
                         Expr(1.0 - p) * x0 + Expr(p) * x1, params.hbar);
    }
    case PresetKind::QWeyl: {
        require(params.q > 0.0 && params.q < 1.0, "preset.q", "q-weyl requires q in (0, 1)");
        require(params.alpha > 0.0 && std::isfinite(params.alpha), "preset.alpha", "q-weyl requires alpha > 0");
        const Expr lambda(std::log(params.q) / params.alpha);
        const Expr g = sqrt(exprel(lambda * (x0 + Expr::hbar())) / exprel(lambda * Expr::hbar()));
        return make_spec({1}, std::nullopt, g, Expr(0.0), params.hbar);
    }
    case PresetKind::ThreeWave: {
        require(params.frequencies.size() == 3, "preset.frequencies", "three-wave requires three frequencies");
        const auto& w = params.frequencies;
        return make_spec({1, -1, -1}, std::nullopt, Expr(1.0),
                         Expr(w[0]) * x0 + Expr(w[1]) * x1 + Expr(w[2]) * Expr::arg(2), params.hbar);
    }
    }
    throw ValidationError("preset.unknown", "unknown preset");
}

Preset build_preset(PresetKind kind, const PresetParams& params) {
    Preset preset{kind, preset_name(kind), params, preset_spec(kind, params), {}};
    const std::vector<int> vacuum = params.vacuum.empty() ? canonical_vacuum(kind) : params.vacuum;
    const int truncation = params.truncation > 0 ? params.truncation : default_truncation();
    preset.sector = build_sector(preset.spec, vacuum, truncation);
    preset.params.vacuum = vacuum;
    preset.params.truncation = truncation;
    return preset;
}

Preset build_preset(const std::string& name, const PresetParams& params) {
    return build_preset(parse_preset(name), params);
}

FamilyBuilder preset_family(PresetKind kind, const PresetParams& params, double c1, int truncation) {
    require(kind == PresetKind::Laguerre || kind == PresetKind::Krawtchouk, "preset.family",
            "hbar families are defined for laguerre and krawtchouk");
    return [kind, params, c1, truncation](double hbar) {
        PresetParams at = params;
        at.hbar = hbar;
        // Both presets have c_1 = hbar (v_0 + v_1)/2 over the vacuum (0, v_1).
        const double occupation = 2.0 * c1 / hbar;
        const long v1 = std::lround(occupation);
        require(v1 >= 0 && std::fabs(occupation - v1) < 1e-9 * std::max(1.0, occupation), "preset.family",
                "2 c1 / hbar must be a non-negative integer");
        SystemSpec spec = preset_spec(kind, at);
        Sector sector = build_sector(spec, {0, static_cast<int>(v1)}, truncation);
        return std::make_pair(spec, sector);
    };
}

namespace {

class Suite {
public:
    Suite(const Preset& preset, std::uint64_t seed) : preset_(preset), rng_(seed) { report_.preset = preset.name; }

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    cplx disc_point(double radius) {
        const double r = radius * std::sqrt(uniform(0.0, 1.0));
        return std::polar(r, uniform(0.0, 2.0 * kPi));
    }

    // Runs a check; exceptions become a failed item carrying the message.
    void run(const std::string& name, double tolerance, const std::function<double(std::string&)>& check) {
        GoldenItem item{name, 0.0, tolerance, false, ""};
        try {
            item.deviation = check(item.detail);
            item.pass = std::isfinite(item.deviation) && item.deviation < tolerance;
        } catch (const std::exception& e) {
            item.deviation = std::numeric_limits<double>::infinity();
            item.detail = e.what();
        }
        report_.pass = report_.pass && item.pass;
        report_.items.push_back(std::move(item));
    }

    GoldenReport take() { return std::move(report_); }
    const Preset& preset() const { return preset_; }

private:
    const Preset& preset_;
    std::mt19937_64 rng_;
    GoldenReport report_;
};

std::string fmt_vacuum(const std::vector<int>& v) {
    std::ostringstream os;
    os << "vacuum (";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ")";
    return os.str();
}

// Random points of the reduced space: I0 inside the cone (unbounded cones are cut at a + 10),
// psi0 uniform, x + iy = sqrt(G0) e^{i psi0}.
struct ShapePoint {
    double i0, psi0, x, y;
};

std::vector<ShapePoint> shape_points(Suite& suite, const ReducedSystem& rs, int count) {
    const double a = rs.cone().a;
    const double b = rs.cone().bounded() ? rs.cone().b : a + 10.0;
    std::vector<ShapePoint> pts;
    for (int k = 0; k < count; ++k) {
        const double i0 = a + (b - a) * suite.uniform(0.05, 0.95);
        const double psi = suite.uniform(0.0, 2.0 * kPi);
        const double r = std::sqrt(rs.G0(i0));
        pts.push_back({i0, psi, r * std::cos(psi), r * std::sin(psi)});
    }
    return pts;
}

// Closed forms over the reduced coordinates, per preset.
double bracket_xy_closed(const Preset& p, double i0) {
    switch (p.kind) {
    case PresetKind::Laguerre: return i0;
    case PresetKind::Krawtchouk: return -p.params.p * (1.0 - p.params.p) * i0;
    case PresetKind::QWeyl: return 0.5 * std::pow(p.params.q, i0 / p.params.alpha);
    case PresetKind::ThreeWave: break;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double hamiltonian_closed(const Preset& p, std::span<const double> c, double i0, double psi0) {
    switch (p.kind) {
    case PresetKind::Laguerre: return 2.0 * i0 + 2.0 * std::sqrt((i0 - c[0]) * (i0 + c[0])) * std::cos(psi0);
    case PresetKind::Krawtchouk: {
        const double pp = p.params.p, i1 = c[0];
        return (1.0 - 2.0 * pp) * i0 + i1 + 2.0 * std::sqrt(pp * (1.0 - pp) * (i1 + i0) * (i1 - i0)) * std::cos(psi0);
    }
    case PresetKind::QWeyl: {
        const double q = p.params.q, al = p.params.alpha;
        return 2.0 * std::sqrt(al / std::log(q) * (std::pow(q, i0 / al) - 1.0)) * std::cos(psi0);
    }
    case PresetKind::ThreeWave: break;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// max |[A, A*] - D|, D diagonal in n, over the interior block, relative to max(1, ||A||^2).
double commutator_deviation(const Sector& s, const std::function<double(int)>& expected) {
    const ReducedOperators ops = reduced_operators(s);
    const int m = s.interior();
    const Eigen::MatrixXd comm = ops.A * ops.Astar - ops.Astar * ops.A;
    double scale = 1.0;
    for (double g : s.g_seq) scale = std::max(scale, g);
    double dev = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) dev = std::max(dev, std::fabs(comm(i, j) - (i == j ? expected(i) : 0.0)));
    return dev / scale;
}

void algebra_items(Suite& suite) {
    const Preset& p = suite.preset();
    suite.run("relations", tol::algebraic, [&](std::string& detail) {
        const RelationReport rep = verify_relations(p.sector, p.spec);
        double worst = 0.0;
        for (const auto& it : rep.items) worst = std::max(worst, it.relative);
        detail = fmt_vacuum(p.params.vacuum) + ", block " + std::to_string(rep.block);
        return worst;
    });
    const double h = p.spec.hbar;
    if (p.kind == PresetKind::Laguerre) {
        suite.run("commutator [A,A*] = 2 hbar A0 + hbar^2", tol::algebraic, [&](std::string&) {
            return commutator_deviation(p.sector, [&](int n) { return 2.0 * h * p.sector.a0(n) + h * h; });
        });
    } else if (p.kind == PresetKind::Krawtchouk) {
        const double pq = p.params.p * (1.0 - p.params.p);
        suite.run("commutator [A,A*] = -2 hbar p(1-p) A0", tol::algebraic, [&](std::string&) {
            return commutator_deviation(p.sector, [&](int n) { return -2.0 * h * pq * p.sector.a0(n); });
        });
    } else if (p.kind == PresetKind::QWeyl) {
        suite.run("q-relations", tol::algebraic, [&](std::string&) {
            const RelationReport rep = verify_q_relations(q_operators(h, p.params.q, p.params.alpha, p.sector.dim));
            double worst = 0.0;
            for (const auto& it : rep.items) worst = std::max(worst, it.relative);
            return worst;
        });
        suite.run("G(n) = hbar [n+1]", tol::algebraic, [&](std::string&) {
            const double Q = std::pow(p.params.q, h / p.params.alpha);
            double worst = 0.0, qn = 1.0, sum = 0.0;
            for (std::size_t n = 0; n < p.sector.g_seq.size(); ++n) {
                sum += qn;  // [n+1] = 1 + Q + ... + Q^n
                qn *= Q;
                worst = std::max(worst, std::fabs(p.sector.g_seq[n] / (h * sum) - 1.0));
            }
            return worst;
        });
    }
}

void hamiltonian_items(Suite& suite) {
    const Preset& p = suite.preset();
    const double h = p.spec.hbar;
    const TridiagonalOperator H = reduced_hamiltonian(p.sector, p.spec);
    if (p.kind == PresetKind::Laguerre && p.params.vacuum[0] == 0) {
        const int v1 = p.params.vacuum[1];
        suite.run("H/hbar = Laguerre recurrence matrix", tol::algebraic, [&](std::string&) {
            double worst = 0.0;
            for (int n = 0; n < H.dim(); ++n) {
                worst = std::max(worst, std::fabs(H.diag()[n] / h - (2.0 * n + v1 + 1.0)) / (2.0 * n + v1 + 1.0));
                if (n + 1 < H.dim()) {
                    const double off = std::sqrt((n + 1.0) * (n + 1.0 + v1));
                    worst = std::max(worst, std::fabs(H.off()[n] / h - off) / off);
                }
            }
            return worst;
        });
        suite.run("eigenvectors = orthonormal Laguerre polynomials (M=200, 20 levels)", 1e-8, [&](std::string& detail) {
            const Sector s200 = build_sector(p.spec, p.params.vacuum, 200);
            const TridiagonalOperator H200 = reduced_hamiltonian(s200, p.spec);
            const Spectrum& sp = H200.spectrum();
            double worst = 0.0;
            for (int j = 0; j < 20; ++j) {
                const double x = sp.values[j] / h;
                Eigen::VectorXd w(s200.dim);
                for (int n = 0; n < s200.dim; ++n) {
                    const double norm = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(n + v1 + 1.0)));
                    w(n) = ((n % 2) ? -1.0 : 1.0) * norm * boost::math::laguerre(n, v1, x);
                }
                w.normalize();
                const Eigen::VectorXd u = sp.vectors.col(j);
                if (u.dot(w) < 0.0) w = -w;
                worst = std::max(worst, (u - w).cwiseAbs().maxCoeff());
            }
            detail = "lowest eigenvalue " + std::to_string(sp.values[0]);
            return worst;
        });
    }
    if (p.kind == PresetKind::Krawtchouk) {
        // H is a rotated number operator: its spectrum is hbar k, k = 0..L.
        suite.run("spectrum = hbar {0..L}", 1e-10, [&](std::string&) {
            const Spectrum& sp = H.spectrum();
            double worst = 0.0;
            for (int k = 0; k < H.dim(); ++k) worst = std::max(worst, std::fabs(sp.values[k] / h - k));
            return worst / std::max(1, H.dim());
        });
    }
}

void classical_items(Suite& suite) {
    const Preset& p = suite.preset();
    const std::vector<double> c = p.sector.momentum();
    const ReducedSystem rs(p.spec, c);
    const Expr C = rs.casimir_expr();
    const Expr X = Expr::arg(0), Y = Expr::arg(1), I = Expr::arg(2);
    const std::vector<ShapePoint> pts = shape_points(suite, rs, 10);

    suite.run("brackets {I0,x} = -y, {I0,y} = x", tol::algebraic, [&](std::string&) {
        double worst = 0.0;
        for (const auto& pt : pts) {
            const std::array<double, 3> at{pt.x, pt.y, pt.i0};
            worst = std::max(worst, std::fabs(nambu_bracket(C, I, X, at) + pt.y) / (1.0 + std::fabs(pt.y)));
            worst = std::max(worst, std::fabs(nambu_bracket(C, I, Y, at) - pt.x) / (1.0 + std::fabs(pt.x)));
        }
        return worst;
    });
    if (p.kind == PresetKind::ThreeWave) {
        suite.run("shape samples on the Casimir surface", tol::algebraic, [&](std::string& detail) {
            const auto samples = kummer_shape_sample(p.spec, c, 32, 32, rs.cone().a + 10.0);
            double worst = 0.0;
            for (const auto& s : samples) {
                const double cas = -0.5 * (s.x * s.x + s.y * s.y - rs.G0(s.i0));
                worst = std::max(worst, std::fabs(cas) / (1.0 + s.x * s.x + s.y * s.y));
            }
            detail = std::to_string(samples.size()) + " points";
            return worst;
        });
        return;
    }
    suite.run("bracket {x,y} closed form", tol::algebraic, [&](std::string&) {
        double worst = 0.0;
        for (const auto& pt : pts) {
            const double expect = bracket_xy_closed(p, pt.i0);
            const double got = nambu_bracket(C, X, Y, {pt.x, pt.y, pt.i0});
            worst = std::max(worst, std::fabs(got - expect) / (1.0 + std::fabs(expect)));
        }
        return worst;
    });
    suite.run("reduced classical Hamiltonian closed form", tol::algebraic, [&](std::string&) {
        double worst = 0.0;
        for (const auto& pt : pts) {
            const double expect = hamiltonian_closed(p, c, pt.i0, pt.psi0);
            worst = std::max(worst, std::fabs(rs.energy(pt.i0, pt.psi0) - expect) / (1.0 + std::fabs(expect)));
        }
        return worst;
    });
}

// Radius of a disc where the Eigen-family series converges with a negligible tail at the preset
// truncation.
double safe_radius(const Preset& p) {
    const double h = p.spec.hbar;
    switch (p.kind) {
    case PresetKind::Laguerre: return 2.0 * h;
    case PresetKind::Krawtchouk: return std::sqrt(p.params.p * (1.0 - p.params.p) * h);
    case PresetKind::QWeyl: return std::sqrt(0.5 * h / (1.0 - std::pow(p.params.q, h / p.params.alpha)));
    case PresetKind::ThreeWave: return std::sqrt(h);
    }
    return 1.0;
}

void coherent_items(Suite& suite) {
    const Preset& p = suite.preset();
    const double h = p.spec.hbar;
    const double radius = safe_radius(p);

    suite.run("eigenvector property A|z> = z|z> (50 points)", 1e-10, [&](std::string&) {
        double worst = 0.0;
        for (int k = 0; k < 50; ++k) {
            const CoherentState st = coherent_state(p.sector, p.spec, suite.disc_point(radius));
            worst = std::max(worst, eigenvector_residual(p.sector, st));
        }
        return worst;
    });
    suite.run("kernel positive and increasing on the diagonal", tol::algebraic, [&](std::string& detail) {
        const ReproducingKernel K(p.sector, p.spec, CoherentFamily::Eigen);
        double prev = K.coefficient(0), worst = 0.0;
        bool monotone = true;
        for (int k = 0; k <= 20; ++k) {
            const cplx z = std::polar(radius * k / 20.0, suite.uniform(0.0, 2.0 * kPi));
            const cplx v = K(std::conj(z), z);
            worst = std::max(worst, std::fabs(v.imag()) / std::abs(v));
            if (k > 0 && !(v.real() > prev)) monotone = false;
            prev = v.real();
        }
        if (!monotone) detail = "not increasing";
        return monotone ? worst : std::numeric_limits<double>::infinity();
    });

    const std::vector<int>& v = p.params.vacuum;
    if (p.kind == PresetKind::Laguerre) {
        suite.run("kernel = k0 1F2(1; v0+1, v1+1; zbar w/hbar^2)", tol::algebraic, [&](std::string&) {
            const ReproducingKernel K(p.sector, p.spec, CoherentFamily::Eigen);
            const double k0 = std::exp(-std::lgamma(v[0] + 1.0) - std::lgamma(v[1] + 1.0));
            double worst = 0.0;
            for (int k = 0; k < 20; ++k) {
                const double zr = suite.uniform(-radius, radius), wr = suite.uniform(-radius, radius);
                const double expect = k0 * boost::math::hypergeometric_pFq({1.0}, {v[0] + 1.0, v[1] + 1.0},
                                                                           zr * wr / (h * h));
                worst = std::max(worst, std::abs(K(zr, wr) - expect) / std::fabs(expect));
            }
            return worst;
        });
        if (v[0] == 0) {
            suite.run("density = (t/hbar^2)^{v1/2} K_v1(2 sqrt t/hbar)/(pi hbar^2)", 1e-8, [&](std::string&) {
                double worst = 0.0;
                for (int k = 0; k < 20; ++k) {
                    const double t = h * h * 0.05 * std::pow(200.0, k / 19.0);
                    const double expect = std::pow(t / (h * h), 0.5 * v[1]) *
                                          boost::math::cyl_bessel_k(v[1], 2.0 * std::sqrt(t) / h) / (kPi * h * h);
                    worst = std::max(worst, std::fabs(measure_density(p.sector, p.spec, t) / expect - 1.0));
                }
                return worst;
            });
        }
        suite.run("resolution of identity moments n <= 10", 1e-8, [&](std::string&) {
            return resolution_check(p.sector, p.spec, 10).max_deviation;
        });
    } else if (p.kind == PresetKind::Krawtchouk) {
        const double pq = p.params.p * (1.0 - p.params.p);
        const int v1 = v[1];
        suite.run("kernel = (1 + zbar w/(p(1-p)))^v1 / v1!", tol::algebraic, [&](std::string&) {
            const ReproducingKernel K(p.sector, p.spec, CoherentFamily::Glauber);
            double worst = 0.0;
            for (int k = 0; k < 20; ++k) {
                const cplx z = suite.disc_point(std::sqrt(pq)), w = suite.disc_point(std::sqrt(pq));
                const cplx expect = std::pow(1.0 + std::conj(z) * w / pq, v1) / std::tgamma(v1 + 1.0);
                worst = std::max(worst, std::abs(K(std::conj(z), w) - expect) / std::abs(expect));
            }
            return worst;
        });
        suite.run("density = (v1+1)!/(2 pi g0^2 (1 + t/g0^2)^{v1+2})", 1e-8, [&](std::string&) {
            double worst = 0.0;
            for (int k = 0; k < 20; ++k) {
                const double t = pq * 0.05 * std::pow(200.0, k / 19.0);
                const double expect = std::tgamma(v1 + 2.0) / (2.0 * kPi * pq * std::pow(1.0 + t / pq, v1 + 2));
                worst = std::max(worst, std::fabs(measure_density(p.sector, p.spec, t) / expect - 1.0));
            }
            return worst;
        });
        suite.run("resolution of identity moments n <= L", tol::algebraic, [&](std::string&) {
            return resolution_check(p.sector, p.spec, p.sector.L).max_deviation;
        });
    } else if (p.kind == PresetKind::QWeyl) {
        const double Q = std::pow(p.params.q, h / p.params.alpha);
        suite.run("kernel = 1/prod_k (1 - (1-Q) Q^k zbar w/hbar)", tol::algebraic, [&](std::string&) {
            const ReproducingKernel K(p.sector, p.spec, CoherentFamily::Eigen);
            double worst = 0.0;
            for (int k = 0; k < 20; ++k) {
                const cplx z = suite.disc_point(radius), w = suite.disc_point(radius);
                const cplx x = (1.0 - Q) * std::conj(z) * w / h;
                cplx prod = 1.0;
                double qk = 1.0;
                for (int j = 0; j < 100000 && qk * std::abs(x) > 1e-18; ++j, qk *= Q) prod *= 1.0 - qk * x;
                const cplx expect = 1.0 / prod;
                worst = std::max(worst, std::abs(K(std::conj(z), w) - expect) / std::abs(expect));
            }
            return worst;
        });
        suite.run("atomic measure moments n <= 8", 1e-8, [&](std::string& detail) {
            const QMeasureReport rep = q_measure_check(h, p.params.q, p.params.alpha, 8);
            detail = std::to_string(rep.atoms) + " atoms";
            return rep.max_deviation;
        });
    }
}

} // namespace

GoldenReport golden_suite(const Preset& preset, std::uint64_t seed) {
    Suite suite(preset, seed);
    algebra_items(suite);
    hamiltonian_items(suite);
    classical_items(suite);
    coherent_items(suite);
    return suite.take();
}

} // namespace kummer
