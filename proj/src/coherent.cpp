#include "kummer/coherent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "kummer/classical.hpp"
#include "kummer/errors.hpp"
#include "kummer/quadrature.hpp"
#include "kummer/special.hpp"
#include "kummer/tolerances.hpp"

namespace kummer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> ladder(const Sector& s, const SystemSpec& spec, int n) {
    std::vector<double> x(spec.modes());
    for (int i = 0; i < spec.modes(); ++i) x[i] = s.hbar * static_cast<double>(s.vacuum[i] + n * spec.l[i]);
    return x;
}

double log_k0(const Sector& s) {
    double v = 0.0;
    for (int vi : s.vacuum) v -= std::lgamma(vi + 1.0);
    return v;
}

// k_{n+1}/k_n; zero (Glauber) or undefined (Eigen) at the top of a finite sector.
double coefficient_ratio(const Sector& s, const SystemSpec& spec, CoherentFamily family, int n) {
    const auto x = ladder(s, spec, n);
    if (family == CoherentFamily::Eigen) return 1.0 / structural_fn_quantum_occ(spec, x);
    const double g = spec.g0.constant ? spec.g0.value : spec.g0.expr.eval(x, spec.hbar);
    double num = 1.0, den = g * g;
    for (int i = 0; i < spec.modes(); ++i) {
        if (spec.l[i] > 0) den *= eval_P(spec.l[i], x[i], spec.hbar);
        if (spec.l[i] < 0) num *= eval_P(spec.l[i], x[i], spec.hbar);
    }
    return num / den;
}

// Highest index with a nonzero coefficient, or -1 when the series is infinite.
int top_level(const Sector& s) { return s.finite ? s.L : -1; }

// log G_hbar(n) with on-demand growth; used by the shift-operator route.
class LogStructural {
public:
    LogStructural(const Sector& s, const SystemSpec& spec) : s_(s), spec_(spec) {}
    double operator()(int n) {
        while (static_cast<int>(cache_.size()) <= n) {
            const int m = static_cast<int>(cache_.size());
            cache_.push_back(std::log(structural_fn_quantum_occ(spec_, ladder(s_, spec_, m))));
        }
        return cache_[n];
    }

private:
    const Sector& s_;
    const SystemSpec& spec_;
    std::vector<double> cache_;
};

class LogCoefficients {
public:
    LogCoefficients(const Sector& s, const SystemSpec& spec, CoherentFamily family)
        : s_(s), spec_(spec), family_(family), cache_{log_k0(s)} {}
    double operator()(int n) {
        const int top = top_level(s_);
        if (top >= 0 && n > top) return -kInf;
        while (static_cast<int>(cache_.size()) <= n) {
            const int m = static_cast<int>(cache_.size()) - 1;
            cache_.push_back(cache_.back() + std::log(coefficient_ratio(s_, spec_, family_, m)));
        }
        return cache_[n];
    }

private:
    const Sector& s_;
    const SystemSpec& spec_;
    CoherentFamily family_;
    std::vector<double> cache_;
};

// log of sum_n k_n |z|^{2n} over the whole series (finite or convergent). Sets *terms to the
// number of terms used. Throws on divergence.
double log_kernel_diagonal(LogCoefficients& logk, const Sector& s, double abs_z, int min_terms, int* terms) {
    const double lz = abs_z > 0.0 ? std::log(abs_z) : -kInf;
    const int top = top_level(s);
    std::vector<double> b;
    double bmax = -kInf;
    const int cap = std::max(4 * min_terms, min_terms + 200000);
    int n = 0;
    for (;; ++n) {
        if (top >= 0 && n > top) break;
        const double bn = logk(n) + (n == 0 ? 0.0 : 2.0 * n * lz);
        b.push_back(bn);
        bmax = std::max(bmax, bn);
        if (abs_z == 0.0) {
            ++n;
            break;
        }
        if (top < 0 && n >= min_terms && n > 2 && bn < b[n - 1] && bn - bmax < std::log(1e-19) - std::log(n + 1.0)) {
            ++n;
            break;
        }
        if (top < 0 && n >= cap) {
            if (bn >= b[n - 1]) throw ValidationError("coherent.disc", "outside convergence disc");
            throw NumericalError("coherent.series", "kernel series did not converge", bn - bmax);
        }
    }
    double sum = 0.0;
    for (double bn : b) sum += std::exp(bn - bmax);
    if (terms) *terms = n;
    return bmax + std::log(sum);
}

} // namespace

CoherentFamily parse_family(const std::string& name) {
    if (name == "eigen") return CoherentFamily::Eigen;
    if (name == "glauber") return CoherentFamily::Glauber;
    throw ValidationError("coherent.family", "unknown coherent-state family \"" + name + "\"");
}

std::string family_name(CoherentFamily family) { return family == CoherentFamily::Eigen ? "eigen" : "glauber"; }

std::vector<double> log_kernel_coefficients(const Sector& sector, const SystemSpec& spec, CoherentFamily family,
                                            int n_max) {
    LogCoefficients logk(sector, spec, family);
    std::vector<double> out(n_max + 1);
    for (int n = 0; n <= n_max; ++n) out[n] = logk(n);
    return out;
}

Eigen::VectorXcd CoherentState::coeffs() const {
    return unit * std::exp(0.5 * (log_norm_sq - std::log1p(tail)));
}

CoherentState coherent_state(const Sector& sector, const SystemSpec& spec, cplx z, CoherentFamily family) {
    if (family == CoherentFamily::Glauber && !spec.g0.constant) {
        bool negative = false;
        for (int li : spec.l) negative = negative || li < 0;
        if (negative) throw ValidationError("coherent.family", "glauber family requires a constant coupling");
    }
    const int d = sector.dim;
    LogCoefficients logk(sector, spec, family);
    const double az = std::abs(z);
    const double lz = az > 0.0 ? std::log(az) : -kInf;
    const double theta = std::arg(z);

    std::vector<double> b(d);
    double bmax = -kInf;
    for (int n = 0; n < d; ++n) {
        b[n] = logk(n) + (n == 0 ? 0.0 : 2.0 * n * lz);
        bmax = std::max(bmax, b[n]);
    }
    double partial = 0.0;
    for (int n = 0; n < d; ++n) partial += std::exp(b[n] - bmax);

    const double log_total = log_kernel_diagonal(logk, sector, az, d, nullptr);
    const double log_partial = bmax + std::log(partial);
    CoherentState st;
    st.z = z;
    st.family = family;
    st.tail = sector.finite ? 0.0 : std::max(0.0, std::expm1(log_total - log_partial));
    if (st.tail > 1e-14)
        throw NumericalError("coherent.truncation", "increase truncation", st.tail);
    st.log_norm_sq = log_total;
    st.norm_sq = std::exp(log_total);
    st.unit.resize(d);
    for (int n = 0; n < d; ++n) {
        const double amp = std::exp(0.5 * (b[n] - log_partial));
        st.unit(n) = std::polar(amp, n * theta);
    }
    return st;
}

double eigenvector_residual(const Sector& sector, const CoherentState& state) {
    const int d = sector.dim;
    double r2 = 0.0;
    for (int n = 0; n + 1 < d; ++n) {
        const cplx an = std::sqrt(sector.g_seq[n]) * state.unit(n + 1);
        r2 += std::norm(an - state.z * state.unit(n));
    }
    return std::sqrt(r2) / state.unit.norm();
}

ReproducingKernel::ReproducingKernel(const Sector& sector, const SystemSpec& spec, CoherentFamily family)
    : sector_(sector), spec_(spec), family_(family), log_k0_(log_k0(sector)) {
    bool negative = false;
    for (int li : spec.l) negative = negative || li < 0;
    has_pfq_ = spec.g0.constant && (family == CoherentFamily::Glauber || !negative);
    if (!has_pfq_) return;
    const double g2 = spec.g0.value * spec.g0.value;
    double scale = g2;
    int lsum = 0;
    for (int i = 0; i < spec.modes(); ++i) {
        const int li = spec.l[i];
        const int vi = sector.vacuum[i];
        lsum += li;
        if (li > 0) {
            for (int k = 1; k <= li; ++k) {
                beta_.push_back(static_cast<double>(vi + k) / li);
                beta_rational_.push_back({vi + k, li});
            }
            scale *= std::pow(static_cast<double>(li), li);
        } else if (li < 0) {
            for (int k = 0; k < -li; ++k) {
                alpha_.push_back(static_cast<double>(vi - k) / li);
                alpha_rational_.push_back({vi - k, li});
            }
            scale *= std::pow(static_cast<double>(li), li);
        }
    }
    scale *= std::pow(spec.hbar, lsum);
    x_scale_ = 1.0 / scale;
}

double ReproducingKernel::ratio(int n) const { return coefficient_ratio(sector_, spec_, family_, n); }

double ReproducingKernel::coefficient(int n) const {
    LogCoefficients logk(sector_, spec_, family_);
    return std::exp(logk(n));
}

cplx ReproducingKernel::operator()(cplx zbar, cplx w) const {
    if (has_pfq_) return rational_series(zbar, w);
    using lcplx = std::complex<long double>;
    const lcplx x(zbar.real() * w.real() - zbar.imag() * w.imag(), zbar.real() * w.imag() + zbar.imag() * w.real());
    const long double ax = std::abs(x);
    lcplx term = std::exp(static_cast<long double>(log_k0_));
    lcplx sum = term;
    const int top = top_level(sector_);
    long double prev = std::abs(term);
    for (int n = 0;; ++n) {
        if (top >= 0 && n >= top) break;
        if (ax == 0.0L) break;
        const long double r = ratio(n);
        term *= x * r;
        sum += term;
        const long double mag = std::abs(term);
        if (top < 0) {
            if (mag <= 1e-21L * std::abs(sum) && mag < prev) break;
            if (n > 2'000'000) {
                if (ax * r >= 1.0L) throw ValidationError("coherent.disc", "outside convergence disc");
                throw NumericalError("coherent.series", "kernel series did not converge",
                                     static_cast<double>(mag / std::abs(sum)));
            }
        }
        prev = mag;
    }
    return cplx(static_cast<double>(sum.real()), static_cast<double>(sum.imag()));
}

// Term recurrence with the exact rational ratios prod(n + alpha)/prod(n + beta) accumulated with 50
// significant digits, so that the only rounding that matters is the one in the argument. Alternating
// terminating sums (Krawtchouk) cancel by many orders of magnitude near the kernel zeros.
cplx ReproducingKernel::rational_series(cplx zbar, cplx w) const {
    using mp = boost::multiprecision::cpp_bin_float_50;
    const cplx xd = zbar * w;
    const mp xs = x_scale_;
    const mp xr = xs * mp(zbar.real()) * mp(w.real()) - xs * mp(zbar.imag()) * mp(w.imag());
    const mp xi = xs * mp(zbar.real()) * mp(w.imag()) + xs * mp(zbar.imag()) * mp(w.real());
    mp k0 = 1;
    for (int vi : sector_.vacuum)
        for (int j = 2; j <= vi; ++j) k0 /= j;
    mp tr = k0, ti = 0, sr = k0, si = 0;
    const int top = top_level(sector_);
    mp prev = abs(tr);
    for (int n = 0;; ++n) {
        if (xd == 0.0) break;
        mp r = 1;
        for (const auto& [num, den] : alpha_rational_) r *= mp(n) + mp(num) / den;
        for (const auto& [num, den] : beta_rational_) r /= mp(n) + mp(num) / den;
        if (r == 0) break;
        const mp nr = (tr * xr - ti * xi) * r;
        const mp ni = (tr * xi + ti * xr) * r;
        tr = nr;
        ti = ni;
        sr += tr;
        si += ti;
        if (top >= 0 && n + 1 >= top) break;
        const mp mag = abs(tr) + abs(ti);
        if (top < 0) {
            if (mag <= mp(1e-32) * (abs(sr) + abs(si)) && mag < prev) break;
            if (n > 2'000'000) {
                if (abs(r) * sqrt(xr * xr + xi * xi) >= 1) throw ValidationError("coherent.disc", "outside convergence disc");
                throw NumericalError("coherent.series", "kernel series did not converge");
            }
        }
        prev = mag;
    }
    return cplx(static_cast<double>(sr), static_cast<double>(si));
}

cplx ReproducingKernel::hypergeometric(cplx zbar, cplx w) const {
    if (!has_pfq_) throw ValidationError("coherent.kernel", "no hypergeometric form for this kernel");
    std::vector<double> a{1.0};
    a.insert(a.end(), alpha_.begin(), alpha_.end());
    return std::exp(log_k0_) * hypergeometric_pfq(a, beta_, x_scale_ * zbar * w);
}

cplx kernel_eval(const Sector& sector, const SystemSpec& spec, cplx zbar, cplx w, CoherentFamily family) {
    return ReproducingKernel(sector, spec, family)(zbar, w);
}

namespace {

struct DensityParams {
    int l0;
    double hbar, g2, q;
    std::vector<double> p, sigma;
    double log_prefactor;  // -log(2 pi l0 hbar^S g0^2)
};

DensityParams density_params(const Sector& sector, const SystemSpec& spec) {
    if (!spec.g0.constant)
        throw ValidationError("coherent.density", "the density integral requires a constant coupling");
    if (spec.l[0] <= 0) throw ValidationError("coherent.density", "the density integral requires l_0 > 0");
    DensityParams d;
    d.l0 = spec.l[0];
    d.hbar = spec.hbar;
    d.g2 = spec.g0.value * spec.g0.value;
    d.q = (sector.vacuum[0] + 1.0) / d.l0;
    int vsum = 0;
    for (int v : sector.vacuum) vsum += v;
    for (int j = 1; j < spec.modes(); ++j) {
        d.p.push_back(sector.vacuum[j] - spec.l[j] * d.q);
        d.sigma.push_back(-static_cast<double>(spec.l[j]) / d.l0);
    }
    const int S = vsum + spec.modes();
    d.log_prefactor = -std::log(kTwoPi * d.l0) - S * std::log(d.hbar) - std::log(d.g2);
    return d;
}

// Node doubling driver: rule(n) returns an estimate; stops at agreement 1e-10, cap 8192 nodes.
double doubling(const std::function<double(int)>& rule, int n_start = 32) {
    double prev = rule(n_start);
    double change = kInf;
    for (int n = 2 * n_start; n <= tol::gauss_laguerre_max_nodes; n *= 2) {
        const double cur = rule(n);
        change = std::fabs(cur - prev) / std::max(std::fabs(cur), 1e-300);
        if (change <= tol::gauss_laguerre) return cur;
        prev = cur;
    }
    throw NumericalError("coherent.density", "quadrature did not converge", change);
}

// log of int_0^inf x^p exp(-(T x^sigma + x)/hbar) dx for one variable.
double log_single_integral(double p, double sigma, double T, double hbar) {
    if (T == 0.0 || sigma == 0.0) {
        if (!(p > -1.0)) return kInf;
        return std::lgamma(p + 1.0) + (p + 1.0) * std::log(hbar) - (sigma == 0.0 ? T / hbar : 0.0);
    }
    if (sigma > 0.0) {
        // x = hbar s / lambda with the generalized weight s^p e^{-s}; exact rule for sigma = 1.
        const double lambda = 1.0 + T * std::pow(hbar, sigma - 1.0);
        const double c = hbar / lambda;
        auto rule = [&](int n) {
            const auto gr = gauss_laguerre(n, p);
            double s = 0.0;
            for (size_t i = 0; i < gr->nodes.size(); ++i) {
                const double x = c * gr->nodes[i];
                const double e = -(T * std::pow(x, sigma) + x) / hbar + gr->nodes[i];
                s += gr->weights[i] * std::exp(e);
            }
            return s;
        };
        return (p + 1.0) * std::log(c) + std::log(doubling(rule));
    }
    // sigma = -beta < 0: saddle-point scaling u = mu y and a fold of (0, 1) onto (1, inf).
    const double beta = -sigma;
    const double Tp = T / std::pow(hbar, beta + 1.0);
    const double mu = std::pow(beta * Tp, 1.0 / (beta + 1.0));
    auto rule = [&](int n) {
        const auto gr = gauss_laguerre(n, 0.0);
        double s = 0.0;
        for (size_t i = 0; i < gr->nodes.size(); ++i) {
            const double si = gr->nodes[i];
            const double ly = std::log1p(si / mu);
            const double y = 1.0 + si / mu;
            const double f1 = std::exp(p * ly - mu * std::expm1(-beta * ly) / beta);
            const double bracket = (1.0 / y - 1.0) + std::expm1(beta * ly) / beta - si / mu;
            const double f2 = std::exp(-(p + 2.0) * ly - mu * bracket);
            s += gr->weights[i] * (f1 + f2);
        }
        return s;
    };
    return (p + 1.0) * std::log(hbar) + p * std::log(mu) - mu * (1.0 + 1.0 / beta) + std::log(doubling(rule));
}

// log of the N-fold integral for N >= 2: scaled tensor Gauss-Laguerre with weights x^{p_j} e^{-x_j/hbar}.
double log_tensor_integral(const DensityParams& d, double T) {
    const int N = static_cast<int>(d.p.size());
    for (double pj : d.p)
        if (!(pj > -1.0)) throw ValidationError("coherent.density", "density exponent p_j <= -1 is not supported for N >= 2");
    auto rule = [&](int n) {
        std::vector<std::shared_ptr<const GaussRule>> rules;
        for (int j = 0; j < N; ++j) rules.push_back(gauss_laguerre(n, d.p[j]));
        std::vector<int> idx(N, 0);
        double s = 0.0;
        while (true) {
            double w = 1.0, logprod = 0.0;
            for (int j = 0; j < N; ++j) {
                w *= rules[j]->weights[idx[j]];
                logprod += d.sigma[j] * std::log(d.hbar * rules[j]->nodes[idx[j]]);
            }
            s += w * std::exp(-T * std::exp(logprod) / d.hbar);
            int k = 0;
            while (k < N && ++idx[k] == n) idx[k++] = 0;
            if (k == N) break;
        }
        return s;
    };
    // Node cap for the tensor rule is lower: 256 per axis.
    double prev = rule(16), change = kInf;
    for (int n = 32; n <= 256; n *= 2) {
        const double cur = rule(n);
        change = std::fabs(cur - prev) / std::max(std::fabs(cur), 1e-300);
        if (change <= tol::gauss_laguerre) {
            double lg = std::log(cur);
            for (int j = 0; j < N; ++j) lg += (d.p[j] + 1.0) * std::log(d.hbar);
            return lg;
        }
        prev = cur;
    }
    throw NumericalError("coherent.density", "quadrature did not converge", change);
}

} // namespace

double measure_density(const Sector& sector, const SystemSpec& spec, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("coherent.density", "t must be finite and >= 0");
    const auto d = density_params(sector, spec);
    const double tau = t / d.g2;
    const double T = std::pow(tau, 1.0 / d.l0);
    double log_rho = d.log_prefactor;
    if (d.q != 1.0) {
        if (tau == 0.0) return d.q > 1.0 ? 0.0 : kInf;
        log_rho += (d.q - 1.0) * std::log(tau);
    }
    const int N = static_cast<int>(d.p.size());
    if (N == 0) {
        log_rho += -T / d.hbar;
    } else if (N == 1) {
        log_rho += log_single_integral(d.p[0], d.sigma[0], T, d.hbar);
    } else {
        log_rho += log_tensor_integral(d, T);
    }
    return std::exp(log_rho);
}

MomentReport resolution_check(const Sector& sector, const SystemSpec& spec, int n_max, const std::string& route) {
    const auto d = density_params(sector, spec);
    if (sector.finite && n_max > sector.L)
        throw ValidationError("coherent.moments", "moments beyond the top level diverge on a finite sector");
    const int N = static_cast<int>(d.p.size());
    MomentReport rep;
    rep.route = route;
    const auto logk = log_kernel_coefficients(sector, spec, CoherentFamily::Glauber, n_max);
    for (int n = 0; n <= n_max; ++n) {
        double m = 0.0;
        if (route == "integrand") {
            if (N > 1) throw ValidationError("coherent.moments", "integrand route supports N <= 1");
            // 2 pi int t^n rho dt = g0^{2n}/(l0 hbar^S) int dx x^p e^{-x/hbar} int dtau tau^{n+q-1} e^{-tau^{1/l0} x^sigma/hbar}.
            // With tau = r^{l0} the inner integral is l0 c^{-(a+1)} int s^a e^{-s} ds, a = l0 n + v0, c = x^sigma/hbar.
            const double a = d.l0 * n + sector.vacuum[0];
            const double inner = integrate_gk([a](double s) { return s == 0.0 ? (a == 0.0 ? 1.0 : 0.0) : std::exp(a * std::log(s) - s); },
                                              0.0, kInf);
            double outer;
            if (N == 0) {
                outer = d.l0 * inner * std::pow(d.hbar, a + 1.0);
            } else {
                const double p = d.p[0], sigma = d.sigma[0], h = d.hbar;
                // x = hbar u; integrand x^p e^{-x/hbar} (x^sigma/hbar)^{-(a+1)}
                auto f = [&](double u) {
                    if (u == 0.0) return 0.0;
                    const double x = h * u;
                    const double e = p * std::log(x) - u - (a + 1.0) * (sigma * std::log(x) - std::log(h));
                    return std::exp(e);
                };
                outer = d.l0 * inner * h * integrate_gk(f, 0.0, kInf);
            }
            // t = g0^2 tau contributes g0^{2n+2}.
            m = kTwoPi * outer * std::exp((n + 1) * std::log(d.g2) + d.log_prefactor);
        } else if (route == "pointwise") {
            if (N != 1 || !(d.sigma[0] > 0.0))
                throw ValidationError("coherent.moments", "pointwise route requires N = 1 and l_1 < 0");
            auto f = [&](double u) {
                if (u >= 1.0) return 0.0;
                const double t = u / (1.0 - u);
                const double rho = measure_density(sector, spec, t);
                return kTwoPi * std::pow(t, n) * rho / ((1.0 - u) * (1.0 - u));
            };
            m = integrate_gk(f, 0.0, 1.0);
        } else {
            throw ValidationError("coherent.moments", "unknown moment route \"" + route + "\"");
        }
        const double expected = std::exp(-logk[n]);
        rep.moments.push_back(m);
        rep.expected.push_back(expected);
        rep.deviation.push_back(std::fabs(m - expected) / expected);
        rep.max_deviation = std::max(rep.max_deviation, rep.deviation.back());
    }
    return rep;
}

QMeasureReport q_measure_check(double hbar, double q, double alpha, int n_max) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("quantum.q", "the atomic measure requires 0 < q < 1");
    if (!(hbar > 0.0) || !(alpha > 0.0)) throw ValidationError("quantum.q", "hbar and alpha must be positive");
    const double lam = std::log(q) * hbar / alpha;  // log Q
    const double Q = std::exp(lam);
    const double one_minus_Q = -std::expm1(lam);
    // q-factorials [m]! with [m] = (1 - Q^m)/(1 - Q).
    auto qint = [&](int m) { return std::expm1(lam * m) / std::expm1(lam); };
    // K(x) = sum_m (x/hbar)^m / [m]!
    auto kernel = [&](double x) {
        const double y = x / hbar;
        long double term = 1.0L, sum = 1.0L;
        for (int m = 1; m < 1'000'000; ++m) {
            term *= y / qint(m);
            sum += term;
            if (term < 1e-21L * sum) break;
        }
        return static_cast<double>(sum);
    };
    QMeasureReport rep;
    std::vector<long double> sums(n_max + 1, 0.0L);
    for (int n = 0;; ++n) {
        const double Qn = std::exp(lam * n);
        const double x = hbar * Qn / one_minus_Q;
        const double w = Qn / kernel(Q * x);
        bool small = true;
        for (int m = 0; m <= n_max; ++m) {
            const long double c = static_cast<long double>(w) * std::pow(static_cast<long double>(x), m);
            sums[m] += c;
            small = small && c < 1e-20L * sums[m];
        }
        rep.atoms = n + 1;
        if (small || n > 10'000'000) break;
    }
    double fact = 1.0;
    for (int m = 0; m <= n_max; ++m) {
        if (m > 0) fact *= qint(m);
        const double expected = std::pow(hbar, m) * fact;
        const double dev = std::fabs(static_cast<double>(sums[m]) - expected) / expected;
        rep.deviation.push_back(dev);
        rep.max_deviation = std::max(rep.max_deviation, dev);
    }
    return rep;
}

SymbolPolynomial SymbolPolynomial::monomial(int k, int l, cplx coeff) {
    if (k < 0 || l < 0) throw ValidationError("coherent.symbol", "monomial exponents must be nonnegative");
    SymbolPolynomial p;
    p.terms[{k, l}] = coeff;
    return p;
}

int SymbolPolynomial::degree() const {
    int d = 0;
    for (const auto& [key, c] : terms) d = std::max(d, key.first + key.second);
    return d;
}

cplx SymbolPolynomial::evaluate(cplx z) const {
    cplx s = 0.0;
    for (const auto& [key, c] : terms) s += c * std::pow(std::conj(z), key.first) * std::pow(z, key.second);
    return s;
}

namespace {

// A*^k A^l applied to vectors, with A e_n = sqrt(G(n-1)) e_{n-1}.
class SymbolAction {
public:
    explicit SymbolAction(const Sector& sector) : root_(sector.dim > 1 ? sector.dim - 1 : 0) {
        for (std::size_t k = 0; k < root_.size(); ++k) root_[k] = std::sqrt(sector.g_seq[k]);
    }

    Eigen::VectorXcd apply(const SymbolPolynomial& f, const Eigen::VectorXcd& v) const {
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
        for (const auto& [key, c] : f.terms) {
            Eigen::VectorXcd w = v;
            for (int i = 0; i < key.second; ++i) lower(w);
            for (int i = 0; i < key.first; ++i) raise(w);
            out += c * w;
        }
        return out;
    }

private:
    void lower(Eigen::VectorXcd& w) const {
        const Eigen::Index d = w.size();
        for (Eigen::Index n = 0; n + 1 < d; ++n) w(n) = root_[n] * w(n + 1);
        if (d > 0) w(d - 1) = 0.0;
    }
    void raise(Eigen::VectorXcd& w) const {
        const Eigen::Index d = w.size();
        for (Eigen::Index n = d - 1; n > 0; --n) w(n) = root_[n - 1] * w(n - 1);
        if (d > 0) w(0) = 0.0;
    }
    std::vector<double> root_;
};

} // namespace

Eigen::MatrixXcd operator_from_symbol(const Sector& sector, const SymbolPolynomial& f) {
    const SymbolAction act(sector);
    Eigen::MatrixXcd F(sector.dim, sector.dim);
    for (int j = 0; j < sector.dim; ++j) F.col(j) = act.apply(f, Eigen::VectorXcd::Unit(sector.dim, j));
    return F;
}

SymbolValue covariant_symbol(const Sector& sector, const CoherentState& state, const Eigen::MatrixXcd& op) {
    if (op.rows() != sector.dim || op.cols() != sector.dim)
        throw ValidationError("coherent.symbol", "operator dimension does not match the sector");
    SymbolValue v;
    v.value = state.unit.dot(op * state.unit);
    v.tail = state.tail;
    v.tail_warning = state.tail > 1e-10;
    return v;
}

cplx star_product(const Sector& sector, const SystemSpec& spec, const SymbolPolynomial& f, const SymbolPolynomial& g,
                  cplx z) {
    LogCoefficients logk(sector, spec, CoherentFamily::Eigen);
    LogStructural logG(sector, spec);
    const double az = std::abs(z);
    const double lz = az > 0.0 ? std::log(az) : -kInf;
    const double theta = std::arg(z);
    const double logK = log_kernel_diagonal(logk, sector, az, sector.dim, nullptr);
    const int L = top_level(sector);

    // <z|A*^k A^l A*^r A^s|z>/<z|z>
    auto monomial_product = [&](int k, int l, int r, int s) -> cplx {
        int j = std::numeric_limits<int>::max();
        if (L >= 0) {
            if (k > L || s > L) return 0.0;
            j = std::min({L, L - k + l, L - s + r});
        }
        const int start = std::max(l, r);
        if (j < start) return 0.0;
        double sum = 0.0, prev = kInf;
        for (int n = start; n <= j; ++n) {
            const int power = 2 * n - l - r + k + s;
            double lt = logk(n - l) - logK;
            for (int i = 1; i <= r; ++i) lt += logG(n - i);
            if (power > 0) {
                if (az == 0.0) break;
                lt += power * lz;
            }
            const double term = std::exp(lt);
            sum += term;
            if (L < 0) {
                if (n > start + 2 && term < 1e-19 * sum && term < prev) break;
                if (n - start > 2'000'000) throw ValidationError("coherent.disc", "outside convergence disc");
            }
            prev = term;
            if (az == 0.0) break;  // only the constant term survives at z = 0
        }
        return std::polar(sum, theta * (s - k + l - r));
    };

    cplx total = 0.0;
    for (const auto& [fk, fc] : f.terms)
        for (const auto& [gk, gc] : g.terms)
            total += fc * gc * monomial_product(fk.first, fk.second, gk.first, gk.second);
    return total;
}

cplx star_product_matrix(const Sector& sector, const SystemSpec& spec, const SymbolPolynomial& f,
                         const SymbolPolynomial& g, cplx z) {
    const auto st = coherent_state(sector, spec, z, CoherentFamily::Eigen);
    const SymbolAction act(sector);
    return st.unit.dot(act.apply(f, act.apply(g, st.unit)));
}

double tilde_inverse(const SystemSpec& spec, std::span<const double> c, double value) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw ValidationError("coherent.inverse", "target value must be positive and finite");
    const auto cone = cone_bounds(spec, c);
    if (!std::isfinite(cone.a)) throw ValidationError("coherent.inverse", "cone has no lower edge");
    auto f = [&](double i0) {
        if (i0 <= cone.a) return -value;
        if (cone.bounded() && i0 >= cone.b) return std::numeric_limits<double>::max();
        return structural_fn_tilde(spec, i0, c) - value;
    };
    double hi;
    if (cone.bounded()) {
        hi = cone.b;
    } else {
        double step = 1.0 + std::fabs(cone.a);
        hi = cone.a + step;
        while (f(hi) < 0.0) {
            step *= 2.0;
            hi = cone.a + step;
            if (!std::isfinite(hi)) throw ValidationError("coherent.inverse", "no preimage on the cone");
        }
    }
    return find_root(f, cone.a, hi);
}

double structural_inverse(const SystemSpec& spec, std::span<const double> c, double value) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw ValidationError("coherent.inverse", "target value must be positive and finite");
    const auto cone = cone_bounds(spec, c);
    if (!std::isfinite(cone.a)) throw ValidationError("coherent.inverse", "cone has no lower edge");
    auto f = [&](double i0) { return structural_fn_classical(spec, i0, c) - value; };
    double span = cone.bounded() ? cone.b - cone.a : 1.0 + std::fabs(cone.a);
    for (int attempt = 0; attempt < 60; ++attempt) {
        const int n = 512;
        double prev_x = cone.a, prev_f = -value;
        for (int i = 1; i <= n; ++i) {
            const double x = cone.a + span * i / n;
            const double fx = f(x);
            if (fx >= 0.0) return prev_f == 0.0 ? prev_x : find_root(f, prev_x, x);
            prev_x = x;
            prev_f = fx;
        }
        if (cone.bounded()) break;
        span *= 2.0;
    }
    throw ValidationError("coherent.inverse", "no preimage of the structural function on the cone");
}

BracketOperand BracketOperand::a0() {
    BracketOperand o;
    o.is_a0 = true;
    return o;
}

BracketOperand BracketOperand::poly(const SymbolPolynomial& p) {
    BracketOperand o;
    o.symbol = p;
    return o;
}

ClassicalPoint classical_point(const SystemSpec& spec, std::span<const double> c, cplx z) {
    ClassicalPoint cp;
    cp.i0 = tilde_inverse(spec, c, std::norm(z));
    cp.zeta = std::polar(std::sqrt(structural_fn_classical(spec, cp.i0, c)), std::arg(z));
    return cp;
}

LimitResult limit_bracket(const FamilyBuilder& builder, const BracketOperand& f, const BracketOperand& g, cplx z,
                          double hbar0, int levels) {
    if (levels < 3) throw ValidationError("coherent.limit", "at least three hbar levels are required");
    if (!(hbar0 > 0.0)) throw ValidationError("spec.hbar", "hbar must be positive");
    LimitResult res;
    for (int k = 0; k < levels; ++k) {
        const double h = hbar0 / std::pow(2.0, k);
        const auto [spec, sector] = builder(h);
        const auto family = sector.finite ? CoherentFamily::Glauber : CoherentFamily::Eigen;
        const auto st = coherent_state(sector, spec, z, family);
        const SymbolAction act(sector);
        auto apply = [&](const BracketOperand& o, const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
            if (!o.is_a0) return act.apply(o.symbol, v);
            Eigen::VectorXcd w = v;
            for (int n = 0; n < sector.dim; ++n) w(n) *= sector.a0(n);
            return w;
        };
        const Eigen::VectorXcd& u = st.unit;
        const cplx comm = u.dot(apply(f, apply(g, u))) - u.dot(apply(g, apply(f, u)));
        res.hbars.push_back(spec.hbar);
        res.values.push_back(cplx(0.0, -1.0 / spec.hbar) * comm);
    }
    const int K = levels - 1;
    std::vector<double> diffs;
    double scale = 1.0;
    for (const auto& v : res.values) scale = std::max(scale, std::abs(v));
    for (int k = 1; k <= K; ++k) diffs.push_back(std::abs(res.values[k] - res.values[k - 1]));
    const bool exact = std::all_of(diffs.begin(), diffs.end(), [&](double dd) { return dd <= 1e-11 * scale; });
    if (exact) {
        res.estimate = res.values[K];
        res.status = "exact";
        return res;
    }
    res.estimate = 2.0 * res.values[K] - res.values[K - 1];
    res.order = std::log2(diffs[K - 2] / diffs[K - 1]);
    bool monotone = true;
    for (size_t i = 1; i < diffs.size(); ++i) monotone = monotone && diffs[i] < diffs[i - 1];
    res.status = monotone ? "ok" : "no convergence";
    return res;
}

int MultiSymbol::degree() const {
    int d = 0;
    for (const auto& [key, c] : terms) {
        int s = 0;
        for (int e : key.first) s += e;
        for (int e : key.second) s += e;
        d = std::max(d, s);
    }
    return d;
}

cplx MultiSymbol::evaluate(const std::vector<cplx>& z) const {
    cplx s = 0.0;
    for (const auto& [key, c] : terms) {
        cplx m = c;
        for (int i = 0; i < modes; ++i) m *= std::pow(std::conj(z[i]), key.first[i]) * std::pow(z[i], key.second[i]);
        s += m;
    }
    return s;
}

namespace {

void check_multi(const MultiSymbol& f) {
    if (f.modes < 1 || f.modes > 2) throw ValidationError("coherent.oracle", "unsupported: at most two modes");
    if (f.degree() > 3) throw ValidationError("coherent.oracle", "unsupported: symbol degree above 3");
    for (const auto& [key, c] : f.terms)
        if (static_cast<int>(key.first.size()) != f.modes || static_cast<int>(key.second.size()) != f.modes)
            throw ValidationError("coherent.oracle", "exponent vectors must match the mode count");
}

double falling(int n, int j) {
    double p = 1.0;
    for (int i = 0; i < j; ++i) p *= n - i;
    return p;
}

} // namespace

MultiSymbol glauber_star(const MultiSymbol& f, const MultiSymbol& g, double hbar) {
    check_multi(f);
    check_multi(g);
    if (f.modes != g.modes) throw ValidationError("coherent.oracle", "mode counts differ");
    MultiSymbol out;
    out.modes = f.modes;
    for (const auto& [fk, fc] : f.terms)
        for (const auto& [gk, gc] : g.terms) {
            // j_i ranges over 0..min(l_i of f, kbar_i of g)
            std::vector<int> j(f.modes, 0);
            while (true) {
                double coeff = 1.0;
                std::vector<int> kb(f.modes), l(f.modes);
                for (int i = 0; i < f.modes; ++i) {
                    coeff *= std::pow(hbar, j[i]) / std::tgamma(j[i] + 1.0) * falling(fk.second[i], j[i]) *
                             falling(gk.first[i], j[i]);
                    kb[i] = fk.first[i] + gk.first[i] - j[i];
                    l[i] = fk.second[i] - j[i] + gk.second[i];
                }
                if (coeff != 0.0) out.terms[{kb, l}] += fc * gc * coeff;
                int i = 0;
                while (i < f.modes && ++j[i] > std::min(fk.second[i], gk.first[i])) j[i++] = 0;
                if (i == f.modes) break;
            }
        }
    return out;
}

cplx glauber_oracle(const MultiSymbol& f, const MultiSymbol& g, const std::vector<cplx>& z, double hbar) {
    if (static_cast<int>(z.size()) != f.modes) throw ValidationError("coherent.oracle", "point dimension mismatch");
    return glauber_star(f, g, hbar).evaluate(z);
}

cplx glauber_matrix(const MultiSymbol& f, const MultiSymbol& g, const std::vector<cplx>& z, double hbar,
                    int truncation) {
    check_multi(f);
    check_multi(g);
    const int modes = f.modes;
    const int M = truncation;
    int dim = 1;
    for (int i = 0; i < modes; ++i) dim *= M;
    auto index = [&](const std::vector<int>& n) {
        int idx = 0;
        for (int i = modes - 1; i >= 0; --i) idx = idx * M + n[i];
        return idx;
    };
    auto occupation = [&](int idx) {
        std::vector<int> n(modes);
        for (int i = 0; i < modes; ++i) {
            n[i] = idx % M;
            idx /= M;
        }
        return n;
    };
    // Truncated Glauber state prod_i z_i^{n_i}/sqrt(hbar^{n_i} n_i!).
    Eigen::VectorXcd v(dim);
    for (int idx = 0; idx < dim; ++idx) {
        const auto n = occupation(idx);
        cplx c = 1.0;
        for (int i = 0; i < modes; ++i)
            c *= std::pow(z[i], n[i]) / std::sqrt(std::pow(hbar, n[i]) * std::tgamma(n[i] + 1.0));
        v(idx) = c;
    }
    // Applies a*^kbar a^l mode by mode.
    auto apply = [&](const Eigen::VectorXcd& in, const std::vector<int>& kb, const std::vector<int>& l) {
        Eigen::VectorXcd cur = in;
        for (int i = 0; i < modes; ++i) {
            for (int rep = 0; rep < l[i]; ++rep) {
                Eigen::VectorXcd next = Eigen::VectorXcd::Zero(dim);
                for (int idx = 0; idx < dim; ++idx) {
                    auto n = occupation(idx);
                    if (n[i] == 0) continue;
                    const double amp = std::sqrt(hbar * n[i]);
                    n[i] -= 1;
                    next(index(n)) += amp * cur(idx);
                }
                cur = next;
            }
            for (int rep = 0; rep < kb[i]; ++rep) {
                Eigen::VectorXcd next = Eigen::VectorXcd::Zero(dim);
                for (int idx = 0; idx < dim; ++idx) {
                    auto n = occupation(idx);
                    if (n[i] + 1 >= M) continue;
                    const double amp = std::sqrt(hbar * (n[i] + 1));
                    n[i] += 1;
                    next(index(n)) += amp * cur(idx);
                }
                cur = next;
            }
        }
        return cur;
    };
    Eigen::VectorXcd gv = Eigen::VectorXcd::Zero(dim);
    for (const auto& [key, c] : g.terms) gv += c * apply(v, key.first, key.second);
    Eigen::VectorXcd fgv = Eigen::VectorXcd::Zero(dim);
    for (const auto& [key, c] : f.terms) fgv += c * apply(gv, key.first, key.second);
    return v.dot(fgv) / v.squaredNorm();
}

} // namespace kummer
