#include "robstab/eigscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace robstab {

const char* to_string(EigEvent e) {
    switch (e) {
        case EigEvent::FirstHopf: return "FirstHopf";
        case EigEvent::Coalescence: return "Coalescence";
        case EigEvent::SecondHopf: return "SecondHopf";
        case EigEvent::SNBOriginTouch: return "SNBOriginTouch";
    }
    return "?";
}

std::vector<EigEvent> EigTrajectory::event_kinds() const {
    std::vector<EigEvent> out;
    for (const auto& m : events) out.push_back(m.event);
    return out;
}

Spectrum spectrum(const MatrixXd& a) {
    if (!a.allFinite()) throw Error(ErrorKind::Domain, "spectrum of a non-finite matrix");
    Spectrum s;
    if (a.rows() == 0) {
        s.abscissa = -std::numeric_limits<double>::infinity();
        return s;
    }
    const Eigen::EigenSolver<MatrixXd> es(a, false);
    const auto& ev = es.eigenvalues();
    s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](const Complex& x, const Complex& y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    s.abscissa = s.eigenvalues.front().real();
    return s;
}

namespace {

TauAssignment with_load_tau(const TauAssignment& base, int load, double tau) {
    TauAssignment t = base;
    t.tau(2 * load) = tau;
    t.tau(2 * load + 1) = tau;
    return t;
}

// Frequency of the rightmost eigenvalue (the one defining the abscissa).
double lead_frequency(const Spectrum& s) { return std::abs(s.eigenvalues.front().imag()); }

}  // namespace

HopfPoint find_hopf_tau(const ReducedJacobian& j, int varying_load, const TauAssignment& fixed, double lo,
                        double hi, const HopfSearchOptions& opt) {
    if (varying_load < 0 || 2 * varying_load + 1 >= j.n_L)
        throw Error(ErrorKind::DimensionMismatch, "varying load index out of range");
    if (!(lo > 0.0 && hi > lo)) throw Error(ErrorKind::Domain, "tau range must satisfy 0 < lo < hi");
    auto eval = [&](double tau) { return spectrum(build_a(j, with_load_tau(fixed, varying_load, tau))); };

    const double llo = std::log(lo), lhi = std::log(hi);
    double prev_t = lo;
    double prev_a = eval(lo).abscissa;
    for (int i = 1; i < opt.grid; ++i) {
        const double t = std::exp(llo + (lhi - llo) * i / (opt.grid - 1));
        const double a = eval(t).abscissa;
        if ((prev_a < 0.0) != (a < 0.0)) {
            double l = std::log(prev_t), h = std::log(t);
            const bool rising = prev_a < 0.0;
            double best_t = t;
            Spectrum best = eval(t);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (l + h);
                const Spectrum sm = eval(std::exp(mid));
                if (std::abs(sm.abscissa) <= std::abs(best.abscissa)) {
                    best = sm;
                    best_t = std::exp(mid);
                }
                if ((sm.abscissa < 0.0) == rising) l = mid;
                else h = mid;
                const bool tight = std::exp(h - l) - 1.0 < opt.rel_bracket;
                if (tight && std::abs(best.abscissa) < opt.abscissa_tol) break;
                if (h - l < 1e-15) break;
            }
            HopfPoint hp;
            hp.parameter = best_t;
            hp.abscissa = best.abscissa;
            hp.frequency = lead_frequency(best);
            hp.crossing_pair_index = 0;
            if (hp.frequency <= opt.min_frequency)
                throw Error(ErrorKind::NoCrossing, "abscissa crosses zero through a real eigenvalue, not a Hopf pair");
            return hp;
        }
        prev_t = t;
        prev_a = a;
    }
    throw Error(ErrorKind::NoCrossing, "spectral abscissa keeps its sign over the tau range");
}

namespace {

struct BranchPoint {
    double lambda;
    Equilibrium eq;
    Spectrum spec;
};

// Sequential warm-started evaluation of the spectrum along the upper branch;
// stops quietly at the first loading without a regular equilibrium.
std::vector<BranchPoint> sweep_branch(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                                      const TauAssignment& tau, const std::vector<double>& grid) {
    std::vector<BranchPoint> out;
    const Equilibrium* warm = nullptr;
    for (double lam : grid) {
        Equilibrium eq;
        try {
            const auto j = linearize(c, cal, s, lam, warm, &eq);
            out.push_back({lam, eq, spectrum(build_a(j, tau))});
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NoConvergence || e.kind() == ErrorKind::SingularJacobian ||
                e.kind() == ErrorKind::NearSingularAlgebraic)
                break;
            throw;
        }
        warm = &out.back().eq;
    }
    return out;
}

}  // namespace

HopfPoint find_hopf_load(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                         const TauAssignment& tau, double lo, double hi, int which, const HopfSearchOptions& opt) {
    if (!(hi > lo)) throw Error(ErrorKind::Domain, "load range must satisfy lo < hi");
    std::vector<double> grid;
    for (int i = 0; i < opt.grid; ++i) grid.push_back(lo + (hi - lo) * i / (opt.grid - 1));
    const auto pts = sweep_branch(c, cal, s, tau, grid);

    int seen = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double a0 = pts[i - 1].spec.abscissa, a1 = pts[i].spec.abscissa;
        if ((a0 < 0.0) == (a1 < 0.0)) continue;
        const bool rising = a0 < 0.0;
        double l = pts[i - 1].lambda, h = pts[i].lambda;
        Equilibrium warm = pts[i - 1].eq;
        HopfPoint best{h, lead_frequency(pts[i].spec), 0, a1};
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (l + h);
            Equilibrium eq;
            const auto j = linearize(c, cal, s, mid, &warm, &eq);
            const Spectrum sm = spectrum(build_a(j, tau));
            if (std::abs(sm.abscissa) <= std::abs(best.abscissa)) best = {mid, lead_frequency(sm), 0, sm.abscissa};
            if ((sm.abscissa < 0.0) == rising) {
                l = mid;
                warm = eq;
            } else {
                h = mid;
            }
            if ((h - l) < opt.rel_bracket * std::abs(h) && std::abs(best.abscissa) < opt.abscissa_tol) break;
            if (h - l < 1e-14 * (1.0 + std::abs(h))) break;
        }
        if (best.frequency <= opt.min_frequency) continue;  // real crossing
        if (++seen == which) return best;
    }
    throw Error(ErrorKind::NoCrossing, "no Hopf crossing number " + std::to_string(which) + " on the load range");
}

std::vector<double> branch_grid(double lo, double snb, int n, double gap) {
    std::vector<double> g;
    const double hi = snb * (1.0 - gap);
    for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / std::max(1, n - 1));
    return g;
}

namespace {

struct PairMatch {
    std::array<Complex, 2> pair;
    bool ambiguous = false;
};

// Matches the tracked pair (as an unordered set) to two distinct eigenvalues
// of `spec` with minimal total displacement.
PairMatch match_pair(const std::array<Complex, 2>& ref, const Spectrum& spec, double ratio) {
    const auto& ev = spec.eigenvalues;
    const int n = static_cast<int>(ev.size());
    double best = std::numeric_limits<double>::infinity(), second = best;
    int bi = 0, bj = 1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double cost = std::abs(ev[i] - ref[0]) + std::abs(ev[j] - ref[1]);
            if (cost < best) {
                const bool same_set = (std::min(i, j) == std::min(bi, bj) && std::max(i, j) == std::max(bi, bj));
                if (!same_set) second = best;
                best = cost;
                bi = i;
                bj = j;
            } else if (cost < second) {
                const bool same_set = (std::min(i, j) == std::min(bi, bj) && std::max(i, j) == std::max(bi, bj));
                if (!same_set) second = cost;
            }
        }
    PairMatch m;
    m.pair = {ev[bi], ev[bj]};
    const double floor = 1e-9 * (1.0 + std::abs(ref[0]) + std::abs(ref[1]));
    m.ambiguous = best > floor && second * ratio < best;
    return m;
}

std::array<Complex, 2> initial_pair(const Spectrum& s, double imag_tol) {
    const auto& ev = s.eigenvalues;
    for (const auto& e : ev)
        if (e.imag() > imag_tol) return {e, std::conj(e)};
    if (ev.size() < 2) return {ev.front(), ev.front()};
    return {ev[0], ev[1]};
}

bool is_complex(const std::array<Complex, 2>& p, double tol) {
    return std::abs(p[0].imag()) > tol || std::abs(p[1].imag()) > tol;
}

double pair_re(const std::array<Complex, 2>& p) { return std::max(p[0].real(), p[1].real()); }

}  // namespace

EigTrajectory trace_critical_eigenvalues(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                                         const TauAssignment& tau, const std::vector<double>& grid,
                                         const TrackOptions& opt) {
    if (grid.size() < 2) throw Error(ErrorKind::Domain, "trajectory grid needs at least two points");
    EigTrajectory tr;
    TraceOptions to;
    to.step = std::max(1e-3, 0.02 * std::abs(grid.back() - grid.front()));
    tr.snb_lambda = trace_nose(c, cal, s, grid.front(), to).snb_lambda;

    auto eval = [&](double lam, const Equilibrium* warm, Equilibrium& eq) {
        return spectrum(build_a(linearize(c, cal, s, lam, warm, &eq), tau));
    };

    Equilibrium eq;
    Spectrum sp = eval(grid.front(), nullptr, eq);
    std::array<Complex, 2> pair = initial_pair(sp, opt.imag_tol);
    tr.samples.push_back({grid.front(), pair, sp.abscissa, sp});
    Equilibrium warm = eq;

    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (grid[g] >= tr.snb_lambda) break;
        // Advance from the last sample to grid[g], halving on ambiguity.
        double target = grid[g];
        int halvings = 0;
        while (tr.samples.back().lambda < grid[g]) {
            const double from = tr.samples.back().lambda;
            Equilibrium e2;
            Spectrum s2;
            try {
                s2 = eval(target, &warm, e2);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::NearSingularAlgebraic || e.kind() == ErrorKind::NoConvergence ||
                    e.kind() == ErrorKind::SingularJacobian)
                    goto done;
                throw;
            }
            const PairMatch m = match_pair(pair, s2, opt.ambiguity_ratio);
            if (m.ambiguous && halvings < opt.max_halvings) {
                target = 0.5 * (from + target);
                ++halvings;
                continue;
            }
            if (m.ambiguous)
                throw Error(ErrorKind::TrackingAmbiguity,
                            "eigenvalue tracking ambiguous near lambda=" + std::to_string(target));
            pair = m.pair;
            if (pair[0].imag() < pair[1].imag()) std::swap(pair[0], pair[1]);
            tr.samples.push_back({target, pair, s2.abscissa, s2});
            warm = e2;
            target = grid[g];
            halvings = 0;
        }
    }
done:
    // Crossing and coalescence markers from consecutive samples.
    int hopfs = 0;
    for (std::size_t k = 1; k < tr.samples.size(); ++k) {
        const auto& a = tr.samples[k - 1];
        const auto& b = tr.samples[k];
        const double ra = pair_re(a.pair), rb = pair_re(b.pair);
        const bool ca = is_complex(a.pair, opt.imag_tol), cb = is_complex(b.pair, opt.imag_tol);
        if ((ra < 0.0) != (rb < 0.0) && ca && cb) {
            const double lam = a.lambda + (b.lambda - a.lambda) * (0.0 - ra) / (rb - ra);
            tr.events.push_back({hopfs++ == 0 ? EigEvent::FirstHopf : EigEvent::SecondHopf, lam});
        }
        if (ca && !cb) tr.events.push_back({EigEvent::Coalescence, b.lambda});
    }

    // A real eigenvalue mu reaching the origin at the fold behaves like
    // mu^2 ~ (lambda* - lambda); extrapolate the root from the last samples.
    const std::size_t n = tr.samples.size();
    if (n >= 4) {
        const double near = std::abs(tr.samples.back().lambda - tr.snb_lambda) / tr.snb_lambda;
        if (near < 0.02) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            const std::size_t k0 = n - 4;
            for (std::size_t k = k0; k < n; ++k) {
                double mu = std::numeric_limits<double>::infinity();
                for (const auto& e : tr.samples[k].spectrum.eigenvalues)
                    if (std::abs(e.imag()) <= opt.imag_tol) mu = std::min(mu, std::abs(e.real()));
                const double x = tr.samples[k].lambda, y = mu * mu;
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            const double cnt = 4.0;
            const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
            const double icpt = (sy - slope * sx) / cnt;
            if (slope < 0.0 && std::isfinite(slope)) {
                const double root = -icpt / slope;
                if (std::abs(root - tr.snb_lambda) < 0.01 * tr.snb_lambda)
                    tr.events.push_back({EigEvent::SNBOriginTouch, tr.snb_lambda});
            }
        }
    }
    std::stable_sort(tr.events.begin(), tr.events.end(),
                     [](const EigMarker& x, const EigMarker& y) { return x.lambda < y.lambda; });
    return tr;
}

double coalescence_real_part(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                             const TauAssignment& tau, int grid_points) {
    const double snb = trace_nose(c, cal, s, 0.0).snb_lambda;
    const auto tr = trace_critical_eigenvalues(c, cal, s, tau, branch_grid(0.0, snb, grid_points));
    for (std::size_t k = 1; k < tr.samples.size(); ++k) {
        const auto& a = tr.samples[k - 1];
        const auto& b = tr.samples[k];
        if (!(is_complex(a.pair, 1e-6) && !is_complex(b.pair, 1e-6))) continue;
        double l = a.lambda, h = b.lambda;
        std::array<Complex, 2> pair = a.pair;
        std::array<Complex, 2> merged = b.pair;
        Equilibrium warm = solve_powerflow(c, cal, s, l);
        for (int it = 0; it < 50 && h - l > 1e-12 * (1.0 + h); ++it) {
            const double mid = 0.5 * (l + h);
            Equilibrium eq;
            const Spectrum sm = spectrum(build_a(linearize(c, cal, s, mid, &warm, &eq), tau));
            const PairMatch m = match_pair(pair, sm, 0.0);
            if (is_complex(m.pair, 1e-9)) {
                l = mid;
                pair = m.pair;
                warm = eq;
            } else {
                h = mid;
                merged = m.pair;
            }
        }
        return 0.5 * (merged[0].real() + merged[1].real());
    }
    throw Error(ErrorKind::NoCoalescence, "tracked pair never merges on the real axis");
}

}  // namespace robstab
