#include "robstab/sdpcert.hpp"

#include <cmath>
#include <limits>

#include "robstab/parallel.hpp"

namespace robstab {

const char* to_string(CertStatus s) {
    switch (s) {
        case CertStatus::RS: return "RS";
        case CertStatus::NRS: return "NRS";
        case CertStatus::SolverFailure: return "SolverFailure";
    }
    return "SolverFailure";
}

namespace {

double inner(const MatrixXd& a, const MatrixXd& b) { return (a.array() * b.array()).sum(); }

MatrixXd sym(const MatrixXd& k) { return 0.5 * (k + k.transpose()); }

// Largest alpha with X + alpha dX >= 0 (infinity if unbounded).
double max_step(const MatrixXd& x, const MatrixXd& dx) {
    const Eigen::LLT<MatrixXd> llt(x);
    const MatrixXd l = llt.matrixL();
    const MatrixXd s = l.triangularView<Eigen::Lower>().solve(
        l.triangularView<Eigen::Lower>().solve(dx).transpose());
    const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(sym(s), Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .minCoeff();
    return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double max_step_lp(const VectorXd& x, const VectorXd& dx) {
    double a = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < x.size(); ++k)
        if (dx(k) < 0.0) a = std::min(a, -x(k) / dx(k));
    return a;
}

bool is_pd(const MatrixXd& m) {
    const Eigen::LLT<MatrixXd> llt(m);
    return llt.info() == Eigen::Success;
}

struct Slack {
    std::vector<MatrixXd> z;
    VectorXd zl;
};

Slack dual_slack(const BlockSdp& p, const VectorXd& y) {
    Slack s{p.c_sdp, p.c_lp};
    for (int i = 0; i < p.m(); ++i) {
        if (y(i) == 0.0) continue;
        for (std::size_t k = 0; k < s.z.size(); ++k) s.z[k] -= y(i) * p.a_sdp[i][k];
        if (s.zl.size()) s.zl -= y(i) * p.a_lp[i];
    }
    return s;
}

bool slack_ok(const Slack& s) {
    for (const auto& z : s.z)
        if (!is_pd(z)) return false;
    return s.zl.size() == 0 || (s.zl.array() > 0.0).all();
}

}  // namespace

SdpResult solve_block_sdp(const BlockSdp& p, const VectorXd& y0, const SdpOptions& opt) {
    const int m = p.m();
    const std::size_t nblk = p.c_sdp.size();
    const Eigen::Index nlp = p.c_lp.size();

    SdpResult res;
    VectorXd y = y0;
    Slack s = dual_slack(p, y);
    if (!slack_ok(s)) throw Error(ErrorKind::Domain, "SDP start is not strictly dual feasible");

    std::vector<MatrixXd> x(nblk);
    double dim = static_cast<double>(nlp);
    for (std::size_t k = 0; k < nblk; ++k) {
        const auto n = p.c_sdp[k].rows();
        x[k] = MatrixXd::Identity(n, n);
        dim += static_cast<double>(n);
    }
    VectorXd xl = VectorXd::Ones(nlp);

    auto apply_a = [&](const std::vector<MatrixXd>& xs, const VectorXd& xv) {
        VectorXd out(m);
        for (int i = 0; i < m; ++i) {
            double v = 0.0;
            for (std::size_t k = 0; k < nblk; ++k) v += inner(p.a_sdp[i][k], xs[k]);
            if (nlp) v += p.a_lp[i].dot(xv);
            out(i) = v;
        }
        return out;
    };

    for (int it = 0; it < opt.max_iter; ++it) {
        res.iterations = it;
        double gap = 0.0;
        for (std::size_t k = 0; k < nblk; ++k) gap += inner(x[k], s.z[k]);
        if (nlp) gap += xl.dot(s.zl);
        const VectorXd rp = p.b - apply_a(x, xl);
        res.gap = gap;
        res.primal_infeas = rp.lpNorm<Eigen::Infinity>();
        res.y = y;
        if (gap < opt.gap_tol && res.primal_infeas < opt.feas_tol * (1.0 + p.b.lpNorm<Eigen::Infinity>())) {
            res.converged = true;
            return res;
        }
        const double mu = gap / dim;

        std::vector<MatrixXd> zinv(nblk);
        for (std::size_t k = 0; k < nblk; ++k) {
            const Eigen::LLT<MatrixXd> llt(s.z[k]);
            zinv[k] = sym(llt.solve(MatrixXd::Identity(s.z[k].rows(), s.z[k].cols())));
        }
        const VectorXd ratio = nlp ? VectorXd(xl.cwiseQuotient(s.zl)) : VectorXd();

        // Schur complement M_ij = sum_k tr(A_i X A_j Z^-1) + lp part.
        MatrixXd schur = MatrixXd::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            for (std::size_t k = 0; k < nblk; ++k) {
                const MatrixXd g = x[k] * p.a_sdp[j][k] * zinv[k];
                const MatrixXd gt = g.transpose();
                for (int i = j; i < m; ++i) schur(i, j) += inner(p.a_sdp[i][k], gt);
            }
            if (nlp) {
                const VectorXd w = ratio.cwiseProduct(p.a_lp[j]);
                for (int i = j; i < m; ++i) schur(i, j) += p.a_lp[i].dot(w);
            }
        }
        schur = schur.selfadjointView<Eigen::Lower>();
        const Eigen::LDLT<MatrixXd> ldlt(schur);
        if (ldlt.info() != Eigen::Success) return res;

        struct Dir {
            VectorXd dy;
            std::vector<MatrixXd> dx, dz;
            VectorXd dxl, dzl;
        };
        auto direction = [&](double target, const std::vector<MatrixXd>* r, const VectorXd* rl) {
            Dir d;
            std::vector<MatrixXd> t(nblk);
            VectorXd tl;
            for (std::size_t k = 0; k < nblk; ++k) {
                t[k] = target * zinv[k];
                if (r) t[k] -= (*r)[k];
            }
            if (nlp) {
                tl = target * s.zl.cwiseInverse();
                if (rl) tl -= *rl;
            }
            const VectorXd rhs = p.b - apply_a(t, tl);
            d.dy = ldlt.solve(rhs);
            d.dz.resize(nblk);
            d.dx.resize(nblk);
            for (std::size_t k = 0; k < nblk; ++k) {
                d.dz[k] = MatrixXd::Zero(s.z[k].rows(), s.z[k].cols());
                for (int i = 0; i < m; ++i)
                    if (d.dy(i) != 0.0) d.dz[k] -= d.dy(i) * p.a_sdp[i][k];
                d.dx[k] = t[k] - x[k] - sym(x[k] * d.dz[k] * zinv[k]);
            }
            if (nlp) {
                d.dzl = VectorXd::Zero(nlp);
                for (int i = 0; i < m; ++i) d.dzl -= d.dy(i) * p.a_lp[i];
                d.dxl = tl - xl - ratio.cwiseProduct(d.dzl);
            }
            return d;
        };
        auto steps = [&](const Dir& d, double& ap, double& ad) {
            ap = ad = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < nblk; ++k) {
                ap = std::min(ap, max_step(x[k], d.dx[k]));
                ad = std::min(ad, max_step(s.z[k], d.dz[k]));
            }
            if (nlp) {
                ap = std::min(ap, max_step_lp(xl, d.dxl));
                ad = std::min(ad, max_step_lp(s.zl, d.dzl));
            }
        };

        // Predictor.
        const Dir aff = direction(0.0, nullptr, nullptr);
        double ap, ad;
        steps(aff, ap, ad);
        ap = std::min(1.0, ap);
        ad = std::min(1.0, ad);
        double gap_aff = 0.0;
        for (std::size_t k = 0; k < nblk; ++k)
            gap_aff += inner(x[k] + ap * aff.dx[k], s.z[k] + ad * aff.dz[k]);
        if (nlp) gap_aff += (xl + ap * aff.dxl).dot(s.zl + ad * aff.dzl);
        const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), 0.0, 1.0);

        // Corrector.
        std::vector<MatrixXd> corr(nblk);
        for (std::size_t k = 0; k < nblk; ++k) corr[k] = sym(aff.dx[k] * aff.dz[k] * zinv[k]);
        VectorXd corr_l;
        if (nlp) corr_l = aff.dxl.cwiseProduct(aff.dzl).cwiseQuotient(s.zl);
        const Dir d = direction(sigma * mu, &corr, nlp ? &corr_l : nullptr);
        steps(d, ap, ad);
        ap = std::min(1.0, opt.step_fraction * ap);
        ad = std::min(1.0, opt.step_fraction * ad);

        for (std::size_t k = 0; k < nblk; ++k) x[k] = sym(x[k] + ap * d.dx[k]);
        if (nlp) xl += ap * d.dxl;
        for (int tries = 0; tries < 30; ++tries, ad *= 0.5) {
            const VectorXd yt = y + ad * d.dy;
            Slack st = dual_slack(p, yt);
            if (slack_ok(st)) {
                y = yt;
                s = std::move(st);
                break;
            }
        }
        if (ap < 1e-14 && ad < 1e-14) break;
    }
    res.y = y;
    return res;
}

MatrixXd Certificate::q() const {
    const auto ng = q_g.rows(), nl = q_l.size();
    MatrixXd out = MatrixXd::Zero(ng + nl, ng + nl);
    out.topLeftCorner(ng, ng) = q_g;
    out.bottomRightCorner(nl, nl) = q_l.asDiagonal();
    return out;
}

Certificate solve_certificate(const ReducedJacobian& j, const CertOptions& opt) {
    return solve_certificate(j, TauAssignment::uniform(j.n_L, 1.0), opt);
}

Certificate solve_certificate(const ReducedJacobian& j, const TauAssignment& canonical, const CertOptions& opt) {
    const MatrixXd a = build_a(j, canonical);
    if (!a.allFinite()) throw Error(ErrorKind::Domain, "state matrix has non-finite entries");
    const int n = static_cast<int>(a.rows()), ng = j.n_G, nl = j.n_L;
    if (n == 0) throw Error(ErrorKind::DimensionMismatch, "empty state matrix");
    const double scale = std::max(a.norm(), 1e-300);
    const MatrixXd as = a / scale;

    // tr(Q) = 1 is built in: Q = I/n + sum_i y_i B_i with trace-free B_i.
    std::vector<MatrixXd> basis;
    for (int r = 0; r < ng; ++r)
        for (int c = r + 1; c < ng; ++c) {
            MatrixXd b = MatrixXd::Zero(n, n);
            b(r, c) = b(c, r) = 1.0;
            basis.push_back(std::move(b));
        }
    for (int k = 0; k + 1 < n; ++k) {
        MatrixXd b = MatrixXd::Zero(n, n);
        b(k, k) = 1.0;
        b(n - 1, n - 1) = -1.0;
        basis.push_back(std::move(b));
    }
    const int mq = static_cast<int>(basis.size());
    const int m = mq + 1;
    const MatrixXd q0 = MatrixXd::Identity(n, n) / n;

    BlockSdp p;
    p.c_sdp.push_back(-(q0 * as + as.transpose() * q0));
    if (ng > 0) p.c_sdp.push_back(q0.topLeftCorner(ng, ng));
    if (nl > 0) p.c_lp = q0.diagonal().tail(nl);
    p.a_sdp.resize(m);
    p.a_lp.resize(m);
    for (int i = 0; i < mq; ++i) {
        const MatrixXd& b = basis[i];
        p.a_sdp[i].push_back(b * as + as.transpose() * b);
        if (ng > 0) p.a_sdp[i].push_back(-b.topLeftCorner(ng, ng));
        if (nl > 0) p.a_lp[i] = -b.diagonal().tail(nl);
    }
    p.a_sdp[mq].push_back(MatrixXd::Identity(n, n));
    if (ng > 0) p.a_sdp[mq].push_back(MatrixXd::Zero(ng, ng));
    if (nl > 0) p.a_lp[mq] = VectorXd::Zero(nl);
    p.b = VectorXd::Zero(m);
    p.b(mq) = 1.0;

    VectorXd y0 = VectorXd::Zero(m);
    y0(mq) = Eigen::SelfAdjointEigenSolver<MatrixXd>(p.c_sdp[0], Eigen::EigenvaluesOnly).eigenvalues().minCoeff() - 1.0;
    const SdpResult r = solve_block_sdp(p, y0, opt.sdp);

    MatrixXd q = q0;
    for (int i = 0; i < mq; ++i) q += r.y(i) * basis[i];
    q = sym(q);

    Certificate cert;
    cert.canonical_tau = canonical.tau;
    cert.iterations = r.iterations;
    cert.gap = r.gap * scale;
    cert.q_g = q.topLeftCorner(ng, ng);
    cert.q_l = q.diagonal().tail(nl);
    const MatrixXd lmi = sym(q * a + a.transpose() * q);
    cert.residuals.lmi_max_eig =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(lmi, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    double qmin = std::numeric_limits<double>::infinity();
    if (ng > 0)
        qmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(cert.q_g, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (nl > 0) qmin = std::min(qmin, cert.q_l.minCoeff());
    cert.residuals.q_min_eig = qmin;
    cert.residuals.trace_err = std::abs(q.trace() - 1.0);
    // The recomputed margin of the returned Q is never below the solver's bound.
    cert.rho = -cert.residuals.lmi_max_eig;

    const bool positive = cert.rho > opt.rho_tol && qmin > 0.0 && cert.residuals.trace_err < 1e-8;
    if (positive) cert.status = CertStatus::RS;
    else if (r.converged) cert.status = CertStatus::NRS;
    else cert.status = CertStatus::SolverFailure;
    return cert;
}

MatrixXd transport_q(const Certificate& cert, const TauAssignment& tau_tilde) {
    if (tau_tilde.tau.size() != cert.q_l.size())
        throw Error(ErrorKind::DimensionMismatch, "tau assignment does not match certificate");
    Certificate moved = cert;
    moved.q_l = cert.q_l.cwiseProduct(tau_tilde.tau).cwiseQuotient(cert.canonical_tau);
    return moved.q();
}

double verify_certificate(const ReducedJacobian& j, const TauAssignment& tau_tilde, const Certificate& cert) {
    if (cert.status != CertStatus::RS) throw Error(ErrorKind::Domain, "only RS certificates can be verified");
    const MatrixXd a = build_a(j, tau_tilde);
    const MatrixXd q = transport_q(cert, tau_tilde);
    const MatrixXd m = sym(q * a + a.transpose() * q);
    const double top = Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (!(top < 0.0))
        throw Error(ErrorKind::CertificateViolated,
                    "transported certificate is not negative definite (max eig " + std::to_string(top) + ")");
    return top;
}

Certificate certify_at(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s, double lambda,
                       const Equilibrium* warm, const CertOptions& opt) {
    try {
        return solve_certificate(linearize(c, cal, s, lambda, warm), opt);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NearSingularAlgebraic) throw;
        Certificate cert;
        cert.status = CertStatus::NRS;
        cert.rho = -std::numeric_limits<double>::infinity();
        return cert;
    }
}

double margin_pct(double s_lambda, double snb_lambda) {
    return snb_lambda > 0.0 ? 100.0 * (snb_lambda - s_lambda) / snb_lambda : 0.0;
}

RobustBoundary find_robust_boundary(const NetworkCase& c, const LoadingScenario& s, const BoundaryOptions& opt) {
    const Calibration cal = opt.calibration ? *opt.calibration : calibrate(c);
    RobustBoundary out;
    out.nose = trace_nose(c, cal, s, opt.lambda_start, opt.trace);
    out.snb_lambda = out.nose.snb_lambda;
    const auto& pts = out.nose.points;

    std::vector<Certificate> certs(pts.size());
    parallel_for(static_cast<int>(pts.size()), opt.jobs, [&](int i) {
        certs[i] = certify_at(c, cal, s, pts[i].lambda, &pts[i].eq, opt.cert);
    });
    std::size_t first_nrs = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (certs[i].status == CertStatus::SolverFailure)
            throw Error(ErrorKind::NoConvergence,
                        "SDP solver failure at lambda=" + std::to_string(pts[i].lambda));
        if (certs[i].status == CertStatus::NRS) {
            first_nrs = i;
            break;
        }
    }
    if (first_nrs == 0) {
        out.rs_at_start = false;
        out.s_lambda = 0.0;
        out.margin_pct = margin_pct(out.s_lambda, out.snb_lambda);
        return out;
    }
    double lo = pts[first_nrs - 1].lambda;
    double hi = first_nrs < pts.size() ? pts[first_nrs].lambda : out.snb_lambda;
    Equilibrium warm = pts[first_nrs - 1].eq;
    while (hi - lo > opt.rel_bracket * hi) {
        const double mid = 0.5 * (lo + hi);
        Equilibrium eq;
        Certificate cert;
        try {
            eq = solve_powerflow(c, cal, s, mid, &warm);
            cert = certify_at(c, cal, s, mid, &eq, opt.cert);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoConvergence && e.kind() != ErrorKind::SingularJacobian) throw;
            hi = mid;
            continue;
        }
        if (cert.status == CertStatus::SolverFailure)
            throw Error(ErrorKind::NoConvergence, "SDP solver failure at lambda=" + std::to_string(mid));
        if (cert.status == CertStatus::RS) {
            lo = mid;
            warm = eq;
        } else {
            hi = mid;
        }
    }
    out.s_lambda = lo;
    out.margin_pct = margin_pct(out.s_lambda, out.snb_lambda);
    return out;
}

}  // namespace robstab
