#include "robstab/linmodel.hpp"

#include <cmath>

namespace robstab {

MatrixXd ReducedJacobian::full() const {
    MatrixXd j(n_G + n_L, n_G + n_L);
    j << j_gg, j_gl, j_lg, j_ll;
    return j;
}

ReducedJacobian ReducedJacobian::from_full(const MatrixXd& j, int n_G) {
    if (j.rows() != j.cols() || n_G < 0 || n_G > j.rows())
        throw Error(ErrorKind::DimensionMismatch, "bad Jacobian partition");
    ReducedJacobian r;
    r.n_G = n_G;
    r.n_L = static_cast<int>(j.rows()) - n_G;
    r.j_gg = j.topLeftCorner(n_G, n_G);
    r.j_gl = j.topRightCorner(n_G, r.n_L);
    r.j_lg = j.bottomLeftCorner(r.n_L, n_G);
    r.j_ll = j.bottomRightCorner(r.n_L, r.n_L);
    return r;
}

TauAssignment TauAssignment::uniform(int n_L, double value) {
    return {VectorXd::Constant(n_L, value)};
}

TauAssignment TauAssignment::per_load(const std::vector<double>& taus) {
    TauAssignment t{VectorXd(2 * static_cast<Eigen::Index>(taus.size()))};
    for (std::size_t j = 0; j < taus.size(); ++j) t.tau(2 * j) = t.tau(2 * j + 1) = taus[j];
    return t;
}

namespace {

DaeBlocks split(const DaeModel::Jacobian& J, int n_G, int n_L) {
    DaeBlocks b;
    b.n_G = n_G;
    b.n_L = n_L;
    b.m = static_cast<int>(J.gy.rows());
    b.f_g_xg = J.fx.topLeftCorner(n_G, n_G);
    b.f_g_xl = J.fx.topRightCorner(n_G, n_L);
    b.f_g_y = J.fy.topRows(n_G);
    b.f_l_xg = J.fx.bottomLeftCorner(n_L, n_G);
    b.f_l_xl = J.fx.bottomRightCorner(n_L, n_L);
    b.f_l_y = J.fy.bottomRows(n_L);
    b.g_xg = J.gx.leftCols(n_G);
    b.g_xl = J.gx.rightCols(n_L);
    b.g_y = J.gy;
    return b;
}

}  // namespace

DaeBlocks assemble_blocks(const DaeModel& m, const Equilibrium& eq) {
    const auto J = m.jacobian(eq.states(), eq.algebraic(m));
    return split(J, m.n_g_states(), 2 * m.n_load());
}

DaeBlocks assemble_blocks(const NetworkCase& c, const Calibration& cal, const Equilibrium& eq) {
    return assemble_blocks(make_model(c, cal, eq.loading, eq.lambda), eq);
}

DaeBlocks assemble_blocks_fd(const DaeModel& m, const Equilibrium& eq, double h) {
    const VectorXd x = eq.states(), y = eq.algebraic(m);
    DaeModel::Jacobian J{MatrixXd(m.nx(), m.nx()), MatrixXd(m.nx(), m.ny()),
                         MatrixXd(m.ny(), m.nx()), MatrixXd(m.ny(), m.ny())};
    for (int i = 0; i < m.nx(); ++i) {
        VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        J.fx.col(i) = (m.f(xp, y) - m.f(xm, y)) / (2 * h);
        J.gx.col(i) = (m.g(xp, y) - m.g(xm, y)) / (2 * h);
    }
    for (int i = 0; i < m.ny(); ++i) {
        VectorXd yp = y, ym = y;
        yp(i) += h;
        ym(i) -= h;
        J.fy.col(i) = (m.f(x, yp) - m.f(x, ym)) / (2 * h);
        J.gy.col(i) = (m.g(x, yp) - m.g(x, ym)) / (2 * h);
    }
    return split(J, m.n_g_states(), 2 * m.n_load());
}

double algebraic_condition(const DaeBlocks& b) {
    Eigen::JacobiSVD<MatrixXd> svd(b.g_y);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 1.0;
    const double smin = s(s.size() - 1);
    return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

ReducedJacobian reduce(const DaeBlocks& b, double max_condition) {
    if (algebraic_condition(b) > max_condition)
        throw Error(ErrorKind::NearSingularAlgebraic,
                    "algebraic Jacobian is near singular (close to saddle-node)");
    const Eigen::PartialPivLU<MatrixXd> lu(b.g_y);
    const MatrixXd yg = lu.solve(b.g_xg);
    const MatrixXd yl = lu.solve(b.g_xl);
    ReducedJacobian r;
    r.n_G = b.n_G;
    r.n_L = b.n_L;
    r.j_gg = b.f_g_xg - b.f_g_y * yg;
    r.j_gl = b.f_g_xl - b.f_g_y * yl;
    r.j_lg = b.f_l_xg - b.f_l_y * yg;
    r.j_ll = b.f_l_xl - b.f_l_y * yl;
    return r;
}

MatrixXd build_a(const ReducedJacobian& j, const TauAssignment& tau) {
    if (tau.tau.size() != j.n_L)
        throw Error(ErrorKind::DimensionMismatch, "tau assignment does not match load states");
    if ((tau.tau.array() <= 0.0).any())
        throw Error(ErrorKind::Domain, "time constants must be positive");
    MatrixXd a = j.full();
    a.bottomRows(j.n_L) = tau.tau.cwiseInverse().asDiagonal() * a.bottomRows(j.n_L);
    return a;
}

ReducedJacobian linearize(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                          double lambda, const Equilibrium* warm, Equilibrium* eq_out) {
    const Equilibrium eq = solve_powerflow(c, cal, s, lambda, warm);
    if (eq_out) *eq_out = eq;
    return reduce(assemble_blocks(make_model(c, cal, s, lambda), eq));
}

ReducedJacobian absorb_known_dynamics(const ReducedJacobian& j, const std::vector<TimeConstant>& known) {
    if (static_cast<int>(known.size()) != j.n_L)
        throw Error(ErrorKind::DimensionMismatch, "known-tau vector does not match load states");
    const MatrixXd full = j.full();
    std::vector<int> order;
    std::vector<double> scale;
    for (int i = 0; i < j.n_G; ++i) {
        order.push_back(i);
        scale.push_back(1.0);
    }
    for (int k = 0; k < j.n_L; ++k)
        if (known[k]) {
            if (!(*known[k] > 0.0)) throw Error(ErrorKind::Domain, "time constants must be positive");
            order.push_back(j.n_G + k);
            scale.push_back(1.0 / *known[k]);
        }
    const int n_G = static_cast<int>(order.size());
    for (int k = 0; k < j.n_L; ++k)
        if (!known[k]) {
            order.push_back(j.n_G + k);
            scale.push_back(1.0);
        }
    const int n = static_cast<int>(order.size());
    MatrixXd p(n, n);
    for (int r = 0; r < n; ++r)
        for (int q = 0; q < n; ++q) p(r, q) = scale[r] * full(order[r], order[q]);
    return ReducedJacobian::from_full(p, n_G);
}

std::vector<TimeConstant> declared_taus(const NetworkCase& c) {
    std::vector<TimeConstant> out;
    for (const auto& l : c.loads) {
        out.push_back(l.tau_g);
        out.push_back(l.tau_b);
    }
    return out;
}

}  // namespace robstab
