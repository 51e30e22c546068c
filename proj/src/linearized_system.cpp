#include <fluorsep/linearized_system.hpp>
#include <fluorsep/operators.hpp>

#include <stdexcept>
#include <string>

namespace fluorsep {

namespace {

Eigen::MatrixXd masked_outer(const Eigen::VectorXd &emission, const Eigen::VectorXd &excitation) {
    Eigen::MatrixXd x = emission * excitation.transpose();
    x.triangularView<Eigen::Upper>().setZero();
    return x;
}

} // namespace

BasisOperators::BasisOperators(const BasisSet &bases)
    : d{bases.grid().size()}, n_r{bases.reflectance.size()}, n_x{bases.excitation.size()},
      n_m{bases.emission.size()}, br{bases.reflectance.functions()},
      bx{bases.excitation.functions()}, bm{bases.emission.functions()} {
    require_same_grid(bases.reflectance.grid(), bases.excitation.grid(), "BasisSet");
    require_same_grid(bases.reflectance.grid(), bases.emission.grid(), "BasisSet");

    const Eigen::MatrixXd grad = difference_operator(d);
    const Eigen::MatrixXd gr = grad * br;
    reflectance_roughness = gr.transpose() * gr;
    const Eigen::MatrixXd gx = grad * bx;
    excitation_roughness = gx.transpose() * gx;
    const Eigen::MatrixXd gm = grad * bm;
    emission_roughness = gm.transpose() * gm;

    const Eigen::Index cells = static_cast<Eigen::Index>(d) * d;
    const Eigen::Index diff_cells = static_cast<Eigen::Index>(d - 1) * d;
    Eigen::MatrixXd f(cells, n_w());
    Eigen::MatrixXd f_rows(diff_cells, n_w());
    Eigen::MatrixXd f_cols(diff_cells, n_w());
    for (int a = 0; a < n_m; ++a) {
        for (int b = 0; b < n_x; ++b) {
            const int k = a * n_x + b;
            const Eigen::MatrixXd x = masked_outer(bm.col(a), bx.col(b));
            f.col(k) = x.reshaped();
            f_rows.col(k) = (x.topRows(d - 1) - x.bottomRows(d - 1)).reshaped();
            f_cols.col(k) = (x.leftCols(d - 1) - x.rightCols(d - 1)).reshaped();
        }
    }
    donaldson_gram = f.transpose() * f;
    donaldson_roughness = f_rows.transpose() * f_rows;
    donaldson_roughness.noalias() += f_cols.transpose() * f_cols;
}

Eigen::MatrixXd BasisOperators::donaldson(const Eigen::MatrixXd &w) const {
    Eigen::MatrixXd x = bm * w * bx.transpose();
    x.triangularView<Eigen::Upper>().setZero();
    return x;
}

Eigen::MatrixXd BasisOperators::donaldson_adjoint(const Eigen::MatrixXd &v) const {
    Eigen::MatrixXd masked = v;
    masked.triangularView<Eigen::Upper>().setZero();
    return bm.transpose() * masked * bx;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd &w) {
    Eigen::VectorXd v(w.size());
    for (Eigen::Index a = 0; a < w.rows(); ++a)
        for (Eigen::Index b = 0; b < w.cols(); ++b)
            v[a * w.cols() + b] = w(a, b);
    return v;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd &v, int rows, int cols) {
    if (v.size() != static_cast<Eigen::Index>(rows) * cols)
        throw std::invalid_argument("unflatten: size mismatch");
    Eigen::MatrixXd w(rows, cols);
    for (int a = 0; a < rows; ++a)
        for (int b = 0; b < cols; ++b)
            w(a, b) = v[a * cols + b];
    return w;
}

Eigen::MatrixXd reflectance_design(const MeasurementGrid &m, const Eigen::MatrixXd &br) {
    const auto &c = m.camera().responsivity();
    const auto &l = m.illuminants().matrix();
    const auto &g = m.gains().values();
    if (br.rows() != c.rows())
        throw std::invalid_argument("reflectance_design: basis has " + std::to_string(br.rows()) +
                                    " rows, system grid has " + std::to_string(c.rows()));
    Eigen::MatrixXd out(g.size(), br.cols());
    for (Eigen::Index k = 0; k < br.cols(); ++k) {
        const Eigen::MatrixXd col = (c.transpose() * (br.col(k).asDiagonal() * l)).cwiseProduct(g);
        out.col(k) = col.reshaped();
    }
    return out;
}

void require_compatible(const MeasurementGrid &m, const BasisSet &bases, const char *who) {
    require_same_grid(m.grid(), bases.reflectance.grid(), who);
    require_same_grid(m.grid(), bases.excitation.grid(), who);
    require_same_grid(m.grid(), bases.emission.grid(), who);
}

LinearizedSystem::LinearizedSystem(const MeasurementGrid &meas, const BasisOperators &ops)
    : n_r_{ops.n_r}, filters_{meas.system().filters()}, lights_{meas.system().lights()} {
    if (meas.grid().size() != ops.d)
        throw std::invalid_argument("LinearizedSystem: measurement grid has " +
                                    std::to_string(meas.grid().size()) + " bins, bases have " +
                                    std::to_string(ops.d));
    const auto &c = meas.camera().responsivity();
    const auto &l = meas.illuminants().matrix();
    const auto &g = meas.gains().values();
    const int d = ops.d;
    const Eigen::Index ij = static_cast<Eigen::Index>(filters_) * lights_;

    a_.resize(ij, ops.n());
    a_.leftCols(ops.n_r) = reflectance_design(meas, ops.br);

    // (T o (u v^T)) L has rows u_o * sum_{p<o} v_p L(p,:), a prefix sum over L.
    std::vector<Eigen::MatrixXd> prefix(static_cast<std::size_t>(ops.n_x));
    for (int b = 0; b < ops.n_x; ++b) {
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d, l.cols());
        for (int o = 1; o < d; ++o)
            p.row(o) = p.row(o - 1) + ops.bx(o - 1, b) * l.row(o - 1);
        prefix[static_cast<std::size_t>(b)] = std::move(p);
    }
    for (int a = 0; a < ops.n_m; ++a) {
        const Eigen::MatrixXd ca = c.transpose() * ops.bm.col(a).asDiagonal();
        for (int b = 0; b < ops.n_x; ++b) {
            const Eigen::MatrixXd col =
                (ca * prefix[static_cast<std::size_t>(b)]).cwiseProduct(g);
            a_.col(ops.n_r + a * ops.n_x + b) = col.reshaped();
        }
    }

    m_ = meas.values().reshaped();
    gram_ = a_.transpose() * a_;
    atm_ = a_.transpose() * m_;
    mm_ = m_.squaredNorm();
}

double LinearizedSystem::data_term(const Eigen::VectorXd &x) const {
    return std::max(0.0, x.dot(gram_ * x) - 2.0 * x.dot(atm_) + mm_);
}

Eigen::MatrixXd LinearizedSystem::predict(const Eigen::VectorXd &x) const {
    const Eigen::VectorXd v = a_ * x;
    return v.reshaped(filters_, lights_);
}

} // namespace fluorsep
