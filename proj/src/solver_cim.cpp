#include <fluorsep/operators.hpp>
#include <fluorsep/random.hpp>
#include <fluorsep/solver_cim.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace fluorsep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-measurement data shared by both alternation blocks.
struct CimData {
    Eigen::MatrixXd a_r;      // ij x n_r
    Eigen::MatrixXd emission; // C^T B_m, i x n_m
    Eigen::MatrixXd g;        // i x j
    Eigen::VectorXd m;        // vec(M)

    CimData(const MeasurementGrid &meas, const BasisOperators &ops)
        : a_r{reflectance_design(meas, ops.br)},
          emission{meas.camera().responsivity().transpose() * ops.bm}, g{meas.gains().values()},
          m{meas.values().reshaped()} {}

    Eigen::VectorXd fluorescence(const WeightVector &w_m, const Eigen::VectorXd &p) const {
        const Eigen::MatrixXd f = ((emission * w_m) * p.transpose()).cwiseProduct(g);
        return f.reshaped();
    }
};

} // namespace

Eigen::MatrixXd predict_cim_pixels(const Eigen::VectorXd &reflectance,
                                   const Eigen::VectorXd &emission, const Eigen::VectorXd &p,
                                   const MeasurementGrid &m) {
    const auto &c = m.camera().responsivity();
    const auto &l = m.illuminants().matrix();
    if (reflectance.size() != c.rows() || emission.size() != c.rows() || p.size() != l.cols())
        throw std::invalid_argument("predict_cim_pixels: spectra must have " +
                                    std::to_string(c.rows()) + " bins and p " +
                                    std::to_string(l.cols()) + " entries");
    Eigen::MatrixXd out = c.transpose() * (reflectance.asDiagonal() * l);
    out += (c.transpose() * emission) * p.transpose();
    return out.cwiseProduct(m.gains().values());
}

CimSolver::CimSolver(BasisSet bases, CimTuning tuning)
    : bases_{std::move(bases)}, tuning_{tuning}, ops_{bases_} {
    tuning_.validate();
}

double CimSolver::objective(const MeasurementGrid &meas, const WeightVector &w_r,
                            const WeightVector &w_m, const Eigen::VectorXd &p) const {
    require_compatible(meas, bases_, "CimSolver::objective");
    const Eigen::VectorXd r = ops_.br * w_r;
    const Eigen::VectorXd e = ops_.bm * w_m;
    const Eigen::MatrixXd pred = predict_cim_pixels(r, e, p, meas);
    return (pred - meas.values()).squaredNorm() +
           tuning_.alpha * w_r.dot(ops_.reflectance_roughness * w_r) +
           tuning_.beta * w_m.dot(ops_.emission_roughness * w_m) * p.squaredNorm();
}

CimEstimate CimSolver::solve(const MeasurementGrid &meas) const {
    require_compatible(meas, bases_, "estimate_cim");
    const CimData data{meas, ops_};
    const int n_r = ops_.n_r;
    const int n_m = ops_.n_m;
    const int d = ops_.d;
    const int filters = meas.system().filters();
    const int lights = meas.system().lights();

    auto value = [&](const WeightVector &w_r, const WeightVector &w_m, const Eigen::VectorXd &p) {
        return (data.a_r * w_r + data.fluorescence(w_m, p) - data.m).squaredNorm() +
               tuning_.alpha * w_r.dot(ops_.reflectance_roughness * w_r) +
               tuning_.beta * w_m.dot(ops_.emission_roughness * w_m) * p.squaredNorm();
    };

    // Minimizes over (w_r, v) with fluorescence design `f`, extra quadratic
    // penalty `pen` on v, and `cons` v >= 0.
    auto solve_block = [&](const Eigen::MatrixXd &f, const Eigen::MatrixXd &pen,
                           const Eigen::MatrixXd &cons, const Eigen::VectorXd &warm) {
        const auto nv = f.cols();
        Eigen::MatrixXd x(data.m.size(), n_r + nv);
        x << data.a_r, f;
        Eigen::MatrixXd h = x.transpose() * x;
        h.topLeftCorner(n_r, n_r) += tuning_.alpha * ops_.reflectance_roughness;
        h.bottomRightCorner(nv, nv) += pen;
        h *= 2.0;
        h = 0.5 * (h + h.transpose()).eval();
        const Eigen::VectorXd c = -2.0 * x.transpose() * data.m;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d + cons.rows(), n_r + nv);
        a.topLeftCorner(d, n_r) = ops_.br;
        a.bottomRightCorner(cons.rows(), nv) = cons;
        Eigen::VectorXd lo = Eigen::VectorXd::Zero(a.rows());
        Eigen::VectorXd hi(a.rows());
        hi << Eigen::VectorXd::Ones(d), Eigen::VectorXd::Constant(cons.rows(), kInf);
        return solve_qp(h, c, a, lo, hi, tuning_.qp, warm).x;
    };

    auto run = [&](Eigen::VectorXd p) {
        CimEstimate est{
            .w_r = Eigen::VectorXd::Zero(n_r),
            .w_m = Eigen::VectorXd::Zero(n_m),
            .p = std::move(p),
            .reflectance = Spectrum::zeros(bases_.grid(), SpectralRole::reflectance),
            .emission = Spectrum::zeros(bases_.grid(), SpectralRole::emission),
            .history = {},
        };
        double current = kInf;
        const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(lights, lights);
        for (int outer = 1; outer <= tuning_.max_outer_iterations; ++outer) {
            // (w_r, w_m) with p fixed
            Eigen::MatrixXd f(data.m.size(), n_m);
            for (int a = 0; a < n_m; ++a) {
                const Eigen::MatrixXd col =
                    (data.emission.col(a) * est.p.transpose()).cwiseProduct(data.g);
                f.col(a) = col.reshaped();
            }
            Eigen::VectorXd warm(n_r + n_m);
            warm << est.w_r, est.w_m;
            Eigen::VectorXd y = solve_block(
                f, tuning_.beta * est.p.squaredNorm() * ops_.emission_roughness, ops_.bm, warm);
            double v = value(y.head(n_r), y.tail(n_m), est.p);
            if (v <= current) {
                est.w_r = y.head(n_r);
                est.w_m = y.tail(n_m);
                current = v;
            }

            // (w_r, p) with w_m fixed: column j only touches illuminant j
            const Eigen::VectorXd u = data.emission * est.w_m;
            Eigen::MatrixXd fp = Eigen::MatrixXd::Zero(data.m.size(), lights);
            for (int j = 0; j < lights; ++j)
                fp.block(static_cast<Eigen::Index>(j) * filters, j, filters, 1) =
                    u.cwiseProduct(data.g.col(j));
            warm.resize(n_r + lights);
            warm << est.w_r, est.p;
            y = solve_block(fp,
                            tuning_.beta * est.w_m.dot(ops_.emission_roughness * est.w_m) * identity,
                            identity, warm);
            v = value(y.head(n_r), est.w_m, y.tail(lights));
            if (v <= current) {
                est.w_r = y.head(n_r);
                est.p = y.tail(lights);
                current = v;
            }

            // (w_m / s, p * s) leaves the objective unchanged; keep the
            // emission peak at one.
            const double peak = (ops_.bm * est.w_m).maxCoeff();
            if (peak > 0 && est.p.norm() > 0) {
                est.w_m /= peak;
                est.p *= peak;
            }

            const double previous = est.history.empty() ? kInf : est.history.back();
            est.history.push_back(current);
            est.outer_iterations = outer;
            if (current == 0.0 ||
                (std::isfinite(previous) && previous - current <= tuning_.objective_tol * previous)) {
                est.converged = true;
                break;
            }
        }
        est.objective = current;
        return est;
    };

    CimEstimate best = run(Eigen::VectorXd::Ones(lights));
    Rng rng{stream_seed(tuning_.seed, "cim/restart")};
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    for (int r = 0; r < tuning_.restarts; ++r) {
        Eigen::VectorXd p(lights);
        for (auto &v : p)
            v = unit(rng);
        CimEstimate trial = run(std::move(p));
        if (trial.objective < best.objective)
            best = std::move(trial);
    }

    const double fluorescence = data.fluorescence(best.w_m, best.p).norm();
    if (fluorescence <= 1e-8 * data.m.norm()) {
        best.degenerate = true;
        best.w_m.setZero();
        best.p.setZero();
        best.objective = value(best.w_r, best.w_m, best.p);
    }
    best.residual_norm =
        (data.a_r * best.w_r + data.fluorescence(best.w_m, best.p) - data.m).norm();
    best.reflectance = Spectrum{bases_.grid(), project_box(ops_.br * best.w_r, 0.0, 1.0),
                                SpectralRole::reflectance};
    if (best.degenerate)
        return best;
    const Eigen::VectorXd e = (ops_.bm * best.w_m).cwiseMax(0.0);
    const double peak = e.maxCoeff();
    best.emission = Spectrum{bases_.grid(), e / peak, SpectralRole::emission};
    best.w_m /= peak;
    best.p *= peak;
    best.normalization_factor = peak;
    return best;
}

CimEstimate estimate_cim(const MeasurementGrid &m, const BasisSet &bases, const CimTuning &tuning) {
    return CimSolver{bases, tuning}.solve(m);
}

} // namespace fluorsep
