#include <fluorsep/forward.hpp>
#include <fluorsep/random.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

namespace fluorsep {

namespace {

std::string shape(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

std::vector<std::string> default_names(std::vector<std::string> names, std::size_t n,
                                       const char *prefix) {
    if (names.empty()) {
        for (std::size_t k = 0; k < n; ++k)
            names.push_back(prefix + std::to_string(k + 1));
    }
    if (names.size() != n)
        throw std::invalid_argument(std::string{prefix} + ": " + std::to_string(names.size()) +
                                    " names for " + std::to_string(n) + " spectra");
    return names;
}

} // namespace

CameraModel::CameraModel(Spectrum quantum_efficiency, std::vector<Spectrum> filters,
                         std::vector<std::string> names)
    : qe_{std::move(quantum_efficiency)}, filters_{std::move(filters)} {
    if (filters_.empty())
        throw std::invalid_argument("CameraModel: at least one filter is required");
    const auto &qe = qe_.values();
    if (qe.minCoeff() < 0 || qe.maxCoeff() > 1)
        throw std::invalid_argument("CameraModel: quantum efficiency must lie in [0, 1]");
    responsivity_.resize(qe_.size(), static_cast<Eigen::Index>(filters_.size()));
    for (std::size_t k = 0; k < filters_.size(); ++k) {
        require_same_grid(qe_.grid(), filters_[k].grid(), "CameraModel");
        const auto &s = filters_[k].values();
        if (s.minCoeff() < 0 || s.maxCoeff() > 1)
            throw std::invalid_argument("CameraModel: filter transmissivity must lie in [0, 1]");
        responsivity_.col(static_cast<Eigen::Index>(k)) = qe.cwiseProduct(s);
    }
    names_ = default_names(std::move(names), filters_.size(), "filter");
}

IlluminantSet::IlluminantSet(std::vector<Spectrum> illuminants, std::vector<std::string> names)
    : illuminants_{std::move(illuminants)} {
    if (illuminants_.empty())
        throw std::invalid_argument("IlluminantSet: at least one illuminant is required");
    const auto &grid = illuminants_.front().grid();
    matrix_.resize(grid.size(), static_cast<Eigen::Index>(illuminants_.size()));
    for (std::size_t k = 0; k < illuminants_.size(); ++k) {
        require_same_grid(grid, illuminants_[k].grid(), "IlluminantSet");
        if (illuminants_[k].values().minCoeff() < 0)
            throw std::invalid_argument("IlluminantSet: negative illuminant power");
        matrix_.col(static_cast<Eigen::Index>(k)) = illuminants_[k].values();
    }
    names_ = default_names(std::move(names), illuminants_.size(), "light");
}

ImagingSystem::ImagingSystem(CameraModel c, IlluminantSet l)
    : camera{std::move(c)}, illuminants{std::move(l)} {
    require_same_grid(camera.grid(), illuminants.grid(), "ImagingSystem");
}

GainMatrix::GainMatrix(Eigen::MatrixXd values) : values_{std::move(values)} {
    if (values_.size() == 0)
        throw std::invalid_argument("GainMatrix: empty");
    if (!values_.allFinite() || values_.minCoeff() <= 0)
        throw std::invalid_argument("GainMatrix: gains must be finite and strictly positive");
}

GainMatrix GainMatrix::uniform(int filters, int illuminants, double gain) {
    return GainMatrix{Eigen::MatrixXd::Constant(filters, illuminants, gain)};
}

SurfacePatch::SurfacePatch(Spectrum r, DonaldsonMatrix d)
    : reflectance{std::move(r)}, donaldson{std::move(d)} {
    if (reflectance.role() != SpectralRole::reflectance)
        reflectance = Spectrum{reflectance.grid(), reflectance.values(), SpectralRole::reflectance};
    require_same_grid(reflectance.grid(), donaldson.grid(), "SurfacePatch");
    if (donaldson.entries().minCoeff() < 0)
        throw std::invalid_argument("SurfacePatch: negative Donaldson entry");
}

SurfacePatch SurfacePatch::reflective(Spectrum r) {
    auto grid = r.grid();
    return {std::move(r), DonaldsonMatrix::zeros(grid)};
}

MeasurementGrid::MeasurementGrid(Eigen::MatrixXd values,
                                 std::shared_ptr<const ImagingSystem> system, GainMatrix gains)
    : values_{std::move(values)}, system_{std::move(system)}, gains_{std::move(gains)} {
    if (!system_)
        throw std::invalid_argument("MeasurementGrid: missing imaging system");
    const int i = system_->filters();
    const int j = system_->lights();
    if (values_.rows() != i || values_.cols() != j)
        throw std::invalid_argument("MeasurementGrid: pixel values are " +
                                    shape(values_.rows(), values_.cols()) +
                                    " but the system has " + shape(i, j) +
                                    " filters x illuminants");
    if (gains_.rows() != i || gains_.cols() != j)
        throw std::invalid_argument("MeasurementGrid: gains are " +
                                    shape(gains_.rows(), gains_.cols()) + " but expected " +
                                    shape(i, j));
    if (!values_.allFinite())
        throw std::invalid_argument("MeasurementGrid: non-finite pixel value");
}

MeasurementGrid MeasurementGrid::with_values(Eigen::MatrixXd values) const {
    return {std::move(values), system_, gains_};
}

Eigen::MatrixXd predict_pixels(const Eigen::VectorXd &reflectance,
                               const Eigen::MatrixXd &donaldson, const ImagingSystem &system,
                               const GainMatrix &gains) {
    const auto &c = system.camera.responsivity();
    const auto &l = system.illuminants.matrix();
    const auto d = c.rows();
    if (reflectance.size() != d || donaldson.rows() != d || donaldson.cols() != d)
        throw std::invalid_argument("predict_pixels: surface is " + shape(reflectance.size(), 1) +
                                    " / " + shape(donaldson.rows(), donaldson.cols()) +
                                    " but the system grid has " + std::to_string(d) + " bins");
    if (gains.rows() != c.cols() || gains.cols() != l.cols())
        throw std::invalid_argument("predict_pixels: gains are " +
                                    shape(gains.rows(), gains.cols()) + " but expected " +
                                    shape(c.cols(), l.cols()));
    Eigen::MatrixXd radiance = donaldson * l;
    radiance += reflectance.asDiagonal() * l;
    Eigen::MatrixXd m = c.transpose() * radiance;
    return m.cwiseProduct(gains.values());
}

MeasurementGrid simulate(const SurfacePatch &patch, std::shared_ptr<const ImagingSystem> system,
                         const GainMatrix &gains) {
    if (!system)
        throw std::invalid_argument("simulate: missing imaging system");
    require_same_grid(system->grid(), patch.reflectance.grid(), "simulate");
    auto m = predict_pixels(patch.reflectance.values(), patch.donaldson.entries(), *system, gains);
    return {std::move(m), std::move(system), gains};
}

GainMatrix calibrate_gain_max_one(const SurfacePatch &patch, const ImagingSystem &system,
                                  GainMode mode) {
    require_same_grid(system.grid(), patch.reflectance.grid(), "calibrate_gain_max_one");
    const auto raw = predict_pixels(patch.reflectance.values(), patch.donaldson.entries(), system,
                                    GainMatrix::uniform(system.filters(), system.lights()));
    if (mode == GainMode::uniform) {
        const double peak = raw.maxCoeff();
        return GainMatrix::uniform(system.filters(), system.lights(), peak > 0 ? 1.0 / peak : 1.0);
    }
    Eigen::MatrixXd g(raw.rows(), raw.cols());
    for (Eigen::Index o = 0; o < raw.rows(); ++o) {
        const double peak = raw.row(o).maxCoeff();
        g.row(o).setConstant(peak > 0 ? 1.0 / peak : 1.0);
    }
    return GainMatrix{std::move(g)};
}

Spectrum RadianceComponents::total() const {
    return {reflected.grid(), reflected.values() + fluoresced.values()};
}

RadianceComponents decompose_radiance(const SurfacePatch &patch, const Spectrum &illuminant) {
    require_same_grid(patch.reflectance.grid(), illuminant.grid(), "decompose_radiance");
    const auto &l = illuminant.values();
    return {Spectrum{illuminant.grid(), l.cwiseProduct(patch.reflectance.values())},
            Spectrum{illuminant.grid(), patch.donaldson.entries() * l}};
}

MeasurementGrid add_noise(const MeasurementGrid &m, double snr_db, std::uint64_t seed) {
    if (m.values().size() == 0)
        throw std::invalid_argument("add_noise: empty measurement");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("add_noise: SNR must be a number or +infinity");
    if (std::isinf(snr_db))
        return m;
    const double signal_power = m.values().squaredNorm() / static_cast<double>(m.values().size());
    const double sigma = std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
    Rng rng{seed};
    std::normal_distribution<double> normal{0.0, 1.0};
    Eigen::MatrixXd noisy = m.values();
    // column-major fill keeps the draw order fixed
    for (Eigen::Index p = 0; p < noisy.cols(); ++p)
        for (Eigen::Index o = 0; o < noisy.rows(); ++o)
            noisy(o, p) += sigma * normal(rng);
    return m.with_values(std::move(noisy));
}

std::vector<Spectrum> rect_channels(int count, const WavelengthGrid &grid, SpectralRole role) {
    const int d = grid.size();
    if (count < 1 || count > d)
        throw std::invalid_argument("rect_channels: channel count must be in [1, " +
                                    std::to_string(d) + "], got " + std::to_string(count));
    std::vector<Spectrum> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) {
        const int lo = static_cast<int>(static_cast<long long>(c) * d / count);
        const int hi = static_cast<int>(static_cast<long long>(c + 1) * d / count);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
        v.segment(lo, hi - lo).setOnes();
        out.emplace_back(grid, std::move(v), role);
    }
    return out;
}

ImagingSystem make_rect_system(int n_filters, int n_illuminants, const WavelengthGrid &grid) {
    Spectrum qe{grid, Eigen::VectorXd::Ones(grid.size()), SpectralRole::filter};
    return {CameraModel{std::move(qe), rect_channels(n_filters, grid, SpectralRole::filter)},
            IlluminantSet{rect_channels(n_illuminants, grid, SpectralRole::illuminant)}};
}

ImagingSystem make_bispectral_system(const WavelengthGrid &grid) {
    return make_rect_system(grid.size(), grid.size(), grid);
}

} // namespace fluorsep
