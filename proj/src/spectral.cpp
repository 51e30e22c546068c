#include <fluorsep/spectral.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fluorsep {

namespace {

constexpr double kRangeSlack = 1e-9;

std::string describe(const WavelengthGrid &g) {
    std::ostringstream os;
    os << "[" << g.start() << " nm, step " << g.step() << " nm, " << g.size() << " bins]";
    return os.str();
}

} // namespace

WavelengthGrid::WavelengthGrid(double start_nm, double step_nm, int count)
    : start_{start_nm}, step_{step_nm}, count_{count} {
    if (!std::isfinite(start_nm) || !std::isfinite(step_nm) || step_nm <= 0)
        throw std::invalid_argument("WavelengthGrid: step must be positive and finite");
    if (count < 2)
        throw std::invalid_argument("WavelengthGrid: at least two samples are required");
}

WavelengthGrid WavelengthGrid::standard() { return {380.0, 4.0, 156}; }

WavelengthGrid WavelengthGrid::spanning(double first_nm, double last_nm, int count) {
    if (count < 2 || !(last_nm > first_nm))
        throw std::invalid_argument("WavelengthGrid::spanning: need last > first and count >= 2");
    return {first_nm, (last_nm - first_nm) / (count - 1), count};
}

Eigen::VectorXd WavelengthGrid::wavelengths() const {
    Eigen::VectorXd w(count_);
    for (int k = 0; k < count_; ++k)
        w[k] = wavelength(k);
    return w;
}

std::string_view to_string(SpectralRole role) {
    switch (role) {
    case SpectralRole::generic: return "generic";
    case SpectralRole::reflectance: return "reflectance";
    case SpectralRole::illuminant: return "illuminant";
    case SpectralRole::filter: return "filter";
    case SpectralRole::excitation: return "excitation";
    case SpectralRole::emission: return "emission";
    }
    return "unknown";
}

Spectrum::Spectrum(WavelengthGrid grid, Eigen::VectorXd values, SpectralRole role)
    : grid_{grid}, values_{std::move(values)}, role_{role} {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("Spectrum: " + std::to_string(values_.size()) +
                                    " values for a grid of " + std::to_string(grid_.size()) +
                                    " bins");
    if (!values_.allFinite())
        throw std::invalid_argument("Spectrum: non-finite value");
    if (role_ == SpectralRole::generic)
        return;
    if (values_.minCoeff() < -kRangeSlack)
        throw std::invalid_argument(std::string{"Spectrum: negative value in "} +
                                    std::string{to_string(role_)} + " spectrum");
    if (role_ == SpectralRole::reflectance && values_.maxCoeff() > 1.0 + kRangeSlack)
        throw std::invalid_argument("Spectrum: reflectance above 1");
}

Spectrum Spectrum::zeros(const WavelengthGrid &grid, SpectralRole role) {
    return {grid, Eigen::VectorXd::Zero(grid.size()), role};
}

Spectrum Spectrum::monochromatic(const WavelengthGrid &grid, int bin, double amplitude,
                                 SpectralRole role) {
    if (bin < 0 || bin >= grid.size())
        throw std::invalid_argument("Spectrum::monochromatic: bin out of range");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.size());
    v[bin] = amplitude;
    return {grid, std::move(v), role};
}

DonaldsonMatrix::DonaldsonMatrix(WavelengthGrid grid, Eigen::MatrixXd entries, double tolerance)
    : grid_{grid}, entries_{std::move(entries)} {
    const int d = grid_.size();
    if (entries_.rows() != d || entries_.cols() != d)
        throw std::invalid_argument("DonaldsonMatrix: expected " + std::to_string(d) + "x" +
                                    std::to_string(d) + ", got " +
                                    std::to_string(entries_.rows()) + "x" +
                                    std::to_string(entries_.cols()));
    if (!entries_.allFinite())
        throw std::invalid_argument("DonaldsonMatrix: non-finite entry");
    for (int p = 0; p < d; ++p)
        for (int o = 0; o <= p; ++o)
            if (entries_(o, p) != 0.0)
                throw std::invalid_argument(
                    "DonaldsonMatrix: nonzero entry on or above the diagonal");
    if (d > 0 && entries_.minCoeff() < -tolerance)
        throw std::invalid_argument("DonaldsonMatrix: negative entry");
}

DonaldsonMatrix DonaldsonMatrix::zeros(const WavelengthGrid &grid) {
    return {grid, Eigen::MatrixXd::Zero(grid.size(), grid.size())};
}

std::string_view to_string(BasisFamily family) {
    switch (family) {
    case BasisFamily::reflectance: return "reflectance";
    case BasisFamily::excitation: return "excitation";
    case BasisFamily::emission: return "emission";
    }
    return "unknown";
}

BasisFamily basis_family_from_string(std::string_view name) {
    if (name == "reflectance") return BasisFamily::reflectance;
    if (name == "excitation") return BasisFamily::excitation;
    if (name == "emission") return BasisFamily::emission;
    throw std::invalid_argument("unknown basis family '" + std::string{name} + "'");
}

LinearBasis::LinearBasis(WavelengthGrid grid, Eigen::MatrixXd functions, BasisFamily family)
    : grid_{grid}, functions_{std::move(functions)}, family_{family} {
    if (functions_.rows() != grid_.size())
        throw std::invalid_argument("LinearBasis: " + std::to_string(functions_.rows()) +
                                    " rows for a grid of " + std::to_string(grid_.size()) +
                                    " bins");
    if (functions_.cols() < 1 || functions_.cols() > functions_.rows())
        throw std::invalid_argument("LinearBasis: need 1 <= k <= d basis functions");
    const Eigen::MatrixXd gram = functions_.transpose() * functions_;
    const double dev =
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (!(dev < kOrthonormalityTolerance))
        throw std::invalid_argument("LinearBasis: columns are not orthonormal (deviation " +
                                    std::to_string(dev) + ")");
}

WeightVector LinearBasis::project(const Eigen::VectorXd &values) const {
    if (values.size() != functions_.rows())
        throw std::invalid_argument("LinearBasis::project: length mismatch");
    return functions_.transpose() * values;
}

LinearBasis LinearBasis::truncated(int k) const {
    if (k < 1 || k > size())
        throw std::invalid_argument("LinearBasis::truncated: k out of range");
    return {grid_, functions_.leftCols(k), family_};
}

LinearBasis derive_basis(std::span<const Spectrum> samples, int k, BasisFamily family) {
    if (samples.empty())
        throw std::invalid_argument("derive_basis: no samples");
    const WavelengthGrid &grid = samples.front().grid();
    const int d = grid.size();
    const int n = static_cast<int>(samples.size());
    if (k < 1 || k > std::min(d, n))
        throw std::invalid_argument("derive_basis: k must be in [1, min(d, sample count)] = [1, " +
                                    std::to_string(std::min(d, n)) + "], got " +
                                    std::to_string(k));
    Eigen::MatrixXd data(d, n);
    for (int c = 0; c < n; ++c) {
        require_same_grid(grid, samples[c].grid(), "derive_basis");
        data.col(c) = samples[c].values();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU);
    Eigen::MatrixXd u = svd.matrixU().leftCols(k);
    for (int c = 0; c < k; ++c) {
        Eigen::Index at = 0;
        u.col(c).cwiseAbs().maxCoeff(&at);
        if (u(at, c) < 0)
            u.col(c) = -u.col(c);
    }
    // Re-orthonormalise to remove SVD round-off before the tolerance check.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
    for (int c = 0; c < k; ++c)
        if (q.col(c).dot(u.col(c)) < 0)
            q.col(c) = -q.col(c);
    return {grid, std::move(q), family};
}

double variance_explained(const LinearBasis &basis, std::span<const Spectrum> samples) {
    if (samples.empty())
        throw std::invalid_argument("variance_explained: no samples");
    double total = 0.0;
    double captured = 0.0;
    for (const auto &s : samples) {
        require_same_grid(basis.grid(), s.grid(), "variance_explained");
        total += s.values().squaredNorm();
        captured += basis.project(s.values()).squaredNorm();
    }
    if (total == 0.0)
        return 1.0;
    return std::clamp(captured / total, 0.0, 1.0);
}

Spectrum synthesize(const LinearBasis &basis, const WeightVector &weights, SpectralRole role) {
    if (weights.size() != basis.size())
        throw std::invalid_argument("synthesize: " + std::to_string(weights.size()) +
                                    " weights for " + std::to_string(basis.size()) +
                                    " basis functions");
    return {basis.grid(), basis.functions() * weights, role};
}

Eigen::MatrixXd stokes_mask(int d) {
    if (d < 1)
        throw std::invalid_argument("stokes_mask: d must be positive");
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(d, d);
    for (int p = 0; p < d; ++p)
        for (int o = p + 1; o < d; ++o)
            t(o, p) = 1.0;
    return t;
}

DonaldsonMatrix donaldson_from_fluorophores(std::span<const Fluorophore> fluorophores) {
    if (fluorophores.empty())
        throw std::invalid_argument("donaldson_from_fluorophores: no fluorophores");
    const WavelengthGrid &grid = fluorophores.front().excitation.grid();
    const int d = grid.size();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    for (const auto &f : fluorophores) {
        require_same_grid(grid, f.excitation.grid(), "donaldson_from_fluorophores");
        require_same_grid(grid, f.emission.grid(), "donaldson_from_fluorophores");
        if (f.excitation.values().minCoeff() < 0 || f.emission.values().minCoeff() < 0)
            throw std::invalid_argument("donaldson_from_fluorophores: negative spectrum value");
        sum.noalias() += f.emission.values() * f.excitation.values().transpose();
    }
    sum.triangularView<Eigen::Upper>().setZero();
    return {grid, std::move(sum)};
}

Eigen::VectorXd resample(const std::vector<double> &wavelengths, const Eigen::VectorXd &values,
                         const WavelengthGrid &target) {
    const auto n = wavelengths.size();
    if (n != static_cast<std::size_t>(values.size()))
        throw std::invalid_argument("resample: wavelength/value length mismatch");
    if (n == 0)
        throw std::invalid_argument("resample: empty source");
    for (std::size_t k = 1; k < n; ++k)
        if (!(wavelengths[k] > wavelengths[k - 1]))
            throw std::invalid_argument("resample: wavelengths must be strictly increasing");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(target.size());
    for (int k = 0; k < target.size(); ++k) {
        const double w = target.wavelength(k);
        // exact hits keep the source sample bit-for-bit
        auto hi = std::lower_bound(wavelengths.begin(), wavelengths.end(), w);
        if (hi == wavelengths.end())
            continue;
        const auto i = static_cast<Eigen::Index>(hi - wavelengths.begin());
        if (std::abs(*hi - w) <= 1e-9 * std::max(1.0, std::abs(w))) {
            out[k] = values[i];
            continue;
        }
        if (i == 0)
            continue;
        const double w0 = wavelengths[i - 1];
        const double t = (w - w0) / (*hi - w0);
        out[k] = (1.0 - t) * values[i - 1] + t * values[i];
    }
    return out;
}

Spectrum resample(const Spectrum &spectrum, const WavelengthGrid &target) {
    if (spectrum.grid() == target)
        return spectrum;
    const Eigen::VectorXd w = spectrum.grid().wavelengths();
    std::vector<double> src(w.data(), w.data() + w.size());
    return {target, resample(src, spectrum.values(), target), spectrum.role()};
}

void require_same_grid(const WavelengthGrid &a, const WavelengthGrid &b, std::string_view what) {
    if (!(a == b))
        throw std::invalid_argument(std::string{what} + ": wavelength grids differ " +
                                    describe(a) + " vs " + describe(b));
}

} // namespace fluorsep
