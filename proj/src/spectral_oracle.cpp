#include "fracobstacle/spectral_oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "fracobstacle/error.hpp"

namespace fracobstacle {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

using Spectrum = std::vector<std::complex<double>>;

class Transform {
public:
    explicit Transform(const PeriodicField& f) : dim_(f.dim), n_(f.n) {
        real_ = fftw_alloc_real(f.size());
        spec_ = fftw_alloc_complex(spectrum_size());
        std::lock_guard lock(plan_mutex());
        if (dim_ == 1) {
            forward_ = fftw_plan_dft_r2c_1d(n_, real_, spec_, FFTW_ESTIMATE);
            backward_ = fftw_plan_dft_c2r_1d(n_, spec_, real_, FFTW_ESTIMATE);
        } else {
            forward_ = fftw_plan_dft_r2c_2d(n_, n_, real_, spec_, FFTW_ESTIMATE);
            backward_ = fftw_plan_dft_c2r_2d(n_, n_, spec_, real_, FFTW_ESTIMATE);
        }
    }
    ~Transform() {
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    Transform(const Transform&) = delete;
    Transform& operator=(const Transform&) = delete;

    [[nodiscard]] std::size_t spectrum_size() const {
        const auto half = static_cast<std::size_t>(n_ / 2 + 1);
        return dim_ == 1 ? half : static_cast<std::size_t>(n_) * half;
    }

    Spectrum forward(const std::vector<double>& v) {
        std::copy(v.begin(), v.end(), real_);
        fftw_execute(forward_);
        Spectrum out(spectrum_size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = {spec_[k][0], spec_[k][1]};
        return out;
    }

    std::vector<double> backward(const Spectrum& s) {
        for (std::size_t k = 0; k < s.size(); ++k) {
            spec_[k][0] = s[k].real();
            spec_[k][1] = s[k].imag();
        }
        fftw_execute(backward_);
        const double scale = 1.0 / std::pow(static_cast<double>(n_), dim_);
        const std::size_t total = dim_ == 1 ? n_ : static_cast<std::size_t>(n_) * n_;
        std::vector<double> out(real_, real_ + total);
        for (auto& x : out) x *= scale;
        return out;
    }

private:
    int dim_;
    int n_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

// |xi|^2 for every entry of the half spectrum.
std::vector<double> wavenumber_sq(const PeriodicField& f) {
    const int n = f.n;
    const int half = n / 2 + 1;
    const double unit = std::numbers::pi / f.half_width;
    auto signed_k = [n](int k) { return k <= n / 2 ? k : k - n; };
    std::vector<double> out;
    if (f.dim == 1) {
        out.resize(half);
        for (int k = 0; k < half; ++k) out[k] = std::pow(unit * k, 2);
    } else {
        out.resize(static_cast<std::size_t>(n) * half);
        for (int k0 = 0; k0 < n; ++k0) {
            for (int k1 = 0; k1 < half; ++k1) {
                const double a = unit * signed_k(k0);
                const double b = unit * k1;
                out[static_cast<std::size_t>(k0) * half + k1] = a * a + b * b;
            }
        }
    }
    return out;
}

template <class Multiplier>
PeriodicField apply_symbol(const PeriodicField& field, Multiplier&& m) {
    field.validate();
    Transform tr(field);
    Spectrum spec = tr.forward(field.values);
    const auto xi2 = wavenumber_sq(field);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= m(xi2[k]);
    PeriodicField out = field;
    out.values = tr.backward(spec);
    return out;
}

}  // namespace

void PeriodicField::validate() const {
    if (dim < 1 || dim > 2) throw ConfigError("periodic field: dim must be 1 or 2");
    if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("periodic field: length per axis must be a power of two");
    const std::size_t expect = dim == 1 ? n : static_cast<std::size_t>(n) * n;
    if (values.size() != expect) throw ConfigError("periodic field: value count does not match n^dim");
    if (!(half_width > 0.0)) throw ConfigError("periodic field: half width must be positive");
}

PeriodicField to_periodic(const Field& field) {
    const Grid& g = field.grid;
    PeriodicField p;
    p.dim = g.dim;
    p.half_width = g.half_width;
    p.n = g.n - 1;
    if (g.dim == 1) {
        p.values.assign(field.values.begin(), field.values.end() - 1);
    } else {
        p.values.reserve(static_cast<std::size_t>(p.n) * p.n);
        for (int i = 0; i < p.n; ++i) {
            for (int j = 0; j < p.n; ++j) p.values.push_back(field[g.flat_index(i, j)]);
        }
    }
    p.validate();
    return p;
}

Field from_periodic(const PeriodicField& field) {
    field.validate();
    const Grid g = build_grid(field.dim, field.half_width, field.n + 1, 3);
    Field out(g);
    const int n = field.n;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto mi = g.multi_index(idx);
        const int i = mi[0] % n;
        const int j = mi[1] % n;
        out[idx] = field.dim == 1 ? field.values[i] : field.values[static_cast<std::size_t>(i) * n + j];
    }
    return out;
}

PeriodicField dft_frac_laplacian(const PeriodicField& field, double s) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("dft_frac_laplacian: s must lie in (0, 1)");
    return apply_symbol(field, [s](double xi2) { return std::pow(xi2, s); });
}

PeriodicField heat_evolve(const PeriodicField& field, double t, double s) {
    if (!(t >= 0.0)) throw ConfigError("heat_evolve: t must be non-negative");
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("heat_evolve: s must lie in (0, 1)");
    return apply_symbol(field, [s, t](double xi2) { return std::exp(-std::pow(xi2, s) * t); });
}

Trajectory duhamel_solve(const PeriodicField& init, const std::vector<PeriodicField>& source, double dt, double T,
                         double s) {
    init.validate();
    if (!(dt > 0.0) || !(T > 0.0)) throw ConfigError("duhamel_solve: dt and T must be positive");
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("duhamel_solve: s must lie in (0, 1)");
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    if (std::abs(steps * dt - T) > 1e-9 * T) throw ConfigError("duhamel_solve: T must be a whole number of steps");
    if (source.size() < steps + 1) throw ConfigError("duhamel_solve: source must be sampled at every step including T");
    for (const auto& f : source) {
        if (f.dim != init.dim || f.n != init.n) throw ConfigError("duhamel_solve: source layout differs from init");
    }

    Transform tr(init);
    const auto xi2 = wavenumber_sq(init);
    std::vector<double> decay(xi2.size());
    for (std::size_t k = 0; k < xi2.size(); ++k) decay[k] = std::exp(-std::pow(xi2[k], s) * dt);

    Spectrum u = tr.forward(init.values);
    Spectrum f_prev = tr.forward(source[0].values);
    Trajectory traj;
    traj.dt = dt;
    PeriodicField snap = init;
    traj.push(0.0, from_periodic(snap));
    for (std::size_t n = 1; n <= steps; ++n) {
        const Spectrum f_next = tr.forward(source[n].values);
        for (std::size_t k = 0; k < u.size(); ++k) {
            u[k] = decay[k] * (u[k] + 0.5 * dt * f_prev[k]) + 0.5 * dt * f_next[k];
        }
        f_prev = f_next;
        snap.values = tr.backward(u);
        traj.push(n * dt, from_periodic(snap));
    }
    return traj;
}

}  // namespace fracobstacle
