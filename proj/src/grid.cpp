#include "chemo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chemo {

namespace {

// Shared by laplacian and hessian so that the 1D identity (lap)^2 == |D^2|^2
// holds bit for bit.
inline double second_difference(double fm, double f0, double fp, double inv_h2) {
    return ((fm - f0) + (fp - f0)) * inv_h2;
}

struct Neighbors {
    std::size_t xm, xp, ym, yp;
};

inline Neighbors mirror_neighbors(const GridSpec& g, int i, int j) {
    const std::size_t k = g.index(i, j);
    Neighbors n{k, k, k, k};
    if (i > 0) n.xm = k - 1;
    if (i + 1 < g.cells(0)) n.xp = k + 1;
    if (g.dim() == 2) {
        const auto nx = static_cast<std::size_t>(g.cells(0));
        if (j > 0) n.ym = k - nx;
        if (j + 1 < g.cells(1)) n.yp = k + nx;
    }
    return n;
}

inline int rows(const GridSpec& g) { return g.dim() == 2 ? g.cells(1) : 1; }

} // namespace

GridSpec::GridSpec(int dim, std::array<int, 2> cells, std::array<double, 2> lengths)
    : dim_(dim), cells_(cells), lengths_(lengths) {
    for (int a = 0; a < dim_; ++a) {
        if (cells_[a] < 3)
            throw std::invalid_argument("grid: cells on axis " + std::to_string(a) +
                                        " must be >= 3");
        if (!(lengths_[a] > 0.0) || !std::isfinite(lengths_[a]))
            throw std::invalid_argument("grid: length on axis " + std::to_string(a) +
                                        " must be positive");
    }
}

GridSpec GridSpec::interval(int cells, double length) {
    return GridSpec(1, {cells, 1}, {length, 1.0});
}

GridSpec GridSpec::rectangle(int nx, int ny, double lx, double ly) {
    return GridSpec(2, {nx, ny}, {lx, ly});
}

std::size_t GridSpec::size() const {
    return static_cast<std::size_t>(cells_[0]) * (dim_ == 2 ? cells_[1] : 1);
}

double GridSpec::measure() const {
    return dim_ == 2 ? lengths_[0] * lengths_[1] : lengths_[0];
}

double GridSpec::cell_volume() const {
    return dim_ == 2 ? spacing(0) * spacing(1) : spacing(0);
}

double GridSpec::min_spacing() const {
    return dim_ == 2 ? std::min(spacing(0), spacing(1)) : spacing(0);
}

Field::Field(const GridSpec& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("field: expected " + std::to_string(grid_.size()) +
                                    " values, got " + std::to_string(values_.size()));
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

Field& Field::operator+=(const Field& o) {
    require_same_grid(*this, o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    require_same_grid(*this, o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
}

Field& Field::operator*=(double s) {
    for (double& x : values_) x *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid()) || a.size() != b.size())
        throw std::invalid_argument("fields live on different grids");
}

void laplacian_into(std::span<const double> f, const GridSpec& g, std::span<double> out) {
    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    const double ihy2 = g.dim() == 2 ? 1.0 / (g.spacing(1) * g.spacing(1)) : 0.0;
    for (int j = 0; j < rows(g); ++j) {
        for (int i = 0; i < g.cells(0); ++i) {
            const std::size_t k = g.index(i, j);
            const Neighbors n = mirror_neighbors(g, i, j);
            double d = second_difference(f[n.xm], f[k], f[n.xp], ihx2);
            if (g.dim() == 2) d += second_difference(f[n.ym], f[k], f[n.yp], ihy2);
            out[k] = d;
        }
    }
}

Field laplacian(const Field& f) {
    Field out(f.grid());
    laplacian_into(f.values(), f.grid(), out.values());
    return out;
}

std::vector<Field> gradient(const Field& f) {
    const GridSpec& g = f.grid();
    std::vector<Field> out(g.dim(), Field(g));
    const double inv2hx = 0.5 / g.spacing(0);
    const double inv2hy = g.dim() == 2 ? 0.5 / g.spacing(1) : 0.0;
    for (int j = 0; j < rows(g); ++j) {
        for (int i = 0; i < g.cells(0); ++i) {
            const std::size_t k = g.index(i, j);
            const Neighbors n = mirror_neighbors(g, i, j);
            if (i > 0 && i + 1 < g.cells(0)) out[0][k] = (f[n.xp] - f[n.xm]) * inv2hx;
            if (g.dim() == 2 && j > 0 && j + 1 < g.cells(1))
                out[1][k] = (f[n.yp] - f[n.ym]) * inv2hy;
        }
    }
    return out;
}

Field chemotaxis_divergence(const Field& u, const Field& v, double chi, TaxisScheme scheme) {
    require_same_grid(u, v);
    const GridSpec& g = u.grid();
    Field out(g);
    auto face = [&](std::size_t left, std::size_t right, double h) {
        const double dv = v[right] - v[left];
        double uf;
        if (scheme == TaxisScheme::upwind)
            uf = dv > 0.0 ? u[left] : u[right];
        else
            uf = 0.5 * (u[left] + u[right]);
        const double flux_over_h = chi * uf * dv / (h * h);
        out[left] += flux_over_h;
        out[right] -= flux_over_h;
    };
    const double hx = g.spacing(0);
    for (int j = 0; j < rows(g); ++j)
        for (int i = 0; i + 1 < g.cells(0); ++i) face(g.index(i, j), g.index(i + 1, j), hx);
    if (g.dim() == 2) {
        const double hy = g.spacing(1);
        for (int j = 0; j + 1 < g.cells(1); ++j)
            for (int i = 0; i < g.cells(0); ++i) face(g.index(i, j), g.index(i, j + 1), hy);
    }
    return out;
}

Field hessian_frobenius_sq(const Field& f) {
    const GridSpec& g = f.grid();
    Field out(g);
    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    if (g.dim() == 1) {
        for (int i = 0; i < g.cells(0); ++i) {
            const Neighbors n = mirror_neighbors(g, i, 0);
            const double fxx = second_difference(f[n.xm], f[i], f[n.xp], ihx2);
            out[i] = fxx * fxx;
        }
        return out;
    }
    const double ihy2 = 1.0 / (g.spacing(1) * g.spacing(1));
    const double inv4hxhy = 0.25 / (g.spacing(0) * g.spacing(1));
    const int nx = g.cells(0), ny = g.cells(1);
    auto at = [&](int i, int j) {
        // mirror ghosts: index -1 maps to 0, n maps to n-1
        i = std::clamp(i, 0, nx - 1);
        j = std::clamp(j, 0, ny - 1);
        return f[g.index(i, j)];
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = g.index(i, j);
            const Neighbors n = mirror_neighbors(g, i, j);
            const double fxx = second_difference(f[n.xm], f[k], f[n.xp], ihx2);
            const double fyy = second_difference(f[n.ym], f[k], f[n.yp], ihy2);
            const double fxy =
                (at(i + 1, j + 1) - at(i - 1, j + 1) - at(i + 1, j - 1) + at(i - 1, j - 1)) *
                inv4hxhy;
            out[k] = fxx * fxx + fyy * fyy + 2.0 * fxy * fxy;
        }
    }
    return out;
}

double max_face_gradient(const Field& v) {
    const GridSpec& g = v.grid();
    double m = 0.0;
    const double hx = g.spacing(0);
    for (int j = 0; j < rows(g); ++j)
        for (int i = 0; i + 1 < g.cells(0); ++i)
            m = std::max(m, std::abs(v[g.index(i + 1, j)] - v[g.index(i, j)]) / hx);
    if (g.dim() == 2) {
        const double hy = g.spacing(1);
        for (int j = 0; j + 1 < g.cells(1); ++j)
            for (int i = 0; i < g.cells(0); ++i)
                m = std::max(m, std::abs(v[g.index(i, j + 1)] - v[g.index(i, j)]) / hy);
    }
    return m;
}

double integrate(const Field& f) {
    double s = 0.0;
    for (double x : f.values()) s += x;
    return s * f.grid().cell_volume();
}

double norm_lp(const Field& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("norm_lp: p must be >= 1");
    double s = 0.0;
    if (p == 2.0) {
        for (double x : f.values()) s += x * x;
        return std::sqrt(s * f.grid().cell_volume());
    }
    for (double x : f.values()) s += std::pow(std::abs(x), p);
    return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double norm_inf(const Field& f) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    return m;
}

double inner(const Field& f, const Field& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * g[k];
    return s * f.grid().cell_volume();
}

} // namespace chemo
