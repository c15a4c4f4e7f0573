/// @file grid.hpp
/// @brief Cell-centered structured grids on boxes, scalar fields, and the
/// second-order finite-difference operators used by the solver.
///
/// Homogeneous Neumann conditions are realized with mirror ghost cells: the
/// ghost value across a boundary face equals the adjacent interior value, so
/// the boundary face carries no diffusive or taxis flux.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace chemo {

class GridSpec {
public:
    GridSpec() = default;

    /// 1D interval [0, length] with `cells` cells.
    static GridSpec interval(int cells, double length);
    /// 2D rectangle [0, lx] x [0, ly].
    static GridSpec rectangle(int nx, int ny, double lx, double ly);

    int dim() const { return dim_; }
    int cells(int axis) const { return cells_[axis]; }
    double length(int axis) const { return lengths_[axis]; }
    double spacing(int axis) const { return lengths_[axis] / cells_[axis]; }
    std::size_t size() const;
    double measure() const;
    /// h^N, the midpoint-quadrature weight of one cell.
    double cell_volume() const;
    double min_spacing() const;

    /// Cell-center coordinate along `axis` for the cell with index `i` on that axis.
    double center(int axis, int i) const { return (i + 0.5) * spacing(axis); }
    std::size_t index(int i, int j = 0) const {
        return static_cast<std::size_t>(j) * cells_[0] + i;
    }

    bool operator==(const GridSpec&) const = default;

private:
    GridSpec(int dim, std::array<int, 2> cells, std::array<double, 2> lengths);

    int dim_ = 1;
    std::array<int, 2> cells_{3, 1};
    std::array<double, 2> lengths_{1.0, 1.0};
};

/// Scalar data at cell centers, row-major with x varying fastest.
class Field {
public:
    Field() = default;
    explicit Field(const GridSpec& grid, double fill = 0.0);
    Field(const GridSpec& grid, std::vector<double> values);

    /// Samples f(x, y) at cell centers; y is 0 on 1D grids.
    template <class F>
    static Field sample(const GridSpec& grid, F&& f) {
        Field out(grid);
        const int ny = grid.dim() == 2 ? grid.cells(1) : 1;
        for (int j = 0; j < ny; ++j) {
            const double y = grid.dim() == 2 ? grid.center(1, j) : 0.0;
            for (int i = 0; i < grid.cells(0); ++i)
                out[grid.index(i, j)] = f(grid.center(0, i), y);
        }
        return out;
    }

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool all_finite() const;
    double min() const;
    double max() const;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);

private:
    GridSpec grid_;
    std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

enum class TaxisScheme { upwind, central };

/// Discrete Laplacian with mirror ghost cells (3-point / 5-point stencil).
Field laplacian(const Field& f);

/// Writes the Laplacian of `f` into `out` without allocating.
void laplacian_into(std::span<const double> f, const GridSpec& grid, std::span<double> out);

/// Centered differences; the normal component is 0 in boundary cells.
std::vector<Field> gradient(const Field& f);

/// div(chi * u * grad v) in conservative face-flux form.  Boundary faces carry
/// zero flux.  With the upwind scheme the face value of u is taken from the
/// cell the taxis velocity chi * grad v points away from.
Field chemotaxis_divergence(const Field& u, const Field& v, double chi,
                            TaxisScheme scheme = TaxisScheme::upwind);

/// Pointwise squared Frobenius norm of the discrete Hessian.
Field hessian_frobenius_sq(const Field& f);

/// Largest |v_R - v_L| / h over all interior faces.
double max_face_gradient(const Field& v);

double integrate(const Field& f);
double norm_lp(const Field& f, double p);
double norm_inf(const Field& f);
/// Discrete inner product sum(f * g) * h^N.
double inner(const Field& f, const Field& g);

void require_same_grid(const Field& a, const Field& b);

} // namespace chemo
