#include "triwalk/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "triwalk/walk_engine.hpp"

namespace triwalk {

namespace {

void require_periodic(const FieldGeometry& g, double kx, double ky) {
    auto integral = [](double phase) {
        const double turns = phase / (2.0 * std::numbers::pi);
        return std::abs(turns - std::round(turns)) < 1e-9;
    };
    // Staggered rows close only over an even number of rows.
    if (g.row_shift != 0.0 && g.ny % 2 != 0)
        throw std::invalid_argument("staggered geometry needs an even row count");
    if (!integral(kx * g.period_x()) || !integral(ky * g.period_y()))
        throw std::invalid_argument("wave vector is not commensurate with the periodic box");
}

Mat2 b_x(const DeformationMatrix& m) { return m.l00 * pauli_x() + m.l01 * pauli_y(); }
Mat2 b_y(const DeformationMatrix& m) { return m.l10 * pauli_x() + m.l11 * pauli_y(); }

SpinorField plane_wave_with_generator(const FieldGeometry& g, const Mat2& gen, double kx, double ky,
                                      const Spinor2& chi0, double t) {
    require_periodic(g, kx, ky);
    const Spinor2 chi = exp_i_traceless_hermitian(gen, t) * chi0;
    SpinorField out(g, t);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const Point2 r = g.position(ix, iy);
            const cplx ph = std::polar(1.0, kx * r.x + ky * r.y);
            out.at(ix, iy) = {{chi[0] * ph, chi[1] * ph}};
        }
    return out;
}

Spinor2 axpy(const Spinor2& x, double a, const Spinor2& y) {
    return {{x[0] + a * y[0], x[1] + a * y[1]}};
}

class FdOperator {
public:
    FdOperator(const DeformationField& field, const FieldGeometry& g, int workers)
        : field_(field), g_(g), workers_(workers), bx_(g.size()), by_(g.size()), bpsi_x_(g.size()),
          bpsi_y_(g.size()) {}

    void coefficients(double t) {
        if (have_coeffs_ && !field_.time_dependent()) return;
        for (int iy = 0; iy < g_.ny; ++iy)
            for (int ix = 0; ix < g_.nx; ++ix) {
                const Point2 r = g_.position(ix, iy);
                const auto m = field_(t, r.x, r.y);
                if (!m.is_finite()) throw NumericalError("deformation field is not finite");
                const std::size_t k = index(ix, iy);
                bx_[k] = b_x(m);
                by_[k] = b_y(m);
            }
        have_coeffs_ = true;
    }

    double max_frobenius() const {
        double best = 0.0;
        for (std::size_t k = 0; k < bx_.size(); ++k) {
            double f = 0.0;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) f += std::norm(bx_[k](r, c)) + std::norm(by_[k](r, c));
            // |Lambda|_F^2 = (|Bx|_F^2 + |By|_F^2) / 2
            best = std::max(best, std::sqrt(0.5 * f));
        }
        return best;
    }

    // out = 1/2 sum_s (D_s B^s + B^s D_s) psi
    void apply(double t, const std::vector<Spinor2>& psi, std::vector<Spinor2>& out) {
        coefficients(t);
        const long n = static_cast<long>(psi.size());
#pragma omp parallel for schedule(static) num_threads(workers_)
        for (long k = 0; k < n; ++k) {
            bpsi_x_[k] = bx_[k] * psi[k];
            bpsi_y_[k] = by_[k] * psi[k];
        }
        const double hx = 0.25 / g_.dx;
        const double hy = 0.25 / g_.dy;
        const int nx = g_.nx, ny = g_.ny;
#pragma omp parallel for schedule(static) num_threads(workers_)
        for (int iy = 0; iy < ny; ++iy) {
            const int yp = (iy + 1) % ny, ym = (iy + ny - 1) % ny;
            for (int ix = 0; ix < nx; ++ix) {
                const int xp = (ix + 1) % nx, xm = (ix + nx - 1) % nx;
                const std::size_t k = index(ix, iy);
                const std::size_t kxp = index(xp, iy), kxm = index(xm, iy);
                const std::size_t kyp = index(ix, yp), kym = index(ix, ym);
                const Spinor2 dpx{{psi[kxp][0] - psi[kxm][0], psi[kxp][1] - psi[kxm][1]}};
                const Spinor2 dpy{{psi[kyp][0] - psi[kym][0], psi[kyp][1] - psi[kym][1]}};
                const Spinor2 bdx = bx_[k] * dpx;
                const Spinor2 bdy = by_[k] * dpy;
                Spinor2 r;
                for (int c = 0; c < 2; ++c) {
                    r[c] = hx * (bpsi_x_[kxp][c] - bpsi_x_[kxm][c] + bdx[c]) +
                           hy * (bpsi_y_[kyp][c] - bpsi_y_[kym][c] + bdy[c]);
                }
                out[k] = r;
            }
        }
    }

private:
    std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * g_.nx + ix; }

    const DeformationField& field_;
    FieldGeometry g_;
    int workers_;
    bool have_coeffs_ = false;
    std::vector<Mat2> bx_, by_;
    std::vector<Spinor2> bpsi_x_, bpsi_y_;
};

}  // namespace

FieldGeometry sector_geometry(const TriangularGrid& grid) {
    if (grid.height() % 2 != 0) throw std::invalid_argument("sector geometry needs an even grid height");
    const double d = grid.delta();
    const Point2 first = grid.edge_center({{0, 0}, 0, 0});
    return {grid.width(), grid.height(), first.x, first.y, 2.0 * d, std::numbers::sqrt3 * d, d};
}

double SpinorField::norm2() const {
    double s = 0.0;
    for (const auto& v : values) s += v.norm2();
    return s * geom.dx * geom.dy;
}

SpinorField flat_plane_wave(const FieldGeometry& g, double kx, double ky, const Spinor2& chi0, double t) {
    return plane_wave_with_generator(g, kx * pauli_x() + ky * pauli_y(), kx, ky, chi0, t);
}

SpinorField constant_deformation_plane_wave(const FieldGeometry& g, const DeformationMatrix& m,
                                            double kx, double ky, const Spinor2& chi0, double t) {
    return plane_wave_with_generator(g, kx * b_x(m) + ky * b_y(m), kx, ky, chi0, t);
}

FdResult curved_fd_evolve(const CurvedPDEProblem& problem, double T, double dt, int workers) {
    const FieldGeometry& g = problem.initial.geom;
    if (g.row_shift != 0.0) throw std::invalid_argument("finite differences need a plain rectangle");
    if (!(dt > 0.0) || !(T >= 0.0)) throw std::invalid_argument("need dt > 0 and T >= 0");
    const int w = workers > 0 ? workers : default_workers();

    FdOperator op(problem.field, g, w);
    op.coefficients(problem.initial.t);
    const double lam = op.max_frobenius();
    if (lam > 0.0 && dt > kCflNumber * std::min(g.dx, g.dy) / lam * (1.0 + 1e-12)) {
        throw NumericalError("time step violates the CFL bound dt <= " +
                             std::to_string(kCflNumber * std::min(g.dx, g.dy) / lam));
    }

    FdResult res;
    res.field = problem.initial;
    const double norm0 = problem.initial.norm2();
    const long steps = T > 0.0 ? static_cast<long>(std::ceil(T / dt - 1e-9)) : 0;
    const double h = steps > 0 ? T / steps : 0.0;

    std::vector<Spinor2>& psi = res.field.values;
    const std::size_t n = psi.size();
    std::vector<Spinor2> k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = problem.initial.t;
    for (long s = 0; s < steps; ++s) {
        op.apply(t, psi, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = axpy(psi[i], 0.5 * h, k1[i]);
        op.apply(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = axpy(psi[i], 0.5 * h, k2[i]);
        op.apply(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = axpy(psi[i], h, k3[i]);
        op.apply(t + h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < 2; ++c)
                psi[i][c] += (h / 6.0) * (k1[i][c] + 2.0 * k2[i][c] + 2.0 * k3[i][c] + k4[i][c]);
        t += h;

        const double nrm = res.field.norm2();
        if (!std::isfinite(nrm) || nrm > 2.0 * norm0 + 1e-300)
            throw NumericalError("finite-difference solution blew up at t = " + std::to_string(t));
    }
    res.field.t = t;
    res.steps = steps;
    res.norm_drift = norm0 > 0.0 ? std::abs(res.field.norm2() - norm0) / norm0 : 0.0;
    return res;
}

double flat_plane_wave_residual(const FieldGeometry& g, double kx, double ky, const Spinor2& chi0, double t) {
    const SpinorField psi = flat_plane_wave(g, kx, ky, chi0, t);
    const DeformationField id = identity_deformation();
    FdOperator op(id, g, 1);
    std::vector<Spinor2> rhs(psi.values.size());
    op.apply(t, psi.values, rhs);
    const Mat2 gen = cplx(0.0, 1.0) * (kx * pauli_x() + ky * pauli_y());
    double worst = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        const Spinor2 dt = gen * psi.values[i];
        for (int c = 0; c < 2; ++c) worst = std::max(worst, std::abs(rhs[i][c] - dt[c]));
    }
    return worst;
}

double l2_error(const SpinorField& a, const SpinorField& b, bool align_phase) {
    if (a.geom.nx != b.geom.nx || a.geom.ny != b.geom.ny)
        throw IncompatibleShapeError("fields have different sample shapes");
    double na = 0.0, nb = 0.0;
    cplx overlap = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        na += a.values[i].norm2();
        nb += b.values[i].norm2();
        for (int c = 0; c < 2; ++c) overlap += std::conj(b.values[i][c]) * a.values[i][c];
    }
    if (!(na > 0.0) || !(nb > 0.0)) throw std::invalid_argument("cannot compare a zero field");
    const double sa = 1.0 / std::sqrt(na);
    cplx sb = 1.0 / std::sqrt(nb);
    if (align_phase && std::abs(overlap) > 0.0) sb *= overlap / std::abs(overlap);
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        for (int c = 0; c < 2; ++c) d += std::norm(sa * a.values[i][c] - sb * b.values[i][c]);
    return std::sqrt(d);
}

SpinorField walk_sector_field(const WalkState& state, const Mat2& readout, double t) {
    const TriangularGrid& grid = state.grid();
    SpinorField out(sector_geometry(grid), t);
    for (int j = 0; j < grid.height(); ++j)
        for (int i = 0; i < grid.width(); ++i) out.at(i, j) = readout * state.edge_spinor({i, j}, 0);
    return out;
}

SpinorField bin_walk_to_rectangle(const WalkState& state, int slot, const Mat2& readout,
                                  const FieldGeometry& rect, double t) {
    if (rect.row_shift != 0.0) throw std::invalid_argument("binning target must be a plain rectangle");
    const TriangularGrid& grid = state.grid();
    SpinorField out(rect, t);
    std::vector<int> counts(rect.size(), 0);
    for (int j = 0; j < grid.height(); ++j)
        for (int i = 0; i < grid.width(); ++i) {
            const Point2 r = grid.edge_center({{i, j}, 0, slot});
            auto cell = [](double v, double v0, double dv, int n) {
                const long k = std::lround((v - v0) / dv);
                return static_cast<int>(((k % n) + n) % n);
            };
            const int ix = cell(r.x, rect.x0, rect.dx, rect.nx);
            const int iy = cell(r.y, rect.y0, rect.dy, rect.ny);
            const Spinor2 s = readout * state.edge_spinor({i, j}, slot);
            Spinor2& dst = out.at(ix, iy);
            dst[0] += s[0];
            dst[1] += s[1];
            ++counts[static_cast<std::size_t>(iy) * rect.nx + ix];
        }
    for (std::size_t k = 0; k < counts.size(); ++k)
        if (counts[k] > 1) {
            out.values[k][0] /= static_cast<double>(counts[k]);
            out.values[k][1] /= static_cast<double>(counts[k]);
        }
    return out;
}

SpinorField interpolate(const SpinorField& src, const FieldGeometry& target) {
    const FieldGeometry& g = src.geom;
    if (g.row_shift != 0.0) throw std::invalid_argument("interpolation source must be a plain rectangle");
    SpinorField out(target, src.t);
    for (int iy = 0; iy < target.ny; ++iy)
        for (int ix = 0; ix < target.nx; ++ix) {
            const Point2 r = target.position(ix, iy);
            const double sx = (r.x - g.x0) / g.dx;
            const double sy = (r.y - g.y0) / g.dy;
            const double fx0 = std::floor(sx), fy0 = std::floor(sy);
            const double fx = sx - fx0, fy = sy - fy0;
            auto wrap = [](long v, int n) { return static_cast<int>(((v % n) + n) % n); };
            const int x0 = wrap(static_cast<long>(fx0), g.nx), x1 = wrap(static_cast<long>(fx0) + 1, g.nx);
            const int y0 = wrap(static_cast<long>(fy0), g.ny), y1 = wrap(static_cast<long>(fy0) + 1, g.ny);
            Spinor2 v;
            for (int c = 0; c < 2; ++c) {
                v[c] = (1 - fy) * ((1 - fx) * src.at(x0, y0)[c] + fx * src.at(x1, y0)[c]) +
                       fy * ((1 - fx) * src.at(x0, y1)[c] + fx * src.at(x1, y1)[c]);
            }
            out.at(ix, iy) = v;
        }
    return out;
}

}  // namespace triwalk
