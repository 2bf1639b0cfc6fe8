#include "triwalk/spinor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace triwalk {

using namespace std::complex_literals;

Mat2 Mat2::adjoint() const {
    return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
}

double Mat2::max_abs_diff(const Mat2& other) const {
    double d = 0.0;
    for (int k = 0; k < 4; ++k) d = std::max(d, std::abs(m_[k] - other.m_[k]));
    return d;
}

bool Mat2::is_unitary(double tol) const {
    return (adjoint() * (*this)).max_abs_diff(identity()) <= tol;
}

bool Mat2::is_hermitian(double tol) const { return adjoint().max_abs_diff(*this) <= tol; }

Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m_[0] * b.m_[0] + a.m_[1] * b.m_[2], a.m_[0] * b.m_[1] + a.m_[1] * b.m_[3],
            a.m_[2] * b.m_[0] + a.m_[3] * b.m_[2], a.m_[2] * b.m_[1] + a.m_[3] * b.m_[3]};
}

Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.m_[0] + b.m_[0], a.m_[1] + b.m_[1], a.m_[2] + b.m_[2], a.m_[3] + b.m_[3]};
}

Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m_[0] - b.m_[0], a.m_[1] - b.m_[1], a.m_[2] - b.m_[2], a.m_[3] - b.m_[3]};
}

Mat2 operator*(cplx s, const Mat2& a) {
    return {s * a.m_[0], s * a.m_[1], s * a.m_[2], s * a.m_[3]};
}

Mat2 operator*(double s, const Mat2& a) { return cplx(s, 0.0) * a; }

Spinor2 operator*(const Mat2& a, const Spinor2& v) {
    return {{a.m_[0] * v.c[0] + a.m_[1] * v.c[1], a.m_[2] * v.c[0] + a.m_[3] * v.c[1]}};
}

Mat2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
Mat2 pauli_y() { return {0.0, -1i, 1i, 0.0}; }
Mat2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

Mat2 coin_C() {
    // e^{i pi/3} * diag(e^{i pi/3}, e^{-i pi/3})
    const double third = std::numbers::pi / 3.0;
    const cplx global = std::polar(1.0, third);
    return {global * std::polar(1.0, third), 0.0, 0.0, global * std::polar(1.0, -third)};
}

double kappa() { return std::sqrt(5.0) / 3.0; }

Mat2 basis_change_U() {
    const double alpha = -std::acos(std::sqrt(5.0) / 3.0);
    // exp(-i a sigma_y / 2) = cos(a/2) I - i sin(a/2) sigma_y
    const Mat2 ry = cplx(std::cos(alpha / 2.0)) * Mat2::identity() +
                    cplx(0.0, -std::sin(alpha / 2.0)) * pauli_y();
    const Mat2 c = coin_C();
    return ry * c * c;
}

Mat2 coin_prime() {
    const Mat2 u = basis_change_U();
    return u * coin_C() * u.adjoint();
}

Mat2 tau_with_kappa(int i, double kappa_value) {
    const double s3 = std::sqrt(3.0) / 3.0;
    const Mat2 kz = kappa_value * pauli_z();
    switch (i) {
        case 0:
            return (2.0 / 3.0) * pauli_x() + kz;
        case 1:
            return (-1.0 / 3.0) * pauli_x() + s3 * pauli_y() + kz;
        case 2:
            return (-1.0 / 3.0) * pauli_x() - s3 * pauli_y() + kz;
        default:
            throw std::out_of_range("tau index must be 0, 1 or 2");
    }
}

Mat2 tau(int i) { return tau_with_kappa(i, kappa()); }

Mat2 rotation_U(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    return {c, s, -s, c};
}

Mat2 beta(double theta) {
    return std::sin(theta) * pauli_x() + std::cos(theta) * pauli_z();
}

Mat2 hadamard_H() {
    const double r = 1.0 / std::sqrt(2.0);
    return {r, r, r, -r};
}

Mat2 q_matrix() {
    const double r = 1.0 / std::sqrt(2.0);
    return {r, cplx(0.0, -r), r, cplx(0.0, r)};
}

Mat2 exp_i_traceless_hermitian(const Mat2& m, double t) {
    // m = a.sigma with |a|^2 = -det(m); exp(i t m) = cos(t|a|) + i sin(t|a|) m/|a|
    const double a = std::sqrt(std::max(0.0, -m.det().real()));
    if (a == 0.0) return Mat2::identity();
    return cplx(std::cos(t * a)) * Mat2::identity() + cplx(0.0, std::sin(t * a) / a) * m;
}

std::array<double, 2> hermitian_eigenvalues(const Mat2& m) {
    const double half_tr = 0.5 * (m(0, 0).real() + m(1, 1).real());
    const double half_diff = 0.5 * (m(0, 0).real() - m(1, 1).real());
    const double r = std::hypot(half_diff, std::abs(m(0, 1)));
    return {half_tr - r, half_tr + r};
}

}  // namespace triwalk
