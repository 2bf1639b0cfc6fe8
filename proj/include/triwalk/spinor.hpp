#pragma once

#include <array>
#include <complex>

namespace triwalk {

using cplx = std::complex<double>;

/// Two coin components living on one edge: component 0 sits on the label-0
/// side, component 1 on the label-1 side.
struct Spinor2 {
    std::array<cplx, 2> c{};

    cplx& operator[](int k) { return c[k]; }
    const cplx& operator[](int k) const { return c[k]; }

    double norm2() const { return std::norm(c[0]) + std::norm(c[1]); }
};

/// Row-major 2x2 complex matrix. Most instances built by the named
/// constructors below are unitary; `is_unitary` checks that contract.
class Mat2 {
public:
    constexpr Mat2() = default;
    constexpr Mat2(cplx a00, cplx a01, cplx a10, cplx a11) : m_{a00, a01, a10, a11} {}

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }

    cplx operator()(int r, int c) const { return m_[2 * r + c]; }
    cplx& operator()(int r, int c) { return m_[2 * r + c]; }

    Mat2 adjoint() const;
    cplx trace() const { return m_[0] + m_[3]; }
    cplx det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

    /// Largest entrywise modulus of (this - other).
    double max_abs_diff(const Mat2& other) const;
    bool is_unitary(double tol = 1e-12) const;
    bool is_hermitian(double tol = 1e-12) const;

    friend Mat2 operator*(const Mat2& a, const Mat2& b);
    friend Mat2 operator+(const Mat2& a, const Mat2& b);
    friend Mat2 operator-(const Mat2& a, const Mat2& b);
    friend Mat2 operator*(cplx s, const Mat2& a);
    friend Spinor2 operator*(const Mat2& a, const Spinor2& v);

private:
    std::array<cplx, 4> m_{};
};

Mat2 operator*(double s, const Mat2& a);

Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();

/// C = e^{i pi/3} exp(i pi/3 sigma_z) = diag(e^{2 i pi/3}, 1); C^3 = I.
Mat2 coin_C();

/// The constant kappa = +sqrt(5)/3 entering the tau matrices.
double kappa();

/// U = exp(-i alpha sigma_y / 2) C^2 with alpha = -arccos(sqrt(5)/3).
Mat2 basis_change_U();

/// The coin of the uniform walk in the rotated basis, C' = U C U^dagger.
Mat2 coin_prime();

/// tau_i with kappa = +sqrt(5)/3, for i in {0,1,2}.
Mat2 tau(int i);

/// tau_i for an arbitrary kappa branch. Only +-sqrt(5)/3 give unitary
/// matrices; the negative branch exists for checking the sign ambiguity.
Mat2 tau_with_kappa(int i, double kappa_value);

/// U_i(theta) = [[cos th/2, sin th/2], [-sin th/2, cos th/2]].
Mat2 rotation_U(double theta);

/// beta(theta) = sin(theta) sigma_x + cos(theta) sigma_z = U(theta)^dag sigma_z U(theta).
Mat2 beta(double theta);

/// Hadamard-like basis change of the first GQW half step.
Mat2 hadamard_H();

/// Q = 1/sqrt2 [[1, -i], [1, i]], basis change of the second GQW half step.
Mat2 q_matrix();

/// exp(i t M) for a Hermitian, traceless M (closed form).
Mat2 exp_i_traceless_hermitian(const Mat2& m, double t);

/// Eigenvalues of a Hermitian 2x2 matrix, ascending.
std::array<double, 2> hermitian_eigenvalues(const Mat2& m);

}  // namespace triwalk
