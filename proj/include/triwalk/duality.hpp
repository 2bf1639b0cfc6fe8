#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "triwalk/tri_lattice.hpp"

namespace triwalk {

/// Real 2x2 deformation Lambda = [[l00, l01], [l10, l11]], u'_i = Lambda u_i.
struct DeformationMatrix {
    double l00 = 0.0;
    double l01 = 0.0;
    double l10 = 0.0;
    double l11 = 0.0;

    static DeformationMatrix identity() { return {1.0, 0.0, 0.0, 1.0}; }
    double max_abs_diff(const DeformationMatrix& o) const;
    bool is_finite() const;
};

/// The six coefficients l_0..l_5 of the anisotropic angle scaling.
struct LCoefficients {
    std::array<double, 6> l{};

    double& operator[](int i) { return l[i]; }
    double operator[](int i) const { return l[i]; }
};

/// Gauge-fixed (l_2 = -l_1, l_5 = -l_4) solution of the lambda-l system.
LCoefficients lambda_to_l(const DeformationMatrix& m);

/// Evaluates the four lambda-l relations; defined for any l (not only gauge-fixed).
DeformationMatrix l_to_lambda(const LCoefficients& l);

struct Box {
    double xmin = -std::numeric_limits<double>::infinity();
    double xmax = std::numeric_limits<double>::infinity();
    double ymin = -std::numeric_limits<double>::infinity();
    double ymax = std::numeric_limits<double>::infinity();

    bool contains(double x, double y) const {
        return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
    }
};

class OutOfDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class FieldFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lambda(t, x, y), pure and thread-safe.
class DeformationField {
public:
    using Evaluator = std::function<DeformationMatrix(double t, double x, double y)>;

    DeformationField(std::string name, Evaluator eval, Box domain = {}, bool time_dependent = false);

    /// Throws OutOfDomainError outside the declared box.
    DeformationMatrix operator()(double t, double x, double y) const;

    const std::string& name() const { return name_; }
    const Box& domain() const { return domain_; }
    bool time_dependent() const { return time_dependent_; }

private:
    std::string name_;
    Evaluator eval_;
    Box domain_;
    bool time_dependent_;
};

DeformationField zero_deformation();
DeformationField identity_deformation();
DeformationField constant_deformation(const DeformationMatrix& m);

/// phi(x, y): inverse stereographic projection onto the unit sphere.
std::array<double, 3> stereographic_point(double x, double y);

/// d phi/dx and d phi/dy as printed component formulas.
std::array<double, 3> stereographic_dx(double x, double y);
std::array<double, 3> stereographic_dy(double x, double y);

/// diag(1/|d phi/dx|, 1/|d phi/dy|) = diag((x^2+y^2+4)/4, same).
/// A positive exclusion radius declares the disc |(x,y)| > radius as outside
/// the domain (the far region maps near the projection pole).
DeformationField sphere_deformation(double exclusion_radius = 0.0);

/// Sampled field in the `qwfield v1` text format:
///   qwfield v1 <nx> <ny> <nt> <x0> <y0> <dx> <dy> [<dt>]
/// followed by nt*ny*nx records `l00 l01 l10 l11` (t-major, then y, then x).
/// Bilinear in space, nearest in time (slice k sits at t = k dt, dt = 1 when
/// omitted). Points outside [x0, x0+(nx-1)dx] x [y0, y0+(ny-1)dy] are out of domain.
DeformationField field_from_grid_stream(std::istream& in, const std::string& source = "<stream>");
DeformationField field_from_grid_file(const std::string& path);

struct SampleGrid {
    int nx = 64;
    int ny = 64;
    int nt = 1;
    double x0 = -4.0;
    double y0 = -4.0;
    double dx = 0.125;
    double dy = 0.125;
    double dt = 1.0;
};

void write_field_samples(std::ostream& out, const DeformationField& field, const SampleGrid& g);

/// Built-in presets by name: zero, identity, sphere, or
/// constant:<l00>,<l01>,<l10>,<l11>. Anything else is read as a file path.
DeformationField resolve_field(const std::string& source);

/// theta_i(t, x, y) = pi/2 + sqrt(eps) l_i(t, x, y); dx = sqrt(eps), dt = eps.
class AngleSchedule {
public:
    using LField = std::function<LCoefficients(double t, double x, double y)>;

    AngleSchedule(LField l, double epsilon, bool time_dependent = false);

    double epsilon() const { return epsilon_; }
    double dx() const;
    double dt() const { return epsilon_; }
    bool time_dependent() const { return time_dependent_; }

    LCoefficients l(double t, double x, double y) const { return l_(t, x, y); }
    std::array<double, 6> thetas(double t, double x, double y) const;
    double theta(int i, double t, double x, double y) const { return thetas(t, x, y)[i]; }

private:
    LField l_;
    double epsilon_;
    bool time_dependent_;
};

/// Compiles Lambda into the gauge-fixed GQW angle schedule. Throws for eps <= 0.
AngleSchedule compile_schedule(const DeformationField& field, double epsilon);

struct SpacetimePoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct DualityReport {
    std::size_t points = 0;
    double lambda_residual = 0.0;    // max |l_to_lambda(l) - Lambda|
    double gauge_residual = 0.0;     // max |l_2 + l_1|, |l_5 + l_4|
    double eigen_residual = 0.0;     // max distance of eig(beta_i) from {-1, +1}
    double rotation_residual = 0.0;  // max |beta_i - U_i^dag sigma_z U_i|

    bool passes(double tol = 1e-12) const {
        return lambda_residual < tol && eigen_residual < tol && rotation_residual < tol;
    }
};

/// Checks the duality conditions at the sample points: the lambda-l system
/// against the field, and that each beta_i(theta_i) has eigenvalues {-1, 1}
/// and equals U_i^dag sigma_z U_i.
DualityReport verify_duality(const AngleSchedule& schedule, const DeformationField& field,
                             const std::vector<SpacetimePoint>& points);

std::vector<SpacetimePoint> random_sample_points(const Box& box, std::size_t count,
                                                 std::uint64_t seed, double tmax = 0.0);

/// `qwschedule v1` file: the field header followed by six thetas per record.
void write_schedule_samples(std::ostream& out, const AngleSchedule& schedule, const SampleGrid& g);

}  // namespace triwalk
