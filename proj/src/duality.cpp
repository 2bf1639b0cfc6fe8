#include "triwalk/duality.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

namespace triwalk {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

}  // namespace

double DeformationMatrix::max_abs_diff(const DeformationMatrix& o) const {
    return std::max({std::abs(l00 - o.l00), std::abs(l01 - o.l01), std::abs(l10 - o.l10),
                     std::abs(l11 - o.l11)});
}

bool DeformationMatrix::is_finite() const {
    return std::isfinite(l00) && std::isfinite(l01) && std::isfinite(l10) && std::isfinite(l11);
}

LCoefficients lambda_to_l(const DeformationMatrix& m) {
    LCoefficients out;
    out[0] = m.l00;
    out[1] = m.l10 / kSqrt3;
    out[2] = -out[1];
    out[3] = m.l01;
    out[4] = m.l11 / kSqrt3;
    out[5] = -out[4];
    return out;
}

DeformationMatrix l_to_lambda(const LCoefficients& l) {
    return {-0.5 * (l[2] + l[1]) + l[0], -0.5 * (l[5] + l[4]) + l[3],
            -0.5 * kSqrt3 * (l[2] - l[1]), -0.5 * kSqrt3 * (l[5] - l[4])};
}

DeformationField::DeformationField(std::string name, Evaluator eval, Box domain, bool time_dependent)
    : name_(std::move(name)), eval_(std::move(eval)), domain_(domain), time_dependent_(time_dependent) {}

DeformationMatrix DeformationField::operator()(double t, double x, double y) const {
    if (!domain_.contains(x, y)) {
        std::ostringstream msg;
        msg << "deformation field '" << name_ << "' is undefined at (x, y) = (" << x << ", " << y << ")";
        throw OutOfDomainError(msg.str());
    }
    return eval_(t, x, y);
}

DeformationField zero_deformation() {
    return {"zero", [](double, double, double) { return DeformationMatrix{}; }};
}

DeformationField identity_deformation() {
    return {"identity", [](double, double, double) { return DeformationMatrix::identity(); }};
}

DeformationField constant_deformation(const DeformationMatrix& m) {
    if (!m.is_finite()) throw std::invalid_argument("constant deformation must be finite");
    std::ostringstream name;
    name << "constant:" << m.l00 << "," << m.l01 << "," << m.l10 << "," << m.l11;
    return {name.str(), [m](double, double, double) { return m; }};
}

std::array<double, 3> stereographic_point(double x, double y) {
    const double d = 0.5 * (x * x + y * y) + 2.0;
    return {2.0 * x / d, 2.0 * y / d, 1.0 - 4.0 / d};
}

std::array<double, 3> stereographic_dx(double x, double y) {
    const double d = x * x + y * y + 4.0;
    const double d2 = d * d;
    return {4.0 * (-x * x + y * y + 4.0) / d2, -8.0 * x * y / d2, 16.0 * x / d2};
}

std::array<double, 3> stereographic_dy(double x, double y) {
    const double d = x * x + y * y + 4.0;
    const double d2 = d * d;
    return {-8.0 * x * y / d2, 4.0 * (x * x - y * y + 4.0) / d2, 16.0 * y / d2};
}

DeformationField sphere_deformation(double exclusion_radius) {
    Box box;
    if (exclusion_radius > 0.0) {
        box = {-exclusion_radius, exclusion_radius, -exclusion_radius, exclusion_radius};
    }
    auto eval = [exclusion_radius](double, double x, double y) {
        if (exclusion_radius > 0.0 && x * x + y * y > exclusion_radius * exclusion_radius) {
            std::ostringstream msg;
            msg << "sphere deformation excludes (" << x << ", " << y << ")";
            throw OutOfDomainError(msg.str());
        }
        // reciprocal of the conformal factor |d phi/dx| = |d phi/dy| = 4/(x^2+y^2+4)
        const double f = (x * x + y * y + 4.0) / 4.0;
        return DeformationMatrix{f, 0.0, 0.0, f};
    };
    return {"sphere", eval, box};
}

namespace {

struct SampledField {
    SampleGrid g;
    std::vector<DeformationMatrix> samples;

    DeformationMatrix at(int k, int iy, int ix) const {
        return samples[(static_cast<std::size_t>(k) * g.ny + iy) * g.nx + ix];
    }

    DeformationMatrix operator()(double t, double x, double y) const {
        const int k = std::clamp(static_cast<int>(std::lround(t / g.dt)), 0, g.nt - 1);
        auto locate = [](double v, double v0, double dv, int n, int& i0, double& frac) {
            if (n == 1) {
                i0 = 0;
                frac = 0.0;
                return;
            }
            const double s = (v - v0) / dv;
            i0 = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
            frac = s - i0;
        };
        int ix, iy;
        double fx, fy;
        locate(x, g.x0, g.dx, g.nx, ix, fx);
        locate(y, g.y0, g.dy, g.ny, iy, fy);
        const int ix1 = std::min(ix + 1, g.nx - 1);
        const int iy1 = std::min(iy + 1, g.ny - 1);
        auto lerp = [&](auto member) {
            const double a = at(k, iy, ix).*member * (1 - fx) + at(k, iy, ix1).*member * fx;
            const double b = at(k, iy1, ix).*member * (1 - fx) + at(k, iy1, ix1).*member * fx;
            return a * (1 - fy) + b * fy;
        };
        return {lerp(&DeformationMatrix::l00), lerp(&DeformationMatrix::l01),
                lerp(&DeformationMatrix::l10), lerp(&DeformationMatrix::l11)};
    }
};

bool parse_double(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_int(const std::string& tok, int& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace

DeformationField field_from_grid_stream(std::istream& in, const std::string& source) {
    auto fail = [&](const std::string& what) {
        throw FieldFormatError(source + ": " + what);
    };

    std::string header;
    if (!std::getline(in, header)) fail("empty file, expected a 'qwfield v1' header");
    std::istringstream hs(header);
    std::vector<std::string> tok;
    for (std::string t; hs >> t;) tok.push_back(t);
    if (tok.size() < 2 || tok[0] != "qwfield" || tok[1] != "v1")
        fail("header must start with 'qwfield v1'");
    if (tok.size() != 9 && tok.size() != 10)
        fail("header needs <nx> <ny> <nt> <x0> <y0> <dx> <dy> [<dt>]");

    SampleGrid g;
    if (!parse_int(tok[2], g.nx) || !parse_int(tok[3], g.ny) || !parse_int(tok[4], g.nt))
        fail("header sizes must be integers");
    if (g.nx < 1 || g.ny < 1 || g.nt < 1) fail("header sizes must be positive");
    if (!parse_double(tok[5], g.x0) || !parse_double(tok[6], g.y0) || !parse_double(tok[7], g.dx) ||
        !parse_double(tok[8], g.dy))
        fail("header origin and spacing must be real numbers");
    g.dt = 1.0;
    if (tok.size() == 10 && !parse_double(tok[9], g.dt)) fail("header dt must be a real number");
    if (!(g.dx > 0.0) || !(g.dy > 0.0) || !(g.dt > 0.0)) fail("header spacings must be positive");

    const std::size_t expected = static_cast<std::size_t>(g.nx) * g.ny * g.nt;
    auto sampled = std::make_shared<SampledField>();
    sampled->g = g;
    sampled->samples.reserve(expected);

    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::vector<std::string> vals;
        for (std::string t; ls >> t;) vals.push_back(t);
        if (vals.empty()) continue;
        const std::size_t rec = sampled->samples.size();
        if (rec >= expected) {
            fail("line " + std::to_string(lineno) + ": more records than the header's " +
                 std::to_string(expected));
        }
        const std::size_t ix = rec % g.nx;
        const std::size_t iy = (rec / g.nx) % g.ny;
        const std::size_t it = rec / (static_cast<std::size_t>(g.nx) * g.ny);
        const std::string where = "record " + std::to_string(rec) + " (t=" + std::to_string(it) +
                                  ", y=" + std::to_string(iy) + ", x=" + std::to_string(ix) +
                                  ", line " + std::to_string(lineno) + ")";
        if (vals.size() != 4) fail(where + ": expected 4 values, got " + std::to_string(vals.size()));
        DeformationMatrix m;
        if (!parse_double(vals[0], m.l00) || !parse_double(vals[1], m.l01) ||
            !parse_double(vals[2], m.l10) || !parse_double(vals[3], m.l11))
            fail(where + ": values must be real numbers");
        if (!m.is_finite()) fail(where + ": non-finite value");
        sampled->samples.push_back(m);
    }
    if (sampled->samples.size() != expected) {
        fail("truncated after record " + std::to_string(sampled->samples.size()) + " of " +
             std::to_string(expected));
    }

    const Box box{g.x0, g.x0 + (g.nx - 1) * g.dx, g.y0, g.y0 + (g.ny - 1) * g.dy};
    return {source,
            [sampled](double t, double x, double y) { return (*sampled)(t, x, y); },
            box, g.nt > 1};
}

DeformationField field_from_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FieldFormatError(path + ": cannot open field file");
    return field_from_grid_stream(in, path);
}

namespace {

void write_header(std::ostream& out, const char* magic, const SampleGrid& g) {
    out << magic << " v1 " << g.nx << ' ' << g.ny << ' ' << g.nt << ' ' << g.x0 << ' ' << g.y0
        << ' ' << g.dx << ' ' << g.dy << ' ' << g.dt << '\n';
}

}  // namespace

void write_field_samples(std::ostream& out, const DeformationField& field, const SampleGrid& g) {
    out << std::setprecision(17);
    write_header(out, "qwfield", g);
    for (int k = 0; k < g.nt; ++k)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const auto m = field(k * g.dt, g.x0 + ix * g.dx, g.y0 + iy * g.dy);
                out << m.l00 << ' ' << m.l01 << ' ' << m.l10 << ' ' << m.l11 << '\n';
            }
}

DeformationField resolve_field(const std::string& source) {
    if (source == "zero") return zero_deformation();
    if (source == "identity") return identity_deformation();
    if (source == "sphere") return sphere_deformation();
    const std::string prefix = "constant:";
    if (source.rfind(prefix, 0) == 0) {
        std::vector<double> v;
        std::istringstream ss(source.substr(prefix.size()));
        for (std::string t; std::getline(ss, t, ',');) {
            double d;
            if (!parse_double(t, d)) throw FieldFormatError("bad constant deformation '" + source + "'");
            v.push_back(d);
        }
        if (v.size() != 4) throw FieldFormatError("constant deformation needs 4 entries: " + source);
        return constant_deformation({v[0], v[1], v[2], v[3]});
    }
    return field_from_grid_file(source);
}

AngleSchedule::AngleSchedule(LField l, double epsilon, bool time_dependent)
    : l_(std::move(l)), epsilon_(epsilon), time_dependent_(time_dependent) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("epsilon must be positive");
}

double AngleSchedule::dx() const { return std::sqrt(epsilon_); }

std::array<double, 6> AngleSchedule::thetas(double t, double x, double y) const {
    const LCoefficients l = l_(t, x, y);
    const double s = std::sqrt(epsilon_);
    std::array<double, 6> out;
    for (int i = 0; i < 6; ++i) out[i] = 0.5 * std::numbers::pi + s * l[i];
    return out;
}

AngleSchedule compile_schedule(const DeformationField& field, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    return {[field](double t, double x, double y) { return lambda_to_l(field(t, x, y)); }, epsilon,
            field.time_dependent()};
}

DualityReport verify_duality(const AngleSchedule& schedule, const DeformationField& field,
                             const std::vector<SpacetimePoint>& points) {
    DualityReport rep;
    rep.points = points.size();
    const Mat2 sz = pauli_z();
    const double root = std::sqrt(schedule.epsilon());
    for (const auto& p : points) {
        const auto th = schedule.thetas(p.t, p.x, p.y);
        LCoefficients l;
        for (int i = 0; i < 6; ++i) l[i] = (th[i] - 0.5 * std::numbers::pi) / root;
        rep.lambda_residual =
            std::max(rep.lambda_residual, l_to_lambda(l).max_abs_diff(field(p.t, p.x, p.y)));
        rep.gauge_residual = std::max({rep.gauge_residual, std::abs(l[2] + l[1]), std::abs(l[5] + l[4])});
        for (int i = 0; i < 6; ++i) {
            const Mat2 b = beta(th[i]);
            const auto ev = hermitian_eigenvalues(b);
            rep.eigen_residual =
                std::max({rep.eigen_residual, std::abs(ev[0] + 1.0), std::abs(ev[1] - 1.0)});
            const Mat2 u = rotation_U(th[i]);
            rep.rotation_residual = std::max(rep.rotation_residual, b.max_abs_diff(u.adjoint() * sz * u));
        }
    }
    return rep;
}

std::vector<SpacetimePoint> random_sample_points(const Box& box, std::size_t count,
                                                 std::uint64_t seed, double tmax) {
    std::mt19937_64 rng(seed);
    auto finite_or = [](double v, double fallback) { return std::isfinite(v) ? v : fallback; };
    std::uniform_real_distribution<double> ux(finite_or(box.xmin, -10.0), finite_or(box.xmax, 10.0));
    std::uniform_real_distribution<double> uy(finite_or(box.ymin, -10.0), finite_or(box.ymax, 10.0));
    std::uniform_real_distribution<double> ut(0.0, tmax);
    std::vector<SpacetimePoint> pts(count);
    for (auto& p : pts) {
        p.x = ux(rng);
        p.y = uy(rng);
        p.t = tmax > 0.0 ? ut(rng) : 0.0;
    }
    return pts;
}

void write_schedule_samples(std::ostream& out, const AngleSchedule& schedule, const SampleGrid& g) {
    out << std::setprecision(17);
    write_header(out, "qwschedule", g);
    for (int k = 0; k < g.nt; ++k)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const auto th = schedule.thetas(k * g.dt, g.x0 + ix * g.dx, g.y0 + iy * g.dy);
                for (int i = 0; i < 6; ++i) out << th[i] << (i == 5 ? '\n' : ' ');
            }
}

}  // namespace triwalk
