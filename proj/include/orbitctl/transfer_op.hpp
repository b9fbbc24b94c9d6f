#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "orbitctl/errors.hpp"
#include "orbitctl/map.hpp"
#include "orbitctl/orbit_enum.hpp"
#include "orbitctl/spatial.hpp"
#include "orbitctl/thermo.hpp"

namespace orbitctl {

/// Row of the preimage table: one solution y of f(y) = x.
struct Preimage {
    cplx y;
    std::size_t nearest = 0; // mesh index standing in for y
    double r = 0.0;          // log |f'(y)|
    double theta = 0.0;      // arg f'(y) in [0, 2pi)
};

/// Backward orbit of a repelling fixed point at a fixed depth, used as a
/// nearest-neighbour collocation grid on the Julia set.
struct CollocationMesh {
    std::vector<cplx> points;
    std::vector<Preimage> preimages; // degree rows per point, point-major
    int degree = 0;
    int depth = 0;
    double resolution = 0.0; // largest nearest-neighbour gap
    cplx seed;

    std::size_t size() const noexcept { return points.size(); }
};

inline CollocationMesh build_mesh(const RationalMap& f, int depth)
{
    if (depth < 0) throw DomainError("mesh depth must be >= 0");
    auto seed = dominant_repelling_fixed_point(f);
    if (!seed) throw NotPeriodicError("no repelling fixed point to seed the mesh");

    CollocationMesh m;
    m.degree = f.degree();
    m.depth = depth;
    m.seed = *seed;
    m.points = deduplicate(backward_tree(f, *seed, depth), 1e-12);

    PointGrid grid(m.points);
    if (m.points.size() > 1)
        for (std::size_t i = 0; i < m.points.size(); ++i)
            m.resolution = std::max(m.resolution, grid.nearest(m.points[i], i).second);

    std::optional<InverseBranches> br;
    try {
        br.emplace(f);
    } catch (const BranchCutError&) {
    }
    m.preimages.reserve(m.points.size() * static_cast<std::size_t>(m.degree));
    for (cplx x : m.points) {
        std::vector<cplx> ys;
        if (br) {
            for (int b = 0; b < br->count(); ++b) ys.push_back((*br)(b, x));
        } else {
            ys = f.preimages(x);
        }
        for (auto& y : ys) {
            // one Newton polish on f(y) = x
            auto [fy, dfy] = f.value_and_derivative(y);
            if (std::abs(dfy) > 0.0) y -= (fy - x) / dfy;
        }
        for (std::size_t a = 0; a < ys.size(); ++a)
            for (std::size_t b = a + 1; b < ys.size(); ++b)
                if (std::abs(ys[a] - ys[b]) < 1e-8 * std::max(1.0, std::abs(ys[a])))
                    throw CriticalValueError("mesh point is (numerically) a critical value");
        for (cplx y : ys) {
            const auto dr = distortion_rotation(f, y);
            m.preimages.push_back({y, grid.nearest(y).first, dr.r, dr.theta});
        }
    }
    return m;
}

/// (L w)(x) = sum over preimages y of exp(s (r(y) - alpha) + i k theta(y)) w(nearest(y)).
inline std::vector<cplx> apply_operator(const CollocationMesh& mesh, cplx s, int k, double alpha,
                                        const std::vector<cplx>& w)
{
    if (w.size() != mesh.size()) throw DomainError("function size does not match the mesh");
    std::vector<cplx> out(mesh.size());
    const std::size_t d = static_cast<std::size_t>(mesh.degree);
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        cplx acc = 0.0;
        for (std::size_t b = 0; b < d; ++b) {
            const auto& p = mesh.preimages[i * d + b];
            acc += std::exp(s * (p.r - alpha) + cplx(0.0, k * p.theta)) * w[p.nearest];
        }
        out[i] = acc;
    }
    return out;
}

struct Eigendata {
    double log_eigenvalue = 0.0;
    std::vector<double> eigfun; // positive, max = 1
    int iterations = 0;
};

/// Power iteration for real s; stops when the Collatz-Wielandt bounds on the
/// eigenvalue agree to `tol` in log scale.
inline Eigendata leading_eigendata(const CollocationMesh& mesh, double s, double alpha, int max_iter = 5000,
                                   double tol = 1e-13)
{
    const std::size_t N = mesh.size(), d = static_cast<std::size_t>(mesh.degree);
    std::vector<double> weight(mesh.preimages.size());
    for (std::size_t i = 0; i < weight.size(); ++i) weight[i] = std::exp(s * (mesh.preimages[i].r - alpha));

    std::vector<double> w(N, 1.0), v(N);
    Eigendata out;
    for (int it = 0; it < max_iter; ++it) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, vmax = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            for (std::size_t b = 0; b < d; ++b) acc += weight[i * d + b] * w[mesh.preimages[i * d + b].nearest];
            v[i] = acc;
            const double ratio = acc / w[i];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            vmax = std::max(vmax, acc);
        }
        if (!(vmax > 0.0) || !std::isfinite(vmax)) throw NonConvergenceError("power iteration lost positivity");
        for (std::size_t i = 0; i < N; ++i) w[i] = v[i] / vmax;
        out.iterations = it + 1;
        if (std::log(hi) - std::log(lo) < tol) {
            out.log_eigenvalue = 0.5 * (std::log(hi) + std::log(lo));
            out.eigfun = std::move(w);
            return out;
        }
    }
    throw NonConvergenceError("power iteration did not converge in " + std::to_string(max_iter) + " steps");
}

/// Leading log-eigenvalue at s = t (alpha = 0); estimator of P(t r).
inline double transfer_pressure(const CollocationMesh& mesh, double t, double alpha = 0.0)
{
    return leading_eigendata(mesh, t, alpha).log_eigenvalue;
}

struct NormalizedOperator {
    std::shared_ptr<const CollocationMesh> mesh;
    double xi = 0.0;
    double alpha = 0.0;
    double pressure = 0.0;
    std::vector<double> log_eigfun;
    std::vector<double> weights; // normalized kernel, same layout as mesh->preimages
    double normalization_residual = 0.0;
};

inline NormalizedOperator normalize(std::shared_ptr<const CollocationMesh> mesh, double xi, double alpha)
{
    const auto eig = leading_eigendata(*mesh, xi, alpha);
    NormalizedOperator op;
    op.mesh = mesh;
    op.xi = xi;
    op.alpha = alpha;
    op.pressure = eig.log_eigenvalue;
    op.log_eigfun.resize(eig.eigfun.size());
    for (std::size_t i = 0; i < eig.eigfun.size(); ++i) op.log_eigfun[i] = std::log(eig.eigfun[i]);

    const std::size_t d = static_cast<std::size_t>(mesh->degree);
    op.weights.resize(mesh->preimages.size());
    for (std::size_t i = 0; i < mesh->size(); ++i) {
        double row = 0.0;
        for (std::size_t b = 0; b < d; ++b) {
            const auto& p = mesh->preimages[i * d + b];
            const double u = xi * (p.r - alpha) + op.log_eigfun[p.nearest] - op.log_eigfun[i] - op.pressure;
            op.weights[i * d + b] = std::exp(u);
            row += op.weights[i * d + b];
        }
        op.normalization_residual = std::max(op.normalization_residual, std::abs(row - 1.0));
    }
    if (!(op.normalization_residual < 1e-6))
        throw NormalizationError("normalized kernel rows do not sum to 1 (residual " +
                                 std::to_string(op.normalization_residual) + ")");
    return op;
}

inline NormalizedOperator normalize(const CollocationMesh& mesh, double xi, double alpha)
{
    return normalize(std::make_shared<const CollocationMesh>(mesh), xi, alpha);
}

/// Applies the normalized operator twisted by exp(i (b (r - alpha) + k theta)).
inline std::vector<cplx> apply_twisted(const NormalizedOperator& op, double b, int k, const std::vector<cplx>& w)
{
    const auto& mesh = *op.mesh;
    const std::size_t d = static_cast<std::size_t>(mesh.degree);
    std::vector<cplx> out(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const auto& p = mesh.preimages[i * d + j];
            const double phase = b * (p.r - op.alpha) + k * p.theta;
            acc += op.weights[i * d + j] * cplx(std::cos(phase), std::sin(phase)) * w[p.nearest];
        }
        out[i] = acc;
    }
    return out;
}

struct DecayTrace {
    double rate = 1.0;
    std::vector<double> log_norms; // log sup-norm after each step
};

/// Per-step sup-norm growth of the twisted normalized operator from w = 1,
/// fitted geometrically over the last half of the steps.
inline DecayTrace decay_trace(const NormalizedOperator& op, double b, int k, int n_steps)
{
    if (n_steps < 10) throw DomainError("decay probe needs at least 10 steps");
    std::vector<cplx> w(op.mesh->size(), cplx(1.0));
    DecayTrace tr;
    double log_scale = 0.0;
    for (int step = 0; step < n_steps; ++step) {
        w = apply_twisted(op, b, k, w);
        double nrm = 0.0;
        for (const auto& v : w) nrm = std::max(nrm, std::abs(v));
        if (nrm == 0.0) {
            tr.log_norms.push_back(-std::numeric_limits<double>::infinity());
            tr.rate = 0.0;
            return tr;
        }
        log_scale += std::log(nrm);
        for (auto& v : w) v /= nrm;
        tr.log_norms.push_back(log_scale);
    }
    const int start = n_steps / 2;
    double mx = 0, my = 0;
    const int cnt = n_steps - start;
    for (int i = start; i < n_steps; ++i) {
        mx += i;
        my += tr.log_norms[i];
    }
    mx /= cnt;
    my /= cnt;
    double sxy = 0, sxx = 0;
    for (int i = start; i < n_steps; ++i) {
        sxy += (i - mx) * (tr.log_norms[i] - my);
        sxx += (i - mx) * (i - mx);
    }
    tr.rate = std::exp(sxy / sxx);
    return tr;
}

inline double decay_probe(const NormalizedOperator& op, double b, int k, int n_steps)
{
    return decay_trace(op, b, k, n_steps).rate;
}

/// Bowen's equation with the leading log-eigenvalue as the pressure.
inline DimensionResult transfer_dimension(const CollocationMesh& mesh)
{
    auto r = bowen_root([&](double t) { return transfer_pressure(mesh, -t); });
    r.n_used = mesh.depth;
    r.method = DimensionMethod::transfer_op;
    return r;
}

} // namespace orbitctl
