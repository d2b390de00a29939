#pragma once

// Zeros of entire functions in rectangles of the complex plane.
//
// Counting is by the argument principle: the phase of f is continued along each edge
// with bisection until consecutive phase steps are below pi/2. Boxes holding more
// than one zero are quadrisected (off-centre, so that symmetry axes of real problems
// never carry a dividing line); single zeros are polished by Newton's method and
// their multiplicity is the winding number of a small circle around them.

#include "quasispec/characteristic.hpp"
#include "quasispec/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace quasispec {

using ComplexFunction = std::function<cplx(cplx)>;

struct Box {
    cplx center;
    double half_re = 1.0;
    double half_im = 1.0;

    double re0() const { return center.real() - half_re; }
    double re1() const { return center.real() + half_re; }
    double im0() const { return center.imag() - half_im; }
    double im1() const { return center.imag() + half_im; }

    static Box from_bounds(double re0, double re1, double im0, double im1) {
        return {cplx(0.5 * (re0 + re1), 0.5 * (im0 + im1)), 0.5 * (re1 - re0), 0.5 * (im1 - im0)};
    }

    bool contains(cplx z, double slack = 0.0) const {
        return z.real() >= re0() - slack && z.real() <= re1() + slack && z.imag() >= im0() - slack &&
               z.imag() <= im1() + slack;
    }

    /// Radius of the largest centred disk inside the box.
    double inscribed_radius() const { return std::min(half_re, half_im); }
};

struct RootOptions {
    int quadrature = 16;           // initial samples per edge
    double max_phase_step = pi / 2;
    int max_refine_depth = 30;
    int max_jitters = 6;
    double newton_tol = 1e-13;     // relative step size at convergence
    int newton_max_iter = 60;
    double cluster_rel = 1e-4;     // multiplicity disk radius relative to 1 + |lambda|
    int max_depth = 90;
    // Growth hint for entire functions of order 1/growth_order: edges get
    // phase_rate * |d lambda^{1/growth_order}| extra samples. 0 disables the hint.
    int growth_order = 0;
    double phase_rate = 4.0;
};

/// A zero of f on (or numerically indistinguishable from) a contour.
class BoundaryZero : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct Root {
    cplx lambda;
    int multiplicity = 1;
    double residual = 0.0; // |f(lambda)|
};

/// Ordering used for every eigenvalue list: |lambda| (to ten significant digits), then arg in (-pi, pi].
inline bool canonical_less(cplx a, cplx b) {
    auto key = [](cplx z) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9e", std::abs(z));
        return std::stod(buf);
    };
    const double ka = key(a), kb = key(b);
    if (ka != kb)
        return ka < kb;
    return std::arg(a) < std::arg(b);
}

namespace detail {

/// Phase bookkeeping with an edge cache shared across the boxes of one search.
class PhaseTracker {
public:
    PhaseTracker(const ComplexFunction& f, const RootOptions& opt) : f_(f), opt_(opt) {}

    cplx eval(cplx z) {
        ++evaluations_;
        const cplx v = f_(z);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw BoundaryZero("non-finite function value on contour");
        if (v == cplx(0.0))
            throw BoundaryZero("exact zero on contour");
        return v;
    }

    /// Continuous change of arg f along the segment a -> b.
    double edge(cplx a, cplx b) {
        const auto key = std::make_pair(std::make_pair(a.real(), a.imag()), std::make_pair(b.real(), b.imag()));
        const auto rkey = std::make_pair(key.second, key.first);
        if (auto it = cache_.find(key); it != cache_.end())
            return it->second;
        if (auto it = cache_.find(rkey); it != cache_.end())
            return -it->second;
        const int K = samples_for(a, b);
        double total = 0.0;
        cplx za = a, fa = eval(a);
        for (int i = 1; i <= K; ++i) {
            const cplx zb = (i == K) ? b : a + (b - a) * (static_cast<double>(i) / K);
            const cplx fb = eval(zb);
            total += refine(za, fa, zb, fb, 0);
            za = zb;
            fa = fb;
        }
        cache_[key] = total;
        return total;
    }

    /// Winding number of f along a closed polygon.
    int winding(const std::vector<cplx>& poly) {
        double total = 0.0;
        for (std::size_t i = 0; i < poly.size(); ++i)
            total += edge(poly[i], poly[(i + 1) % poly.size()]);
        const double w = total / (2.0 * pi);
        const double r = std::round(w);
        if (std::abs(w - r) > 0.05)
            throw NumericalError("argument principle did not produce an integer winding (" + std::to_string(w) + ")");
        return static_cast<int>(r);
    }

    int box_count(const Box& b) {
        const std::vector<cplx> poly{cplx(b.re0(), b.im0()), cplx(b.re1(), b.im0()), cplx(b.re1(), b.im1()),
                                     cplx(b.re0(), b.im1())};
        const int w = winding(poly);
        if (w < 0)
            throw NumericalError("negative zero count for an entire function");
        return w;
    }

    /// Winding of a circle approximated by a fine polygon.
    int circle_count(cplx c, double r, int points) {
        std::vector<cplx> poly;
        for (int i = 0; i < points; ++i)
            poly.push_back(c + std::polar(r, 2.0 * pi * i / points));
        return winding(poly);
    }

    long evaluations() const { return evaluations_; }
    const RootOptions& options() const { return opt_; }

private:
    int samples_for(cplx a, cplx b) const {
        if (opt_.growth_order <= 0)
            return opt_.quadrature;
        const int n = opt_.growth_order;
        const double L = std::abs(b - a);
        const double r = std::max({1.0, std::min({std::abs(a), std::abs(b), std::abs(0.5 * (a + b))})});
        const double drho = L * std::pow(r, 1.0 / n - 1.0) / n;
        return opt_.quadrature + static_cast<int>(std::ceil(opt_.phase_rate * drho));
    }

    // Steps below a quarter of the threshold are taken as they are. Larger ones (still
    // below the threshold) must agree with the sum over their two halves, which catches a
    // phase that wrapped around a nearby multiple zero.
    double refine(cplx za, cplx fa, cplx zb, cplx fb, int depth) {
        const double d = std::arg(fb / fa);
        if (std::abs(d) < 0.25 * opt_.max_phase_step)
            return d;
        if (depth >= opt_.max_refine_depth)
            throw BoundaryZero("phase refinement did not converge: zero suspected on contour");
        const cplx zm = 0.5 * (za + zb);
        const cplx fm = eval(zm);
        if (std::abs(d) < opt_.max_phase_step) {
            const double d1 = std::arg(fm / fa), d2 = std::arg(fb / fm);
            if (std::abs(d1) < 0.5 * opt_.max_phase_step && std::abs(d2) < 0.5 * opt_.max_phase_step &&
                std::abs(d1 + d2 - d) < 1e-9)
                return d;
        }
        return refine(za, fa, zm, fm, depth + 1) + refine(zm, fm, zb, fb, depth + 1);
    }

    const ComplexFunction& f_;
    RootOptions opt_;
    std::map<std::pair<std::pair<double, double>, std::pair<double, double>>, double> cache_;
    long evaluations_ = 0;
};

inline cplx fd_derivative(const ComplexFunction& f, cplx z) {
    const double h = 1e-6 * (1.0 + std::abs(z));
    return (f(z + h) - f(z - h)) / (2.0 * h);
}

} // namespace detail

/// Newton's method with multiplicity m; derivative by central difference. A zero of
/// multiplicity m is only determined to about eps^(1/m), and the step tolerance is capped there.
inline std::optional<cplx> newton_polish(const ComplexFunction& f, cplx z, int m, const RootOptions& opt = {},
                                         double max_travel = INFINITY) {
    const cplx z0 = z;
    const double tol = m > 1 ? std::max(opt.newton_tol, 10.0 * std::pow(1e-16, 1.0 / m)) : opt.newton_tol;
    for (int it = 0; it < opt.newton_max_iter; ++it) {
        const cplx fz = f(z);
        if (fz == cplx(0.0))
            return z;
        const cplx d = detail::fd_derivative(f, z);
        if (d == cplx(0.0) || !std::isfinite(std::abs(d)))
            return std::nullopt;
        const cplx step = static_cast<double>(m) * fz / d;
        if (!std::isfinite(std::abs(step)))
            return std::nullopt;
        z -= step;
        if (std::abs(z - z0) > max_travel)
            return std::nullopt;
        if (std::abs(step) <= tol * (1.0 + std::abs(z)))
            return z;
    }
    return std::nullopt;
}

/// Number of zeros of f inside the box. If a zero sits on the boundary the box is
/// shifted by k * (0.0123 + 0.0071i) * min(half-widths), k = 1, 2, ...
inline int count_zeros(const ComplexFunction& f, Box box, int quadrature = 16, Box* used = nullptr) {
    RootOptions opt;
    opt.quadrature = quadrature;
    for (int k = 0; k <= opt.max_jitters; ++k) {
        detail::PhaseTracker tr(f, opt);
        const Box b{box.center + static_cast<double>(k) * cplx(0.0123, 0.0071) * box.inscribed_radius(), box.half_re,
                    box.half_im};
        try {
            const int c = tr.box_count(b);
            if (used)
                *used = b;
            return c;
        } catch (const BoundaryZero&) {
        }
    }
    throw NumericalError("zero on the contour persists after jittering the box");
}

/// Multiplicity of an isolated zero: winding on a circle of radius cluster_rel * (1 + |z|),
/// shrunk by 10 until two consecutive radii agree.
inline int zero_multiplicity(const ComplexFunction& f, cplx z, const RootOptions& opt = {}) {
    detail::PhaseTracker tr(f, opt);
    double r = opt.cluster_rel * (1.0 + std::abs(z));
    int prev = tr.circle_count(z, r, 16);
    for (int i = 0; i < 4; ++i) {
        r /= 10.0;
        const int cur = tr.circle_count(z, r, 16);
        if (cur == prev)
            return cur;
        prev = cur;
    }
    throw NumericalError("multiplicity count unstable under disk shrinking");
}

struct RootSet {
    std::vector<Root> roots; // canonical order
    Box region;
    int region_count = 0;    // independent argument-principle count of `region`
    long evaluations = 0;
};

namespace detail {

class Resolver {
public:
    Resolver(const ComplexFunction& count_f, const ComplexFunction& polish_f, const RootOptions& opt)
        : opt_(opt), rough_(opt), count_(count_f), polish_(polish_f),
          tracker_(std::make_unique<PhaseTracker>(count_f, opt)) {
        rough_.newton_tol = 1e-7;
    }

    int count(const Box& b) { return tracker_->box_count(b); }

    void resolve(const Box& box, int c, int depth, std::vector<Root>& out) {
        if (c == 0)
            return;
        if (depth > opt_.max_depth)
            throw NumericalError("root isolation exceeded the subdivision depth limit");
        const double size = std::max(box.half_re, box.half_im);
        const bool tiny = size < opt_.cluster_rel * (1.0 + std::abs(box.center));
        if (c == 1 || tiny) {
            const double travel = tiny ? 10.0 * size : 4.0 * size;
            auto z = newton_polish(count_, box.center, c, rough_, travel);
            if (z)
                z = newton_polish(polish_, *z, c, opt_, travel);
            if (z && box.contains(*z, tiny ? 2.0 * size : 0.0)) {
                // a box count of one already is the winding number around a simple zero
                const int mult = c == 1 ? 1 : zero_multiplicity(polish_, *z, opt_);
                if (mult == c) {
                    out.push_back({*z, c, std::abs(polish_(*z))});
                    return;
                }
            }
            if (tiny) {
                // unresolved cluster: reported once at the box centre with the box count
                out.push_back({box.center, c, std::abs(polish_(box.center))});
                return;
            }
        }
        subdivide(box, c, depth, out);
    }

    long evaluations() const { return spent_ + tracker_->evaluations(); }

private:
    void subdivide(const Box& box, int c, int depth, std::vector<Root>& out) {
        static const double fx[] = {0.4731, 0.5387, 0.4419, 0.5613, 0.4137, 0.5891, 0.3859};
        static const double fy[] = {0.5263, 0.4611, 0.5543, 0.4389, 0.5829, 0.4163, 0.6091};
        for (int attempt = 0; attempt <= opt_.max_jitters; ++attempt) {
            const double xs = box.re0() + fx[attempt] * 2.0 * box.half_re;
            const double ys = box.im0() + fy[attempt] * 2.0 * box.half_im;
            const Box kids[4] = {Box::from_bounds(box.re0(), xs, box.im0(), ys), Box::from_bounds(xs, box.re1(), box.im0(), ys),
                                 Box::from_bounds(box.re0(), xs, ys, box.im1()), Box::from_bounds(xs, box.re1(), ys, box.im1())};
            int counts[4];
            try {
                int total = 0;
                for (int i = 0; i < 4; ++i)
                    total += counts[i] = count(kids[i]);
                if (total != c)
                    continue;
            } catch (const BoundaryZero&) {
                continue;
            }
            for (int i = 0; i < 4; ++i)
                resolve(kids[i], counts[i], depth + 1, out);
            return;
        }
        // Counts that never add up mean a phase step wrapped around a multiple zero.
        // Sampling is made finer for the rest of the search and the box is counted again.
        if (refinements_ >= 3)
            throw NumericalError("sub-box zero counts do not add up to the parent count");
        ++refinements_;
        spent_ += tracker_->evaluations();
        RootOptions finer = tracker_->options();
        finer.quadrature *= 4;
        finer.max_phase_step /= 2;
        tracker_ = std::make_unique<PhaseTracker>(count_, finer);
        resolve(box, count(box), depth + 1, out);
    }

    RootOptions opt_, rough_;
    const ComplexFunction& count_;
    const ComplexFunction& polish_;
    std::unique_ptr<PhaseTracker> tracker_;
    int refinements_ = 0;
    long spent_ = 0;
};

} // namespace detail

/// All zeros of f in `box`. With max_count > 0 the search starts from a small centred box
/// and doubles it (never beyond `box`) until the inscribed disk holds max_count zeros;
/// the returned region is the last box and every zero inside it is reported.
/// count_f is used for contour phases, polish_f for Newton and multiplicities
/// (they may be the same function evaluated at different accuracies).
inline RootSet find_roots(const ComplexFunction& count_f, const ComplexFunction& polish_f, const Box& box,
                          int max_count = 0, const RootOptions& opt = {}, double start_half_width = 0.0) {
    detail::Resolver res(count_f, polish_f, opt);
    std::vector<Root> roots;

    // Boxes whose edge passes through a zero are enlarged by a small factor and redone.
    auto stretch = [&](const Box& b, int attempt) {
        const double f = 1.0 + 0.0137 * attempt;
        return Box{b.center, b.half_re * f, b.half_im * f};
    };
    Box region = box;
    if (max_count <= 0 || start_half_width <= 0.0 || start_half_width >= box.inscribed_radius()) {
        for (int attempt = 0;; ++attempt) {
            // a caller-given box is shrunk rather than enlarged
            const Box b = attempt == 0 ? box : Box{box.center, box.half_re / (1.0 + 0.0137 * attempt),
                                                   box.half_im / (1.0 + 0.0137 * attempt)};
            std::vector<Root> found;
            try {
                res.resolve(b, res.count(b), 0, found);
            } catch (const BoundaryZero&) {
                if (attempt >= opt.max_jitters)
                    throw NumericalError("zero on the search box boundary persists after jittering");
                continue;
            }
            roots = std::move(found);
            region = b;
            break;
        }
    } else {
        const double ratio0 = start_half_width / box.inscribed_radius();
        Box inner;
        for (int attempt = 0;; ++attempt) {
            inner = stretch(Box{box.center, box.half_re * ratio0, box.half_im * ratio0}, attempt);
            try {
                res.resolve(inner, res.count(inner), 0, roots);
                break;
            } catch (const BoundaryZero&) {
                roots.clear();
                if (attempt >= opt.max_jitters)
                    throw NumericalError("zero on the search box boundary persists after jittering");
            }
        }
        while (true) {
            int inside = 0;
            for (const auto& r : roots)
                if (std::abs(r.lambda - box.center) <= inner.inscribed_radius())
                    inside += r.multiplicity;
            if (inside >= max_count || inner.half_re >= box.half_re)
                break;
            for (int attempt = 0;; ++attempt) {
                Box outer = stretch(Box{box.center, inner.half_re * 2.0, inner.half_im * 2.0}, attempt);
                if (outer.half_re > box.half_re)
                    outer = box;
                // the annulus outer \ inner as four rectangles
                const Box parts[4] = {Box::from_bounds(outer.re0(), outer.re1(), outer.im0(), inner.im0()),
                                      Box::from_bounds(outer.re0(), outer.re1(), inner.im1(), outer.im1()),
                                      Box::from_bounds(outer.re0(), inner.re0(), inner.im0(), inner.im1()),
                                      Box::from_bounds(inner.re1(), outer.re1(), inner.im0(), inner.im1())};
                std::vector<Root> found;
                try {
                    for (const auto& part : parts)
                        res.resolve(part, res.count(part), 0, found);
                } catch (const BoundaryZero&) {
                    if (attempt >= opt.max_jitters || outer.half_re == box.half_re)
                        throw NumericalError("zero on the search box boundary persists after jittering");
                    continue;
                }
                roots.insert(roots.end(), found.begin(), found.end());
                inner = outer;
                break;
            }
        }
        region = inner;
    }

    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return canonical_less(a.lambda, b.lambda); });
    int total = 0;
    for (const auto& r : roots)
        total += r.multiplicity;

    // independent recount of the whole region with a different sampling density
    RootOptions check = opt;
    check.quadrature = opt.quadrature + 7;
    detail::PhaseTracker tr(count_f, check);
    const int region_count = tr.box_count(region);
    if (region_count != total)
        throw NumericalError("inconsistent root set: multiplicities sum to " + std::to_string(total) +
                             " but the region count is " + std::to_string(region_count));
    return {std::move(roots), region, region_count, res.evaluations() + tr.evaluations()};
}

/// Newton from each guess; nullopt if any fails or two guesses land on the same zero.
inline std::optional<std::vector<cplx>> track_roots(const ComplexFunction& f, const std::vector<cplx>& guesses,
                                                    const RootOptions& opt = {}) {
    std::vector<cplx> out;
    for (std::size_t i = 0; i < guesses.size(); ++i) {
        double gap = INFINITY;
        for (std::size_t j = 0; j < guesses.size(); ++j)
            if (j != i)
                gap = std::min(gap, std::abs(guesses[j] - guesses[i]));
        auto z = newton_polish(f, guesses[i], 1, opt, std::isfinite(gap) ? 0.4 * gap : INFINITY);
        if (!z)
            return std::nullopt;
        out.push_back(*z);
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (std::abs(out[i] - out[j]) <= 1e-8 * (1.0 + std::abs(out[i])))
                return std::nullopt;
    return out;
}

/// Box centred at the origin with half-width (pi (count + 2))^n.
inline Box plan_search_box(int n, int count) {
    check_order(n);
    if (count < 1)
        throw InputError("search box needs a positive eigenvalue count");
    const double h = std::pow(pi * (count + 2), n);
    return {cplx(0.0), h, h};
}

/// k-th Laurent coefficient at lambda0 by the trapezoidal rule on |lambda - lambda0| = radius,
/// doubling the number of nodes until two successive values agree.
inline cplx laurent_coeff(const ComplexFunction& f, cplx lambda0, int k, double radius, int quadrature = 32,
                          double tol = 1e-11, int max_points = 1 << 14) {
    if (!(radius > 0.0))
        throw InputError("Laurent radius must be positive");
    auto rule = [&](int Q, double& fmax) {
        cplx s = 0.0;
        fmax = 0.0;
        for (int j = 0; j < Q; ++j) {
            const cplx u = std::polar(radius, 2.0 * pi * j / Q);
            const cplx v = f(lambda0 + u);
            fmax = std::max(fmax, std::abs(v));
            s += v * std::pow(u, -k);
        }
        return s / static_cast<double>(Q);
    };
    double fmax = 0.0;
    int Q = std::max(4, quadrature);
    cplx prev = rule(Q, fmax);
    while (2 * Q <= max_points) {
        Q *= 2;
        const cplx cur = rule(Q, fmax);
        const double scale = fmax * std::pow(radius, -k);
        if (std::abs(cur - prev) <= tol * scale)
            return cur;
        prev = cur;
    }
    throw NumericalError("Laurent coefficient quadrature did not converge");
}


/// Eigenvalues of one boundary value problem.
struct Spectrum {
    BoundarySpec problem;
    Box region;
    std::vector<Root> eigenvalues; // canonical order
    int region_count = 0;          // argument-principle count of `region`

    int total_multiplicity() const {
        int t = 0;
        for (const auto& r : eigenvalues)
            t += r.multiplicity;
        return t;
    }

    /// Eigenvalues repeated according to multiplicity, in canonical order.
    std::vector<cplx> expanded() const {
        std::vector<cplx> out;
        for (const auto& r : eigenvalues)
            for (int i = 0; i < r.multiplicity; ++i)
                out.push_back(r.lambda);
        return out;
    }
};

struct SpectrumOptions {
    double tol = 1e-11;        // propagation tolerance for polishing
    double count_tol = 1e-6;   // propagation tolerance for contour phases
    RootOptions roots;
};

/// Zeros of char_value(F, ., spec) in `box`. With max_count > 0 the search grows from
/// a small centred box and stops once max_count eigenvalues lie in its inscribed disk.
inline Spectrum find_spectrum(const AssociatedMatrix& F, const BoundarySpec& spec, const Box& box, int max_count = 0,
                              const SpectrumOptions& opt = {}) {
    spec.validate();
    if (spec.order != F.order())
        throw InputError("boundary spec order does not match the associated matrix");
    const PropagatorOptions coarse{opt.count_tol}, fine{opt.tol};
    const auto rows = spec.rows();
    const auto cols = spec.free_columns();
    ComplexFunction fc = [&](cplx l) { return boundary_minors(F, l, rows, {cols}, coarse).front(); };
    ComplexFunction fp = [&](cplx l) { return boundary_minors(F, l, rows, {cols}, fine).front(); };
    const double start = std::max(1.0, std::pow(pi / 2.0, spec.order));
    RootOptions ro = opt.roots;
    if (ro.growth_order == 0) {
        ro.growth_order = spec.order;
        ro.phase_rate = 2.0 * static_cast<double>(rows.size());
    }
    auto rs = find_roots(fc, fp, box, max_count, ro, start);
    return {spec, rs.region, std::move(rs.roots), rs.region_count};
}

} // namespace quasispec
