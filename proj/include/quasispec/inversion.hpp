#pragma once

// Forward map from coefficients to leading eigenvalues and Levenberg-Marquardt recovery
// of coefficients from target spectra.

#include "quasispec/characteristic.hpp"
#include "quasispec/core.hpp"
#include "quasispec/identities.hpp"
#include "quasispec/model.hpp"
#include "quasispec/parallel.hpp"
#include "quasispec/rootfinder.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace quasispec {

using EigenLists = std::vector<std::vector<cplx>>;

/// The designated spectra for the order: S1, S2 / S12, S13, S23 / S123, S124, S125.
inline std::vector<std::string> default_selection(int order) { return spectrum_names(order); }

struct ForwardOptions {
    SpectrumOptions spectrum;
};

/// First N eigenvalues (canonical order, multiplicities repeated) of each selected spectrum.
inline EigenLists forward_map(const CoefficientSet& cs, const std::vector<std::string>& selection, int N,
                              const ForwardOptions& opt = {}, std::vector<Spectrum>* spectra = nullptr) {
    if (N < 1)
        throw InputError("eigenvalue count must be positive");
    const auto F = build_associated_matrix(cs);
    EigenLists out;
    for (const auto& name : selection) {
        const auto spec = spectrum_spec(cs.order(), name);
        auto sp = find_spectrum(F, spec, plan_search_box(cs.order(), N), N, opt.spectrum);
        auto ev = sp.expanded();
        if (static_cast<int>(ev.size()) < N)
            throw NumericalError("spectrum " + name + ": only " + std::to_string(ev.size()) +
                                 " eigenvalues inside the capped search box");
        ev.resize(N);
        out.push_back(std::move(ev));
        if (spectra)
            spectra->push_back(std::move(sp));
    }
    return out;
}

/// Real Chebyshev-mode parameterization of the unknown functions. For order 4 with the
/// gauge flag, tau2 keeps tau2(1) = tau2(0) by eliminating its T_1 coefficient:
/// a_1 = -(a_3 + a_5 + ...).
class Parameterization {
public:
    Parameterization(int order, int modes, bool gauge = true, bool complex_modes = false)
        : order_(order), modes_(modes), gauge_(gauge && order == 4), complex_(complex_modes) {
        check_order(order);
        if (modes < 2)
            throw InputError("at least two Chebyshev modes per function are required");
    }

    int order() const { return order_; }
    int modes() const { return modes_; }
    bool gauge() const { return gauge_; }
    bool complex_modes() const { return complex_; }

    int real_size() const {
        int s = 0;
        for (const auto& nm : function_names(order_))
            s += free_modes(nm);
        return s;
    }
    int size() const { return complex_ ? 2 * real_size() : real_size(); }

    CoefficientSet to_coefficients(const Eigen::VectorXd& theta) const {
        if (theta.size() != size())
            throw InputError("parameter vector has the wrong length");
        std::vector<std::vector<cplx>> lists;
        int pos = 0;
        const int half = real_size();
        for (const auto& nm : function_names(order_)) {
            std::vector<cplx> c(modes_, 0.0);
            const bool constrained = gauge_ && nm == "tau2";
            for (int k = 0; k < modes_; ++k) {
                if (constrained && k == 1)
                    continue;
                c[k] = complex_ ? cplx(theta[pos], theta[pos + half]) : cplx(theta[pos]);
                ++pos;
            }
            if (constrained) {
                cplx s = 0.0;
                for (int k = 3; k < modes_; k += 2)
                    s += c[k];
                c[1] = -s;
            }
            lists.push_back(std::move(c));
        }
        return CoefficientSet::chebyshev(order_, lists);
    }

    /// Interpolation at `modes` Chebyshev points; tau2 is then moved to the gauge
    /// representative by subtracting c x.
    Eigen::VectorXd from_coefficients(const CoefficientSet& cs) const {
        if (cs.order() != order_)
            throw InputError("coefficient set order does not match the parameterization");
        std::vector<cplx> flat;
        for (const auto& nm : function_names(order_)) {
            const auto& f = cs[nm];
            auto c = ChebSeries::interpolate([&](double x) { return f(x); }, modes_).coeffs();
            c.resize(modes_, 0.0);
            if (gauge_ && nm == "tau2") {
                cplx odd = 0.0;
                for (int k = 1; k < modes_; k += 2)
                    odd += c[k];
                // tau2(1) - tau2(0) = 2 * sum of odd coefficients; x = (T_0 + T_1) / 2
                c[0] -= odd;
                c[1] -= odd;
            }
            for (int k = 0; k < modes_; ++k)
                if (!(gauge_ && nm == "tau2" && k == 1))
                    flat.push_back(c[k]);
        }
        Eigen::VectorXd theta(size());
        const int half = real_size();
        for (int i = 0; i < half; ++i) {
            theta[i] = flat[i].real();
            if (complex_)
                theta[i + half] = flat[i].imag();
        }
        return theta;
    }

private:
    int free_modes(const std::string& nm) const { return (gauge_ && nm == "tau2") ? modes_ - 1 : modes_; }

    int order_, modes_;
    bool gauge_, complex_;
};

/// Greedy nearest-neighbour pairing: result[i] is the computed index matched to target i.
inline std::vector<int> match_nearest(const std::vector<cplx>& targets, const std::vector<cplx>& computed) {
    const int n = static_cast<int>(targets.size());
    if (static_cast<int>(computed.size()) < n)
        throw InputError("fewer computed eigenvalues than targets");
    std::vector<int> result(n, -1);
    std::vector<bool> used(computed.size(), false);
    for (int step = 0; step < n; ++step) {
        double best = INFINITY;
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i) {
            if (result[i] >= 0)
                continue;
            for (std::size_t j = 0; j < computed.size(); ++j)
                if (!used[j] && std::abs(targets[i] - computed[j]) < best) {
                    best = std::abs(targets[i] - computed[j]);
                    bi = i;
                    bj = static_cast<int>(j);
                }
        }
        result[bi] = bj;
        used[bj] = true;
    }
    return result;
}

struct InverseSpec {
    int order = 0;
    std::vector<std::string> spectra;  // spectra_selection
    EigenLists targets;                // first N eigenvalues of each selected spectrum
    int modes = 6;
    bool gauge = true;                 // order 4: tau2(1) = tau2(0)
    bool complex_modes = false;

    int count() const { return targets.empty() ? 0 : static_cast<int>(targets.front().size()); }

    void validate() const {
        check_order(order);
        if (spectra.empty() || spectra.size() != targets.size())
            throw InputError("one target list per selected spectrum is required");
        for (const auto& nm : spectra)
            spectrum_spec(order, nm);
        for (const auto& t : targets)
            if (t.size() != targets.front().size() || t.empty())
                throw InputError("all target lists must have the same positive length");
    }
};

struct InverseOptions {
    int max_iterations = 40;
    double tol = 1e-10;        // on |residual| / |targets|
    double mu0 = 1e-3;
    double fd_step = 1e-5;
    double rank_rtol = 1e-7;   // relative singular value threshold
    ForwardOptions forward;
    std::optional<CoefficientSet> truth; // for error tracking in the history only
};

struct IterationRecord {
    int iteration = 0;
    double residual = 0.0;     // |r| (absolute, Euclidean over Re/Im parts)
    double relative = 0.0;     // |r| / |targets|
    double mu = 0.0;
    bool accepted = false;
    double error = NAN;        // sup-norm error against InverseOptions::truth when set
};

struct InverseResult {
    CoefficientSet recovered = CoefficientSet::zero(3);
    Eigen::VectorXd parameters;
    int iterations = 0;
    double residual = 0.0;
    double relative_residual = 0.0;
    std::vector<IterationRecord> history;
    bool converged = false;
    bool rank_deficient = false;
    int rank = 0;
    int parameter_count = 0;
    std::string message;
    EigenLists final_eigenvalues;
    std::vector<Spectrum> spectra; // full spectrum computations behind final_eigenvalues
};

/// Sup-norm differences on 201 points of [0,1], per function; for gauged order 4,
/// tau2 is compared modulo c x (minimum over c).
struct CoefficientErrors {
    std::vector<std::string> names;
    std::vector<double> sup;
    double q_sup = NAN;        // order 4: sup |tau2'' - tau2~''|
    double max() const { return sup.empty() ? 0.0 : *std::max_element(sup.begin(), sup.end()); }
};

inline CoefficientErrors coefficient_errors(const CoefficientSet& a, const CoefficientSet& b, bool modulo_gauge = true) {
    if (a.order() != b.order())
        throw InputError("coefficient sets of different orders");
    CoefficientErrors e;
    const int P = 201;
    for (const auto& nm : function_names(a.order())) {
        std::vector<cplx> d(P);
        std::vector<double> xs(P);
        for (int i = 0; i < P; ++i) {
            xs[i] = static_cast<double>(i) / (P - 1);
            d[i] = a[nm](xs[i]) - b[nm](xs[i]);
        }
        auto sup_at = [&](cplx c) {
            double m = 0.0;
            for (int i = 0; i < P; ++i)
                m = std::max(m, std::abs(d[i] - c * xs[i]));
            return m;
        };
        double v = sup_at(0.0);
        if (modulo_gauge && a.order() == 4 && nm == "tau2") {
            // convex in c: nested ternary search over Re c and Im c
            const double R = 4.0 * (1.0 + v);
            auto best_re = [&](double im, double* val) {
                double lo = -R, hi = R;
                for (int it = 0; it < 100; ++it) {
                    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                    if (sup_at(cplx(m1, im)) < sup_at(cplx(m2, im)))
                        hi = m2;
                    else
                        lo = m1;
                }
                *val = sup_at(cplx(0.5 * (lo + hi), im));
                return 0.5 * (lo + hi);
            };
            double lo = -R, hi = R, tmp;
            bool real_only = true;
            for (const auto& z : d)
                real_only = real_only && z.imag() == 0.0;
            if (real_only) {
                best_re(0.0, &v);
            } else {
                for (int it = 0; it < 60; ++it) {
                    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                    double v1, v2;
                    best_re(m1, &v1);
                    best_re(m2, &v2);
                    if (v1 < v2)
                        hi = m2;
                    else
                        lo = m1;
                }
                best_re(0.5 * (lo + hi), &tmp);
                v = tmp;
            }
        }
        e.names.push_back(nm);
        e.sup.push_back(v);
    }
    if (a.order() == 4) {
        const auto qa = a["tau2"].derivative().derivative(), qb = b["tau2"].derivative().derivative();
        double m = 0.0;
        for (int i = 0; i < P; ++i) {
            const double x = static_cast<double>(i) / (P - 1);
            m = std::max(m, std::abs(qa(x) - qb(x)));
        }
        e.q_sup = m;
    }
    return e;
}

namespace detail {

class InverseProblem {
public:
    InverseProblem(const InverseSpec& spec, const InverseOptions& opt)
        : spec_(spec), opt_(opt), param_(spec.order, spec.modes, spec.gauge, spec.complex_modes) {
        for (const auto& nm : spec.spectra)
            bspecs_.push_back(spectrum_spec(spec.order, nm));
        tnorm_ = 0.0;
        for (const auto& t : spec.targets)
            for (const auto& z : t)
                tnorm_ += std::norm(z);
        tnorm_ = std::sqrt(tnorm_);
    }

    const Parameterization& param() const { return param_; }
    double target_norm() const { return tnorm_; }

    EigenLists full(const Eigen::VectorXd& theta, std::vector<Spectrum>* spectra = nullptr) const {
        return forward_map(param_.to_coefficients(theta), spec_.spectra, spec_.count(), opt_.forward, spectra);
    }

    /// Newton continuation from `base` (identity preserved). With derivative hints a chord
    /// iteration is tried first. Spectra that fail are recomputed from scratch and re-matched.
    EigenLists tracked(const Eigen::VectorXd& theta, const EigenLists& base, const EigenLists* derivs = nullptr) const {
        const auto F = build_associated_matrix(param_.to_coefficients(theta));
        const PropagatorOptions fine{opt_.forward.spectrum.tol};
        EigenLists out;
        for (std::size_t s = 0; s < bspecs_.size(); ++s) {
            const auto& b = bspecs_[s];
            ComplexFunction f = [&](cplx l) { return char_value(F, l, b, fine); };
            std::optional<std::vector<cplx>> got;
            if (derivs)
                got = chord(f, base[s], (*derivs)[s]);
            if (!got)
                got = track_roots(f, base[s], opt_.forward.spectrum.roots);
            if (!got) {
                auto sp = find_spectrum(F, b, plan_search_box(spec_.order, spec_.count()), spec_.count(),
                                        opt_.forward.spectrum);
                auto ev = sp.expanded();
                if (static_cast<int>(ev.size()) < spec_.count())
                    throw NumericalError("spectrum " + spec_.spectra[s] + ": too few eigenvalues in the search box");
                ev.resize(spec_.count());
                got = ev;
            }
            out.push_back(*got);
        }
        return out;
    }

    EigenLists derivatives(const Eigen::VectorXd& theta, const EigenLists& eigs) const {
        const auto F = build_associated_matrix(param_.to_coefficients(theta));
        const PropagatorOptions fine{opt_.forward.spectrum.tol};
        EigenLists out;
        for (std::size_t s = 0; s < bspecs_.size(); ++s) {
            const auto& b = bspecs_[s];
            ComplexFunction f = [&](cplx l) { return char_value(F, l, b, fine); };
            std::vector<cplx> d;
            for (const auto& z : eigs[s])
                d.push_back(fd_derivative(f, z));
            out.push_back(std::move(d));
        }
        return out;
    }

    /// Pairing of each target with a computed eigenvalue, per spectrum.
    std::vector<std::vector<int>> pairing(const EigenLists& eigs) const {
        std::vector<std::vector<int>> p;
        for (std::size_t s = 0; s < eigs.size(); ++s)
            p.push_back(match_nearest(spec_.targets[s], eigs[s]));
        return p;
    }

    Eigen::VectorXd residual(const EigenLists& eigs, const std::vector<std::vector<int>>& pair) const {
        const int N = spec_.count();
        Eigen::VectorXd r(2 * N * static_cast<int>(eigs.size()));
        int pos = 0;
        for (std::size_t s = 0; s < eigs.size(); ++s)
            for (int i = 0; i < N; ++i) {
                const cplx d = eigs[s][pair[s][i]] - spec_.targets[s][i];
                r[pos++] = d.real();
                r[pos++] = d.imag();
            }
        return r;
    }

private:
    static std::optional<std::vector<cplx>> chord(const ComplexFunction& f, const std::vector<cplx>& start,
                                                  const std::vector<cplx>& d) {
        std::vector<cplx> out;
        for (std::size_t i = 0; i < start.size(); ++i) {
            cplx z = start[i];
            bool ok = false;
            for (int it = 0; it < 8 && !ok; ++it) {
                const cplx step = f(z) / d[i];
                if (!std::isfinite(std::abs(step)))
                    return std::nullopt;
                z -= step;
                ok = std::abs(step) <= 1e-13 * (1.0 + std::abs(z));
            }
            if (!ok || std::abs(z - start[i]) > 1e-2 * (1.0 + std::abs(start[i])))
                return std::nullopt;
            out.push_back(z);
        }
        return out;
    }

    InverseSpec spec_;
    InverseOptions opt_;
    Parameterization param_;
    std::vector<BoundarySpec> bspecs_;
    double tnorm_ = 1.0;
};

} // namespace detail

/// Damped least squares on target - forward_map(params), Marquardt scaling, forward-difference
/// Jacobian (columns evaluated concurrently), nearest-neighbour eigenvalue pairing.
inline InverseResult recover(const InverseSpec& spec, const CoefficientSet& initial, const InverseOptions& opt = {}) {
    spec.validate();
    if (initial.order() != spec.order)
        throw InputError("initial coefficient set has the wrong order");
    detail::InverseProblem prob(spec, opt);
    const auto& param = prob.param();
    const int P = param.size();
    const double tnorm = std::max(prob.target_norm(), 1e-300);

    InverseResult res;
    res.parameter_count = P;
    Eigen::VectorXd theta = param.from_coefficients(initial);
    EigenLists eigs = prob.full(theta);
    auto pair = prob.pairing(eigs);
    Eigen::VectorXd r = prob.residual(eigs, pair);
    double mu = opt.mu0;

    auto record = [&](int it, double norm, bool accepted) {
        IterationRecord rec{it, norm, norm / tnorm, mu, accepted, NAN};
        if (opt.truth)
            rec.error = coefficient_errors(param.to_coefficients(theta), *opt.truth, param.gauge()).max();
        res.history.push_back(rec);
    };
    record(0, r.norm(), true);

    Eigen::MatrixXd J;
    bool need_jacobian = true;
    double prev_norm = r.norm();
    int it = 0;
    while (r.norm() > opt.tol * tnorm && it < opt.max_iterations) {
        if (need_jacobian) {
            const auto derivs = prob.derivatives(theta, eigs);
            J.resize(r.size(), P);
            std::vector<Eigen::VectorXd> cols(P);
            parallel_for(P, [&](int j) {
                Eigen::VectorXd tp = theta;
                const double h = opt.fd_step * std::max(1.0, std::abs(theta[j]));
                tp[j] += h;
                const auto e = prob.tracked(tp, eigs, &derivs);
                cols[j] = (prob.residual(e, pair) - r) / h;
            });
            for (int j = 0; j < P; ++j)
                J.col(j) = cols[j];
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
            const auto& sv = svd.singularValues();
            int rank = 0;
            for (int i = 0; i < sv.size(); ++i)
                if (sv[i] > opt.rank_rtol * sv[0])
                    ++rank;
            res.rank = rank;
            res.rank_deficient = rank < P;
            need_jacobian = false;
        }
        ++it;
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        Eigen::MatrixXd A = JtJ;
        for (int j = 0; j < P; ++j)
            A(j, j) += mu * std::max(JtJ(j, j), 1e-12);
        const Eigen::VectorXd step = -A.completeOrthogonalDecomposition().solve(g);
        const Eigen::VectorXd trial = theta + step;

        bool accepted = false;
        EigenLists te;
        std::vector<std::vector<int>> tpair;
        Eigen::VectorXd tr;
        try {
            te = prob.tracked(trial, eigs);
            tpair = prob.pairing(te);
            tr = prob.residual(te, tpair);
            accepted = tr.norm() < r.norm();
        } catch (const NumericalError&) {
            accepted = false;
        }
        if (accepted) {
            theta = trial;
            eigs = std::move(te);
            pair = std::move(tpair);
            r = tr;
            mu = std::max(mu / 10.0, 1e-12);
            need_jacobian = true;
        } else {
            mu *= 10.0;
        }
        record(it, r.norm(), accepted);
        if (mu > 1e12) {
            res.message = "damping exceeded 1e12 without reducing the residual";
            break;
        }
        if (accepted && step.norm() <= 1e-13 * (1.0 + theta.norm()))
            break;
        if (accepted && prev_norm - r.norm() <= 1e-6 * prev_norm) {
            res.message = "stationary: residual reduction below 1e-6 per step";
            break;
        }
        if (accepted)
            prev_norm = r.norm();
    }

    // final residual from an independent full spectrum computation
    eigs = prob.full(theta, &res.spectra);
    pair = prob.pairing(eigs);
    r = prob.residual(eigs, pair);
    res.recovered = param.to_coefficients(theta);
    res.parameters = theta;
    res.iterations = it;
    res.residual = r.norm();
    res.relative_residual = r.norm() / tnorm;
    res.final_eigenvalues = eigs;
    if (it == 0 && res.rank == 0) {
        // no Jacobian was needed; measure the rank at the solution for the report
        const auto derivs = prob.derivatives(theta, eigs);
        Eigen::MatrixXd J0(r.size(), P);
        for (int j = 0; j < P; ++j) {
            Eigen::VectorXd tp = theta;
            const double h = opt.fd_step * std::max(1.0, std::abs(theta[j]));
            tp[j] += h;
            J0.col(j) = (prob.residual(prob.tracked(tp, eigs, &derivs), pair) - r) / h;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J0);
        const auto& sv = svd.singularValues();
        for (int i = 0; i < sv.size(); ++i)
            if (sv[i] > opt.rank_rtol * sv[0])
                ++res.rank;
        res.rank_deficient = res.rank < P;
    }
    res.converged = res.relative_residual <= opt.tol && !res.rank_deficient;
    if (res.converged)
        res.message.clear();
    if (res.message.empty()) {
        if (res.rank_deficient)
            res.message = "Jacobian rank " + std::to_string(res.rank) + " < " + std::to_string(P) + " parameters";
        else if (res.converged)
            res.message = "converged";
        else
            res.message = "residual above tolerance after " + std::to_string(it) + " iterations";
    }
    return res;
}

struct TwinOptions {
    int modes = 6;
    unsigned long long seed = 1;
    std::vector<std::string> selection; // empty: the designated spectra of the order
    InverseOptions inverse;
    bool separation = true;
};

struct TwinReport {
    CoefficientSet truth = CoefficientSet::zero(3);
    CoefficientSet initial = CoefficientSet::zero(3);
    InverseSpec spec;
    InverseResult result;
    CoefficientErrors errors;       // recovered vs truth (modulo c x for tau2)
    SeparationReport separation;    // zeros of consecutive Delta_mm over the target region
    std::vector<Spectrum> target_spectra;
    double perturbation = 0.0;
};

/// Targets from forward_map(truth), initial guess = projection of truth plus a seeded
/// uniform perturbation in [-scale, scale] per parameter, then recover.
inline TwinReport twin_experiment(const CoefficientSet& truth, double perturbation, int N, const TwinOptions& opt = {}) {
    TwinReport rep;
    rep.truth = truth;
    rep.perturbation = perturbation;
    const int n = truth.order();
    const auto selection = opt.selection.empty() ? default_selection(n) : opt.selection;
    rep.spec = InverseSpec{n, selection, forward_map(truth, selection, N, opt.inverse.forward, &rep.target_spectra),
                           opt.modes, true, false};

    const Parameterization param(n, opt.modes, true, false);
    Eigen::VectorXd theta = param.from_coefficients(truth);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-perturbation, perturbation);
    if (perturbation > 0.0)
        for (int i = 0; i < theta.size(); ++i)
            theta[i] += u(rng);
    rep.initial = param.to_coefficients(theta);

    InverseOptions io = opt.inverse;
    io.truth = truth;
    rep.result = recover(rep.spec, rep.initial, io);
    rep.errors = coefficient_errors(rep.result.recovered, truth, true);

    if (opt.separation) {
        double h = 0.0;
        for (const auto& t : rep.spec.targets)
            for (const auto& z : t)
                h = std::max(h, std::abs(z));
        h = 1.1 * h + 1.0;
        rep.separation = check_separation(
            separation_pairs(build_associated_matrix(truth), Box{cplx(0.0), h, h}, opt.inverse.forward.spectrum));
    }
    return rep;
}

} // namespace quasispec
