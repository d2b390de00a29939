#pragma once

// JSON and CSV serialization. Complex numbers are written as [re, im]; on input a
// bare number is accepted as a real value.

#include "quasispec/characteristic.hpp"
#include "quasispec/core.hpp"
#include "quasispec/identities.hpp"
#include "quasispec/inversion.hpp"
#include "quasispec/model.hpp"
#include "quasispec/rootfinder.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace quasispec {

using json = nlohmann::ordered_json;

namespace io {

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from(const json& j, const std::string& where) {
    if (j.is_number())
        return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw InputError(where + ": expected a number or a [re, im] pair");
}

inline std::vector<cplx> complex_list(const json& j, const std::string& where) {
    if (!j.is_array())
        throw InputError(where + ": expected an array");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(complex_from(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw InputError(where + ": missing field '" + key + "'");
    return j.at(key);
}

inline int int_field(const json& j, const char* key, const std::string& where) {
    const auto& v = field(j, key, where);
    if (!v.is_number_integer())
        throw InputError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

inline json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(to_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

inline json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline void write_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write '" + path + "'");
    out << text;
}

/// FNV-1a 64-bit digest of a byte string, as 16 hex digits.
inline std::string digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string digest(const json& j) { return digest(j.dump()); }

// ---- coefficient sets ----------------------------------------------------------

/// {"order": n, "<name>": {"type": "chebyshev", "coeffs": [...]} | {"type": "grid", "samples": [...], "degree": d}, ...}
inline json to_json(const CoefficientSet& cs) {
    json out = {{"order", cs.order()}};
    for (const auto& nm : function_names(cs.order())) {
        const auto& f = cs.fn(nm);
        json list = json::array();
        if (f.origin == Representation::grid) {
            for (const auto& v : f.samples)
                list.push_back(to_json(v));
            out[nm] = {{"type", "grid"}, {"samples", list}, {"degree", f.degree}};
        } else {
            for (const auto& v : f.series.coeffs())
                list.push_back(to_json(v));
            out[nm] = {{"type", "chebyshev"}, {"coeffs", list}};
        }
    }
    return out;
}

inline CoefficientSet coefficients_from(const json& j, const std::string& where = "problem") {
    const int order = int_field(j, "order", where);
    check_order(order);
    const auto& names = function_names(order);
    for (const auto& [key, _] : j.items())
        if (key != "order" && std::find(names.begin(), names.end(), key) == names.end())
            throw InputError(where + ": unexpected field '" + key + "' for order " + std::to_string(order));
    std::map<std::string, CoefficientFunction> out;
    for (const auto& name : names) {
        const std::string w = where + "." + name;
        const auto& spec = field(j, name.c_str(), where);
        const auto& type = field(spec, "type", w);
        if (!type.is_string())
            throw InputError(w + ".type: expected a string");
        const auto t = type.get<std::string>();
        if (t == "chebyshev") {
            out[name] = from_chebyshev(complex_list(field(spec, "coeffs", w), w + ".coeffs"));
        } else if (t == "grid") {
            const int degree = spec.contains("degree") ? int_field(spec, "degree", w) : 1;
            out[name] = from_grid(complex_list(field(spec, "samples", w), w + ".samples"), degree);
        } else {
            throw InputError(w + ".type: expected 'chebyshev' or 'grid'");
        }
    }
    return CoefficientSet(order, std::move(out));
}

// ---- spectra ---------------------------------------------------------------------

inline json to_json(const BoundarySpec& b) {
    return {{"order", b.order}, {"at_zero", b.at_zero}, {"at_one", b.at_one}};
}

inline json to_json(const Box& b) {
    return {{"center", to_json(b.center)}, {"half_widths", json::array({b.half_re, b.half_im})}};
}

inline json to_json(const Spectrum& s, const std::string& name = "") {
    json ev = json::array(), res = json::array();
    for (const auto& r : s.eigenvalues) {
        ev.push_back(json::array({r.lambda.real(), r.lambda.imag(), r.multiplicity}));
        res.push_back(r.residual);
    }
    json problem = to_json(s.problem);
    if (!name.empty())
        problem["spectrum"] = name;
    return {{"problem", problem}, {"region", to_json(s.region)}, {"eigenvalues", ev}, {"residuals", res},
            {"total_multiplicity", s.total_multiplicity()}, {"region_count", s.region_count}};
}

inline std::string spectrum_csv(const Spectrum& s) {
    std::ostringstream out;
    out.precision(17);
    out << "index,re,im,multiplicity,residual\n";
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        const auto& r = s.eigenvalues[i];
        out << i + 1 << "," << r.lambda.real() << "," << r.lambda.imag() << "," << r.multiplicity << ","
            << r.residual << "\n";
    }
    return out.str();
}

// ---- Weyl samples ------------------------------------------------------------------

inline json to_json(const WeylSample& w) {
    return {{"lambda", to_json(w.lambda)}, {"M", matrix_json(w.matrix)}, {"deltas", matrix_json(w.deltas)}};
}

// ---- inverse problems -------------------------------------------------------------

inline json to_json(const InverseSpec& s) {
    json t = json::array();
    for (const auto& list : s.targets) {
        json l = json::array();
        for (const auto& z : list)
            l.push_back(to_json(z));
        t.push_back(l);
    }
    return {{"order", s.order}, {"spectra", s.spectra}, {"targets", t}, {"modes", s.modes},
            {"gauge", s.gauge}, {"complex_modes", s.complex_modes}};
}

inline InverseSpec inverse_spec_from(const json& j, const std::string& where = "targets") {
    InverseSpec s;
    s.order = int_field(j, "order", where);
    check_order(s.order);
    const auto& sp = field(j, "spectra", where);
    if (!sp.is_array())
        throw InputError(where + ".spectra: expected an array of names");
    for (const auto& nm : sp) {
        if (!nm.is_string())
            throw InputError(where + ".spectra: expected strings");
        s.spectra.push_back(nm.get<std::string>());
    }
    const auto& t = field(j, "targets", where);
    if (!t.is_array())
        throw InputError(where + ".targets: expected an array of lists");
    for (std::size_t i = 0; i < t.size(); ++i)
        s.targets.push_back(complex_list(t[i], where + ".targets[" + std::to_string(i) + "]"));
    if (j.contains("modes"))
        s.modes = int_field(j, "modes", where);
    if (j.contains("gauge"))
        s.gauge = j.at("gauge").get<bool>();
    if (j.contains("complex_modes"))
        s.complex_modes = j.at("complex_modes").get<bool>();
    s.validate();
    return s;
}

inline json to_json(const CoefficientErrors& e) {
    json sup = json::object();
    for (std::size_t i = 0; i < e.names.size(); ++i)
        sup[e.names[i]] = e.sup[i];
    json out = {{"sup_norm", sup}, {"max", e.max()}};
    if (!std::isnan(e.q_sup))
        out["q_sup_norm"] = e.q_sup;
    return out;
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const InverseResult& r) {
    json hist = json::array();
    for (const auto& h : r.history)
        hist.push_back({{"iteration", h.iteration}, {"residual", h.residual}, {"relative", h.relative},
                        {"mu", h.mu}, {"accepted", h.accepted}, {"error", number_or_null(h.error)}});
    json eig = json::array();
    for (const auto& list : r.final_eigenvalues) {
        json l = json::array();
        for (const auto& z : list)
            l.push_back(to_json(z));
        eig.push_back(l);
    }
    return {{"recovered", to_json(r.recovered)},
            {"converged", r.converged},
            {"iterations", r.iterations},
            {"residual", r.residual},
            {"relative_residual", r.relative_residual},
            {"rank", r.rank},
            {"parameter_count", r.parameter_count},
            {"rank_deficient", r.rank_deficient},
            {"message", r.message},
            {"final_eigenvalues", eig},
            {"history", hist}};
}

inline std::string history_csv(const InverseResult& r) {
    std::ostringstream out;
    out.precision(17);
    out << "iteration,residual,relative,mu,accepted,error\n";
    for (const auto& h : r.history)
        out << h.iteration << "," << h.residual << "," << h.relative << "," << h.mu << "," << (h.accepted ? 1 : 0)
            << "," << (std::isnan(h.error) ? std::string() : std::to_string(h.error)) << "\n";
    return out.str();
}

inline json to_json(const TwinReport& t) {
    return {{"truth", to_json(t.truth)},
            {"initial", to_json(t.initial)},
            {"perturbation", t.perturbation},
            {"targets", to_json(t.spec)},
            {"result", to_json(t.result)},
            {"errors", to_json(t.errors)},
            {"separation",
             {{"min_distance", number_or_null(t.separation.min_distance)}, {"violation", t.separation.violation}}}};
}

} // namespace io
} // namespace quasispec
