// quasispec: spectra, Weyl matrices, verification, inversion and free-case oracles.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure, 3 verification failure.

#include "quasispec/io.hpp"
#include "quasispec/quasispec.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

using namespace quasispec;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_numerical = 2;
constexpr int exit_verification = 3;

struct Loaded {
    CoefficientSet cs;
    json raw;
};

Loaded load_problem(const std::string& path) {
    auto j = io::read_file(path);
    return {io::coefficients_from(j, path), j};
}

/// "S12" style names, or "Delta42" for the problem whose minor is Delta_{4,2}.
BoundarySpec parse_problem_name(int order, const std::string& name) {
    static const std::regex delta_re("Delta([1-5])([1-5])");
    std::smatch m;
    if (std::regex_match(name, m, delta_re))
        return delta_problem(order, std::stoi(m[1]), std::stoi(m[2]));
    return spectrum_spec(order, name);
}

cplx parse_complex(const std::string& s) {
    const auto comma = s.find(',');
    try {
        if (comma == std::string::npos)
            return {std::stod(s), 0.0};
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw InputError("cannot parse '" + s + "' as re,im");
    }
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral problems for third-, fourth- and fifth-order operators with distribution coefficients"};
    app.require_subcommand(1);

    double tol = 1e-11;
    app.add_option("--tol", tol, "propagation tolerance for polished values")->check(CLI::PositiveNumber);

    auto* spectra = app.add_subcommand("spectra", "eigenvalues of one designated problem");
    std::string problem, spectrum, out, csv;
    int count = 5;
    spectra->add_option("--problem", problem, "coefficient set (JSON)")->required();
    spectra->add_option("--spectrum", spectrum, "S1, S2, S12, S13, S23, S123, S124, S125 or DeltaJK")->required();
    spectra->add_option("--count", count, "number of leading eigenvalues to enclose")->check(CLI::PositiveNumber);
    spectra->add_option("--out", out, "spectrum file (JSON)")->required();
    spectra->add_option("--csv", csv, "optional CSV export");

    auto* weyl = app.add_subcommand("weyl", "Weyl-Yurko matrix at given lambdas");
    std::vector<std::string> lambdas;
    weyl->add_option("--problem", problem, "coefficient set (JSON)")->required();
    weyl->add_option("--lambda", lambdas, "re,im (repeatable)")->required();
    weyl->add_option("--out", out, "output file (JSON)")->required();

    auto* verify = app.add_subcommand("verify", "structural identity checks");
    std::string problem2, checks = "all", report;
    unsigned long long seed = 1;
    verify->add_option("--problem", problem, "coefficient set (JSON)")->required();
    verify->add_option("--problem2", problem2, "second coefficient set for pair checks");
    verify->add_option("--checks", checks, "comma-separated list or 'all'");
    verify->add_option("--seed", seed, "seed for lambda sampling");
    verify->add_option("--report", report, "verification report (JSON)")->required();

    auto* invert = app.add_subcommand("invert", "recover coefficients from target spectra");
    std::string targets, init;
    int max_iter = 40;
    invert->add_option("--targets", targets, "target spectra (JSON)")->required();
    invert->add_option("--init", init, "initial coefficient set (JSON)")->required();
    invert->add_option("--out", out, "inversion result (JSON); history CSV is written next to it")->required();
    invert->add_option("--max-iter", max_iter, "iteration limit")->check(CLI::PositiveNumber);

    auto* twin = app.add_subcommand("twin", "twin experiment from known coefficients");
    std::string truth;
    double perturb = 0.1;
    int modes = 6;
    twin->add_option("--truth", truth, "true coefficient set (JSON)")->required();
    twin->add_option("--perturb", perturb, "uniform perturbation per parameter")->check(CLI::NonNegativeNumber);
    twin->add_option("--count", count, "eigenvalues per spectrum")->check(CLI::PositiveNumber);
    twin->add_option("--modes", modes, "Chebyshev modes per function")->check(CLI::Range(2, 32));
    twin->add_option("--seed", seed, "perturbation seed");
    twin->add_option("--max-iter", max_iter, "iteration limit")->check(CLI::PositiveNumber);
    twin->add_option("--out", out, "twin report (JSON)")->required();

    auto* oracle = app.add_subcommand("oracle", "free-case eigenvalues from closed forms");
    int order = 4;
    oracle->add_option("--order", order, "3, 4 or 5")->required();
    oracle->add_option("--spectrum", spectrum, "designated spectrum name")->required();
    oracle->add_option("--count", count, "number of eigenvalues")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        SpectrumOptions so;
        so.tol = tol;
        if (spectra->parsed()) {
            const auto p = load_problem(problem);
            const auto spec = parse_problem_name(p.cs.order(), spectrum);
            const auto sp = find_spectrum(build_associated_matrix(p.cs), spec, plan_search_box(p.cs.order(), count),
                                          count, so);
            auto j = io::to_json(sp, spectrum);
            j["requested_count"] = count;
            j["input_digest"] = io::digest(p.raw);
            io::write_file(out, j);
            if (!csv.empty())
                io::write_text(csv, io::spectrum_csv(sp));
        } else if (weyl->parsed()) {
            const auto p = load_problem(problem);
            const auto F = build_associated_matrix(p.cs);
            json samples = json::array();
            for (const auto& s : lambdas)
                samples.push_back(io::to_json(weyl_matrix(F, parse_complex(s), {tol})));
            io::write_file(out, {{"order", p.cs.order()}, {"input_digest", io::digest(p.raw)}, {"samples", samples}});
        } else if (verify->parsed()) {
            const auto p = load_problem(problem);
            std::optional<Loaded> q;
            if (!problem2.empty())
                q = load_problem(problem2);
            const auto names = checks == "all" ? check_names() : split(checks);
            VerificationOptions vo;
            vo.seed = seed;
            const auto recs = run_verification(p.cs, q ? &q->cs : nullptr, names, vo);
            json list = json::array();
            bool all = true;
            for (const auto& r : recs) {
                list.push_back({{"name", r.name},
                                {"value", io::number_or_null(r.value)},
                                {"threshold", r.threshold},
                                {"comparison", r.lower_is_better ? "value <= threshold" : "value > threshold"},
                                {"passed", r.passed},
                                {"detail", r.detail}});
                all = all && r.passed;
            }
            std::string dig = io::digest(p.raw);
            if (q)
                dig = io::digest(dig + io::digest(q->raw));
            io::write_file(report, {{"order", p.cs.order()},
                                    {"input_digest", dig},
                                    {"seed", seed},
                                    {"checks", list},
                                    {"passed", all}});
            for (const auto& r : recs)
                std::printf("%-16s %-4s %.3e (threshold %.1e)\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.value,
                            r.threshold);
            if (!all)
                return exit_verification;
        } else if (invert->parsed()) {
            const auto tj = io::read_file(targets);
            const auto spec = io::inverse_spec_from(tj, targets);
            const auto p = load_problem(init);
            InverseOptions opt;
            opt.max_iterations = max_iter;
            opt.forward.spectrum = so;
            const auto res = recover(spec, p.cs, opt);
            auto j = io::to_json(res);
            j["input_digest"] = io::digest(io::digest(tj) + io::digest(p.raw));
            io::write_file(out, j);
            io::write_text(out + ".history.csv", io::history_csv(res));
            std::printf("%s after %d iterations, relative residual %.3e\n", res.message.c_str(), res.iterations,
                        res.relative_residual);
        } else if (twin->parsed()) {
            const auto p = load_problem(truth);
            TwinOptions opt;
            opt.modes = modes;
            opt.seed = seed;
            opt.inverse.max_iterations = max_iter;
            opt.inverse.forward.spectrum = so;
            const auto rep = twin_experiment(p.cs, perturb, count, opt);
            auto j = io::to_json(rep);
            j["input_digest"] = io::digest(p.raw);
            io::write_file(out, j);
            io::write_text(out + ".history.csv", io::history_csv(rep.result));
            std::printf("%s; max sup-norm error %.3e\n", rep.result.message.c_str(), rep.errors.max());
        } else if (oracle->parsed()) {
            check_order(order);
            for (const auto& z : free_eigenvalues(order, spectrum, count)) {
                if (std::abs(z.imag()) <= 1e-9 * std::abs(z))
                    std::printf("%.10g\n", z.real());
                else
                    std::printf("%.10g %.10g\n", z.real(), z.imag());
            }
        }
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return exit_numerical;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: malformed input: %s\n", e.what());
        return exit_usage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return exit_numerical;
    }
    return 0;
}
