// Command-line experiment runner over the JSON file formats.
//
// Exit codes: 0 success, 1 IO/parse failure, 2 mathematical precondition
// or negative verdict, 3 shift-domination failure. Reports go to stdout as
// JSON; diagnostics go to stderr.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rok/rok.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitMath = 2;
constexpr int kExitDomination = 3;

struct Options {
    std::string input;
    std::string out;
    std::string csv;
    std::string coeffs;
    std::string coeffs_file;
    std::string trunc;
    double tol = 1e-10;
    double rank_tol = 1e-10;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    std::size_t max_power = 4;
    std::size_t grid_size = 4096;
};

std::vector<std::size_t> parse_index_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoul(item));
        } catch (const std::exception&) {
            throw rok::ParseError("cannot parse index '" + item + "'");
        }
    }
    if (out.empty()) throw rok::ParseError("empty index list");
    return out;
}

std::vector<rok::Complex> parse_coefficients(const Options& opt) {
    std::vector<rok::Complex> coeffs;
    if (!opt.coeffs_file.empty()) {
        rok::json j = rok::load_json_file(opt.coeffs_file);
        if (!j.is_array()) throw rok::ParseError("coefficient file must hold an array");
        for (const auto& entry : j) coeffs.push_back(rok::complex_from_json(entry));
        return coeffs;
    }
    std::stringstream ss(opt.coeffs);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            coeffs.emplace_back(std::stod(item), 0.0);
        } catch (const std::exception&) {
            throw rok::ParseError("cannot parse coefficient '" + item + "'");
        }
    }
    return coeffs;
}

void emit(const rok::json& report) { std::cout << report.dump(2) << "\n"; }

rok::json pd_report_json(const rok::PdReport& r) {
    return rok::json{{"is_pd", r.is_pd}, {"min_eigenvalue", r.min_eigenvalue}, {"tol", r.tol}};
}

int run_check_pd(const Options& opt) {
    rok::OperatorKernel kernel = rok::kernel_from_json(rok::load_json_file(opt.input));
    rok::PdReport r = rok::check_pd(kernel, opt.tol);
    rok::json report = pd_report_json(r);
    emit(report);
    if (!opt.out.empty()) rok::save_json(opt.out, report);
    return r.is_pd ? kExitOk : kExitMath;
}

int run_check_rpd(const Options& opt) {
    rok::RandomKernel rk = rok::random_kernel_from_json(rok::load_json_file(opt.input));
    rok::OperatorKernel mean = rok::mean_kernel(rk);
    rok::PdReport r = rok::check_pd(mean, opt.tol);
    rok::PathwiseReport pw = rok::is_pathwise_pd(rk, opt.tol);
    rok::json atoms = rok::json::array();
    for (std::size_t i = 0; i < pw.per_atom.size(); ++i)
        atoms.push_back({{"atom", i},
                         {"is_pd", pw.per_atom[i].is_pd},
                         {"min_eigenvalue", pw.per_atom[i].min_eigenvalue}});
    rok::json report{{"is_rpd", r.is_pd},
                     {"min_eigenvalue", r.min_eigenvalue},
                     {"tol", r.tol},
                     {"all_pathwise_pd", pw.all_pathwise_pd},
                     {"pathwise", std::move(atoms)}};
    emit(report);
    if (!opt.out.empty())
        rok::save_json(opt.out,
                       rok::json{{"report", report}, {"mean_kernel", kernel_to_json(mean)}});
    return r.is_pd ? kExitOk : kExitMath;
}

int run_factorize(const Options& opt) {
    rok::OperatorKernel kernel = rok::kernel_from_json(rok::load_json_file(opt.input));
    rok::KolmogorovFactor factor = rok::factorize(kernel, opt.rank_tol);
    std::vector<double> traces = rok::trace_diagonal(kernel);
    rok::json trace_map = rok::json::object();
    for (std::size_t i = 0; i < traces.size(); ++i) trace_map[factor.points[i]] = traces[i];
    rok::json report{{"rank", factor.rank},
                     {"dim", factor.dim},
                     {"rank_tol", factor.rank_tol},
                     {"reconstruction_error", rok::reconstruction_error(factor, kernel)},
                     {"trace_diagonal", std::move(trace_map)}};
    emit(report);
    if (!opt.out.empty()) rok::save_json(opt.out, rok::factor_to_json(factor));
    return kExitOk;
}

int run_gauss(const Options& opt) {
    rok::OperatorKernel kernel = rok::kernel_from_json(rok::load_json_file(opt.input));
    rok::KolmogorovFactor factor = rok::factorize(kernel, opt.rank_tol);
    rok::SeededRng rng(opt.seed);

    std::optional<std::vector<std::size_t>> coords;
    if (!opt.trunc.empty()) coords = parse_index_list(opt.trunc);

    rok::GaussianRealization realization =
        coords ? rok::truncated_realization(factor, *coords, opt.samples, rng)
               : rok::sample_paths(factor, opt.samples, rng);

    std::vector<std::size_t> full(factor.rank);
    for (std::size_t i = 0; i < factor.rank; ++i) full[i] = i;
    rok::OperatorKernel reference =
        rok::expected_truncated_kernel(factor, coords ? *coords : full);
    std::vector<rok::ConvergencePoint> record =
        rok::realization_convergence(realization, reference);

    rok::json energy = rok::json::object();
    for (std::size_t p = 0; p < factor.points.size(); ++p)
        energy[factor.points[p]] = rok::truncation_energy(factor, p, coords ? *coords : full);

    rok::json report{{"rank", factor.rank},
                     {"samples", opt.samples},
                     {"seed", opt.seed},
                     {"truncated", coords.has_value()},
                     {"truncation_energy", std::move(energy)},
                     {"final_max_abs_error", record.empty() ? 0.0 : record.back().max_abs_error}};
    emit(report);
    if (!opt.out.empty()) rok::save_json(opt.out, rok::realization_to_json(realization));
    if (!opt.csv.empty()) rok::write_text_atomic(opt.csv, rok::convergence_to_csv(record));
    return kExitOk;
}

int run_empirical(const Options& opt) {
    rok::RandomKernel rk = rok::random_kernel_from_json(rok::load_json_file(opt.input));
    rok::EmpiricalResult result =
        rok::empirical_kernel(rk, opt.samples, rok::SeededRng(opt.seed));
    rok::PdReport pd = rok::check_rpd(result.as_random_kernel(), opt.tol);
    rok::json report{{"samples", result.sample_count},
                     {"seed", opt.seed},
                     {"final_max_abs_error",
                      result.record.empty() ? 0.0 : result.record.back().max_abs_error},
                     {"average_check_pd", pd_report_json(pd)}};
    emit(report);
    if (!opt.out.empty()) rok::save_json(opt.out, rok::kernel_to_json(result.average));
    if (!opt.csv.empty()) rok::write_text_atomic(opt.csv, rok::convergence_to_csv(result.record));
    return kExitOk;
}

int run_moments(const Options& opt) {
    rok::RandomOperator op = rok::operator_from_json(rok::load_json_file(opt.input));
    rok::MomentKernel k = rok::moment_kernel(op, opt.max_power);
    rok::PdReport pd = rok::check_pd(k.as_kernel(), opt.tol);
    rok::json report{{"max_power", k.max_power()},
                     {"dim", k.dim()},
                     {"check_pd", pd_report_json(pd)}};
    emit(report);
    if (!opt.out.empty()) rok::save_json(opt.out, rok::kernel_to_json(k.as_kernel()));
    return kExitOk;
}

int run_dilate(const Options& opt) {
    namespace fs = std::filesystem;
    rok::RandomOperator op = rok::operator_from_json(rok::load_json_file(opt.input));
    rok::MomentKernel k = rok::moment_kernel(op, opt.max_power);

    const fs::path dir = opt.out.empty() ? fs::path(".") : fs::path(opt.out);
    if (!fs::exists(dir)) fs::create_directories(dir);
    rok::save_json(dir / "moment_kernel.json", rok::kernel_to_json(k.as_kernel()));

    rok::DominationReport domination = rok::shift_domination(k, opt.tol);
    rok::json domination_json{{"holds", domination.holds},
                              {"min_eigenvalue", domination.min_eigenvalue},
                              {"tol", domination.tol}};
    rok::save_json(dir / "domination.json", domination_json);
    if (!domination.holds) {
        emit(rok::json{{"domination", domination_json}});
        std::cerr << "shift domination fails; no moment dilation exists\n";
        return kExitDomination;
    }

    rok::DilationTriple triple = rok::build_dilation(k, opt.rank_tol);
    rok::save_json(dir / "dilation.json", rok::dilation_to_json(triple));

    rok::VerificationReport v = rok::verify_dilation(k, triple);
    rok::json verification{{"max_residual", v.max_residual},
                           {"unitarity", v.unitarity},
                           {"projection", v.projection},
                           {"isometry", v.isometry},
                           {"compression", v.compression},
                           {"c3_holds", v.c3_holds},
                           {"c3_min_eigenvalue", v.c3_min_eigenvalue}};
    rok::save_json(dir / "verification.json", verification);

    rok::json report{{"domination", domination_json},
                     {"verification", verification},
                     {"rank", triple.rank},
                     {"space_dim", triple.space_dim},
                     {"trunc_depth", triple.trunc_depth}};
    emit(report);

    const bool pass = v.max_residual <= 1e-8 && v.unitarity <= 1e-10 && v.projection <= 1e-10 &&
                      v.isometry <= 1e-10 && v.c3_holds;
    if (!pass) std::cerr << "dilation verification exceeded tolerances\n";
    return pass ? kExitOk : kExitMath;
}

int run_vn(const Options& opt) {
    rok::RandomOperator op = rok::operator_from_json(rok::load_json_file(opt.input));
    std::vector<rok::Complex> coeffs = parse_coefficients(opt);
    rok::VnReport r = rok::von_neumann_check(op, coeffs, opt.grid_size);
    rok::json report{{"holds", r.holds},
                     {"sup_f", r.sup_f},
                     {"sup_f_margin", r.sup_f_margin},
                     {"lhs_max_eigenvalue", r.lhs_max_eigenvalue},
                     {"slack", r.slack},
                     {"grid_size", opt.grid_size}};
    emit(report);
    if (!opt.out.empty())
        rok::save_json(opt.out,
                       rok::json{{"report", report}, {"lhs", rok::matrix_to_json(r.lhs)}});
    return r.holds ? kExitOk : kExitMath;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random operator-valued kernels and moment dilations"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("input", opt.input, "input JSON file")->required();
        cmd->add_option("--tol", opt.tol, "positivity tolerance (relative)")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--rank-tol", opt.rank_tol, "factorization rank tolerance")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--out", opt.out, "output path");
        return cmd;
    };

    CLI::App* check_pd = add_common(app.add_subcommand("check-pd", "positivity of a kernel file"));
    CLI::App* check_rpd = add_common(
        app.add_subcommand("check-rpd", "mean and pathwise positivity of a random kernel"));
    CLI::App* factorize =
        add_common(app.add_subcommand("factorize", "Kolmogorov factorization of a kernel"));
    CLI::App* gauss =
        add_common(app.add_subcommand("gauss", "sample the Gaussian process realizing a kernel"));
    gauss->add_option("--samples", opt.samples, "number of draws")->check(CLI::PositiveNumber);
    gauss->add_option("--seed", opt.seed, "rng seed");
    gauss->add_option("--trunc", opt.trunc, "comma-separated coordinate subset (0-based)");
    gauss->add_option("--csv", opt.csv, "convergence CSV path");
    CLI::App* empirical =
        add_common(app.add_subcommand("empirical", "empirical average of a random kernel"));
    empirical->add_option("--samples", opt.samples, "number of draws")
        ->check(CLI::PositiveNumber);
    empirical->add_option("--seed", opt.seed, "rng seed");
    empirical->add_option("--csv", opt.csv, "convergence CSV path");
    CLI::App* moments =
        add_common(app.add_subcommand("moments", "moment kernel of a random operator"));
    moments->add_option("--max-power", opt.max_power, "largest power M");
    CLI::App* dilate = add_common(
        app.add_subcommand("dilate", "moment kernel, shift domination, dilation, verification"));
    dilate->add_option("--max-power", opt.max_power, "largest power M");
    CLI::App* vn = add_common(app.add_subcommand("vn", "mean-square von Neumann inequality check"));
    vn->add_option("--coeffs", opt.coeffs, "comma-separated real coefficients c0,c1,...");
    vn->add_option("--coeffs-file", opt.coeffs_file, "JSON file with [re,im] coefficient pairs");
    vn->add_option("--grid-size", opt.grid_size, "circle grid size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitIo;
    }

    try {
        if (app.got_subcommand(check_pd)) return run_check_pd(opt);
        if (app.got_subcommand(check_rpd)) return run_check_rpd(opt);
        if (app.got_subcommand(factorize)) return run_factorize(opt);
        if (app.got_subcommand(gauss)) return run_gauss(opt);
        if (app.got_subcommand(empirical)) return run_empirical(opt);
        if (app.got_subcommand(moments)) return run_moments(opt);
        if (app.got_subcommand(dilate)) return run_dilate(opt);
        if (app.got_subcommand(vn)) return run_vn(opt);
    } catch (const rok::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const rok::ShiftDominationViolated& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomination;
    } catch (const rok::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMath;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitIo;
}
