#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gvar/design.hpp"
#include "gvar/estimate.hpp"
#include "gvar/io.hpp"
#include "gvar/json_io.hpp"
#include "gvar/maxdiv.hpp"
#include "gvar/measure.hpp"
#include "gvar/simulate.hpp"
#include "gvar/symfun.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitNoConvergence = 2;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw gvar::IoError("cannot open '" + out_path + "' for writing");
    out << text << '\n';
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(sep, start);
        if (end == std::string::npos) end = text.size();
        parts.push_back(text.substr(start, end - start));
        if (end == text.size()) break;
        start = end + 1;
    }
    return parts;
}

gvar::GeneratorSpec parse_generator(const std::string& text, std::uint64_t seed) {
    const auto parts = split(text, ':');
    const std::string& kind = parts.front();
    if (kind == "uniformCube" && parts.size() == 2)
        return gvar::GeneratorSpec::uniform_cube(std::stoi(parts[1]), seed);
    if (kind == "uniformSphere" && parts.size() == 3)
        return gvar::GeneratorSpec::uniform_sphere(std::stoi(parts[1]), std::stod(parts[2]), seed);
    if (kind == "normal" && (parts.size() == 2 || parts.size() == 3)) {
        gvar::CovMatrix cov(gvar::read_csv_matrix(parts[1]));
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(cov.dim());
        if (parts.size() == 3) mean = gvar::read_csv_vector(parts[2]);
        return gvar::GeneratorSpec::normal(std::move(mean), std::move(cov), seed);
    }
    if (kind == "discrete" && parts.size() == 3) {
        gvar::DiscreteMeasure mu(gvar::read_csv_matrix(parts[1]), gvar::read_csv_vector(parts[2]));
        return gvar::GeneratorSpec::discrete(std::move(mu), seed);
    }
    throw gvar::DomainError(
        "cannot parse generator '" + text +
        "'; expected uniformCube:D, normal:COV[:MEAN], uniformSphere:D:RHO or "
        "discrete:SUPPORT:WEIGHTS");
}

std::string dump(const nlohmann::json& j) { return j.dump(2); }

struct DesignModel {
    std::shared_ptr<const gvar::DesignSpace> space;
    int dim;
};

DesignModel build_design_space(const std::string& model, const std::string& space_file,
                               double lo, double hi, double grid_step) {
    if (!model.empty() && !space_file.empty())
        throw gvar::DomainError("give either --model or --space, not both");
    if (!model.empty()) {
        const auto parts = split(model, ':');
        if (parts.size() != 2 || parts[0] != "poly")
            throw gvar::DomainError("cannot parse model '" + model + "'; expected poly:DEGREE");
        const int degree = std::stoi(parts[1]);
        auto space = std::make_shared<const gvar::DesignSpace>(
            gvar::polynomial_design_space(degree, lo, hi, grid_step));
        return {std::move(space), degree + 1};
    }
    if (space_file.empty()) throw gvar::DomainError("one of --model or --space is required");
    auto space = std::make_shared<const gvar::DesignSpace>(
        gvar::regressor_design_space(gvar::read_csv_matrix(space_file)));
    const int d = space->dim();
    return {std::move(space), d};
}

nlohmann::json design_result_json(const gvar::DesignResult& result) {
    nlohmann::json j = gvar::to_json(result.report, result.measure);
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    return j;
}

int run(int argc, char** argv) {
    CLI::App app{"extended generalised variances: computation, estimation, "
                 "maximum-diversity measures and optimal design"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    if (const char* env = std::getenv("GVAR_SEED")) seed = std::strtoull(env, nullptr, 10);
    app.add_option("--seed", seed, "RNG seed (fallback: env GVAR_SEED, default 0)")
        ->capture_default_str();
    std::string out_path;
    app.add_option("--out", out_path, "write output to this path instead of stdout");

    // --- psi ---
    auto* psi_cmd = app.add_subcommand("psi", "Psi_k of a covariance matrix read from CSV");
    std::string psi_cov;
    int psi_k = 1;
    psi_cmd->add_option("--cov", psi_cov, "covariance CSV (square, symmetric)")->required();
    psi_cmd->add_option("--k", psi_k, "simplex dimension k")->required()->check(CLI::PositiveNumber);

    // --- estimate ---
    auto* est_cmd = app.add_subcommand("estimate", "unbiased estimate of psi_k from a sample CSV");
    std::string est_sample;
    int est_k = 1;
    bool est_oracle = false;
    est_cmd->add_option("--sample", est_sample, "sample CSV, one observation per row")->required();
    est_cmd->add_option("--k", est_k, "simplex dimension k")->required()->check(CLI::PositiveNumber);
    est_cmd->add_flag("--oracle", est_oracle,
                      "also evaluate the brute-force U-statistic and report the difference");

    // --- maxdiv ---
    auto* max_cmd = app.add_subcommand("maxdiv", "maximum-diversity measure over a candidate set");
    std::string max_candidates;
    int max_k = 1;
    double max_tol = 1e-7;
    long max_iter = 100000;
    max_cmd->add_option("--candidates", max_candidates, "candidate points CSV, one per row")
        ->required();
    max_cmd->add_option("--k", max_k, "simplex dimension k")->required()->check(CLI::PositiveNumber);
    max_cmd->add_option("--tol", max_tol, "certificate gap tolerance")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    max_cmd->add_option("--max-iter", max_iter, "iteration cap")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    // --- design ---
    auto* des_cmd = app.add_subcommand("design", "psi~_k-optimal design");
    std::string des_model, des_space, des_interval = "-1,1";
    int des_k = 0;
    bool des_all_k = false, des_no_polish = false;
    double des_step = 2e-3, des_tol = 1e-9;
    long des_iter = 1000000;
    des_cmd->add_option("--model", des_model, "built-in model, e.g. poly:2");
    des_cmd->add_option("--space", des_space, "regressor rows CSV (disables polishing)");
    des_cmd->add_option("--k", des_k, "criterion order k")->check(CLI::PositiveNumber);
    des_cmd->add_flag("--all-k", des_all_k, "solve for every k = 1..d");
    des_cmd->add_option("--interval", des_interval, "design interval LO,HI")
        ->capture_default_str();
    des_cmd->add_option("--grid-step", des_step, "grid step")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    des_cmd->add_option("--tol", des_tol, "equivalence gap tolerance")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    des_cmd->add_option("--max-iter", des_iter, "iteration cap")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    des_cmd->add_flag("--no-polish", des_no_polish, "skip continuous support refinement");

    // --- simulate ---
    auto* sim_cmd = app.add_subcommand("simulate", "seeded Monte-Carlo study of the estimator");
    std::string sim_gen, sim_csv;
    long sim_n = 0, sim_reps = 0;
    std::vector<int> sim_k;
    sim_cmd
        ->add_option("--gen", sim_gen,
                     "generator: uniformCube:D | normal:COV[:MEAN] | uniformSphere:D:RHO | "
                     "discrete:SUPPORT:WEIGHTS")
        ->required();
    sim_cmd->add_option("--n", sim_n, "sample size per replicate")
        ->required()
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--k", sim_k, "k values (comma separated)")->required()->delimiter(',');
    sim_cmd->add_option("--reps", sim_reps, "number of replicates")
        ->required()
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--csv", sim_csv, "also write tidy ratios CSV (k,replicate,ratio)");

    // --- tables ---
    auto* tab_cmd = app.add_subcommand(
        "tables", "efficiency matrix of the polynomial-model optima (quadratic or cubic)");
    int tab_example = 5;
    tab_cmd->add_option("--example", tab_example, "5 = quadratic model, 6 = cubic model")
        ->required()
        ->check(CLI::IsMember({5, 6}));

    CLI11_PARSE(app, argc, argv);
    int exit_code = 0;

    if (app.got_subcommand(psi_cmd)) {
        const gvar::CovMatrix cov(gvar::read_csv_matrix(psi_cov));
        emit(gvar::format_double(gvar::psi(cov, psi_k).value), out_path);
    } else if (app.got_subcommand(est_cmd)) {
        const gvar::Sample sample(gvar::read_csv_matrix(est_sample));
        const gvar::EstimateReport report = gvar::estimate_psi(sample, est_k);
        nlohmann::json j = gvar::to_json(report);
        if (est_oracle) {
            const double oracle = gvar::u_stat_oracle(sample, est_k);
            j["oracle"] = oracle;
            j["oracleRelError"] =
                std::abs(oracle - report.psi_hat) / std::max(std::abs(oracle), 1e-300);
        }
        emit(dump(j), out_path);
    } else if (app.got_subcommand(max_cmd)) {
        const Eigen::MatrixXd candidates = gvar::read_csv_matrix(max_candidates);
        gvar::MaxDivOptions opts;
        opts.tol = max_tol;
        opts.max_iter = max_iter;
        const gvar::MaxDivResult result = gvar::solve_max_div(candidates, max_k, opts);
        const auto [mean, cov] = gvar::measure_moments(result.measure);
        nlohmann::json j = gvar::to_json(result.measure, max_k, gvar::psi(cov, max_k).value,
                                         result.certificate);
        j["converged"] = result.converged;
        j["iterations"] = result.iterations;
        emit(dump(j), out_path);
        if (!result.converged) exit_code = kExitNoConvergence;
    } else if (app.got_subcommand(des_cmd)) {
        const auto interval = split(des_interval, ',');
        if (interval.size() != 2) throw gvar::DomainError("--interval expects LO,HI");
        const auto model = build_design_space(des_model, des_space, std::stod(interval[0]),
                                              std::stod(interval[1]), des_step);
        gvar::DesignOptions opts;
        opts.tol = des_tol;
        opts.max_iter = des_iter;
        opts.polish = !des_no_polish;
        if (!des_all_k && des_k == 0)
            throw gvar::DomainError("give --k or --all-k");
        nlohmann::json out;
        bool converged = true;
        if (des_all_k) {
            out = nlohmann::json::array();
            for (int k = 1; k <= model.dim; ++k) {
                const gvar::DesignResult result = gvar::solve_design(model.space, k, opts);
                converged = converged && result.converged;
                out.push_back(design_result_json(result));
            }
        } else {
            const gvar::DesignResult result = gvar::solve_design(model.space, des_k, opts);
            converged = result.converged;
            out = design_result_json(result);
        }
        emit(dump(out), out_path);
        if (!converged) exit_code = kExitNoConvergence;
    } else if (app.got_subcommand(sim_cmd)) {
        const gvar::GeneratorSpec spec = parse_generator(sim_gen, seed);
        const auto reports = gvar::run_monte_carlo(spec, sim_n, sim_k, sim_reps);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& report : reports) out.push_back(gvar::to_json(report));
        if (!sim_csv.empty()) {
            std::ofstream csv(sim_csv);
            if (!csv) throw gvar::IoError("cannot open '" + sim_csv + "' for writing");
            csv << "k,replicate,ratio\n";
            for (const auto& report : reports)
                for (std::size_t r = 0; r < report.ratios.size(); ++r)
                    csv << report.k << ',' << r << ',' << gvar::format_double(report.ratios[r])
                        << '\n';
        }
        emit(dump(out), out_path);
    } else if (app.got_subcommand(tab_cmd)) {
        const int degree = tab_example == 5 ? 2 : 3;
        const int d = degree + 1;
        auto space = std::make_shared<const gvar::DesignSpace>(
            gvar::polynomial_design_space(degree, -1.0, 1.0, 2e-3));
        gvar::DesignOptions opts;
        std::vector<gvar::DesignResult> results;
        bool converged = true;
        for (int k = 1; k <= d; ++k) {
            results.push_back(gvar::solve_design(space, k, opts));
            converged = converged && results.back().converged;
        }
        nlohmann::json designs = nlohmann::json::array();
        for (const auto& result : results) designs.push_back(design_result_json(result));
        nlohmann::json eff = nlohmann::json::array();
        for (int j = 0; j < d; ++j) {
            nlohmann::json row = nlohmann::json::array();
            for (int k = 1; k <= d; ++k)
                row.push_back(gvar::efficiency(results[static_cast<std::size_t>(j)].measure,
                                               results[static_cast<std::size_t>(k - 1)].measure,
                                               k));
            eff.push_back(std::move(row));
        }
        emit(dump(nlohmann::json{{"example", tab_example},
                                 {"designs", std::move(designs)},
                                 {"efficiencies", std::move(eff)}}),
             out_path);
        if (!converged) exit_code = kExitNoConvergence;
    }
    return exit_code;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const gvar::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return kExitError;
    }
}
