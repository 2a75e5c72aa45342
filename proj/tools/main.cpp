#include "simpson/commands.hpp"
#include "simpson/errors.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>

namespace {

// Exit codes: 0 success, 1 usage/validation error, 2 data error.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void emit(const simpson::Report& report, const std::string& format) {
    if (format == "json") {
        std::cout << report.doc.dump(2) << "\n";
    } else {
        std::cout << report.text;
    }
}

bool parse_bool_flag(const std::string& value, const std::string& flag) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw simpson::InvalidInput(flag + " must be 'true' or 'false'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Construct, detect, and quantify Simpson's-paradox reversals in trial data"};
    app.require_subcommand(1);

    std::string format = "text";
    app.add_option("--format", format, "Report format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();

    // analyze ---------------------------------------------------------------
    simpson::AnalyzeArgs analyze;
    std::string analyze_strata;
    auto* analyze_cmd = app.add_subcommand("analyze", "Stratified association and reversal verdict");
    analyze_cmd->add_option("csv", analyze.csv_path, "Input CSV")->required();
    analyze_cmd->add_flag("--counts", analyze.counts_mode,
                          "Input is pre-aggregated with a 'count' column");
    analyze_cmd->add_option("--treatment", analyze.treatment.variable, "Treatment variable")
        ->required();
    analyze_cmd->add_option("--treated", analyze.treatment.treated_state, "Treated-arm state")
        ->required();
    analyze_cmd->add_option("--control", analyze.treatment.control_state, "Control-arm state")
        ->required();
    analyze_cmd->add_option("--outcome", analyze.outcome.variable, "Outcome variable")->required();
    analyze_cmd->add_option("--success", analyze.outcome.success_state, "Success state")
        ->required();
    analyze_cmd->add_option("--strata", analyze_strata, "Comma-separated stratum variables");

    // scan ------------------------------------------------------------------
    simpson::ScanArgs scan;
    auto* scan_cmd = app.add_subcommand("scan", "Find variable subsets that reverse the aggregate");
    scan_cmd->add_option("csv", scan.csv_path, "Input CSV")->required();
    scan_cmd->add_flag("--counts", scan.counts_mode,
                       "Input is pre-aggregated with a 'count' column");
    scan_cmd->add_option("--treatment", scan.treatment.variable, "Treatment variable")->required();
    scan_cmd->add_option("--treated", scan.treatment.treated_state, "Treated-arm state")
        ->required();
    scan_cmd->add_option("--control", scan.treatment.control_state, "Control-arm state")
        ->required();
    scan_cmd->add_option("--outcome", scan.outcome.variable, "Outcome variable")->required();
    scan_cmd->add_option("--success", scan.outcome.success_state, "Success state")->required();
    scan_cmd->add_option("--max-subset-size", scan.max_subset_size, "Largest subset to try")
        ->required();

    // generate --------------------------------------------------------------
    simpson::GenerateArgs generate;
    std::string generate_spec;
    int generate_n = 0;
    std::string generate_npt;
    auto* generate_cmd =
        app.add_subcommand("generate", "Build a reversing network spec and certify it");
    generate_cmd->add_option("--spec", generate_spec, "Spec JSON file");
    generate_cmd->add_option("--n", generate_n, "Number of X variables (canonical defaults)");
    generate_cmd->add_option("--npt-csv", generate_npt, "Write the materialized NPT here");

    // infer -----------------------------------------------------------------
    simpson::InferArgs infer;
    std::string infer_spec;
    int infer_n = 0;
    std::string infer_xn;
    std::string infer_d;
    auto* infer_cmd = app.add_subcommand("infer", "Recovery probability with Xn observed or hidden");
    infer_cmd->add_option("--spec", infer_spec, "Spec JSON file");
    infer_cmd->add_option("--n", infer_n, "Number of X variables (canonical defaults)");
    infer_cmd->add_option("--case", infer.case_number, "1 = Xn observed, 2 = Xn hidden")
        ->required();
    infer_cmd->add_option("--xn", infer_xn, "Xn state (case 1 only)");
    infer_cmd->add_option("--d", infer_d, "Drug-taken state")->required();

    // simulate --------------------------------------------------------------
    simpson::SimulateArgs simulate;
    std::string simulate_spec;
    int simulate_n = 0;
    auto* simulate_cmd = app.add_subcommand("simulate", "Forward-sample a synthetic trial dataset");
    simulate_cmd->add_option("--spec", simulate_spec, "Spec JSON file");
    simulate_cmd->add_option("--n", simulate_n, "Number of X variables (canonical defaults)");
    simulate_cmd->add_option("--size", simulate.size, "Number of records")->required();
    simulate_cmd->add_option("--seed", simulate.seed, "RNG seed")->required();
    simulate_cmd->add_option("--out", simulate.out_path, "Output CSV path")->required();

    // design ----------------------------------------------------------------
    simpson::DesignArgs design;
    std::string design_plan_csv;
    std::uint64_t design_total = 0;
    auto* design_cmd =
        app.add_subcommand("design", "Factorial control-group counts and balanced allocation");
    design_cmd->add_option("factors", design.factors, "Factors as name:cardinality or name:a,b,c")
        ->required();
    design_cmd->add_option("--min-per-group", design.min_per_group, "Minimum subjects per group")
        ->required();
    auto* total_opt = design_cmd->add_option("--total", design_total, "Subjects to allocate");
    design_cmd->add_option("--plan-csv", design_plan_csv, "Write the materialized plan here");

    // Let `--format` appear after the subcommand name too.
    for (auto* sub : {analyze_cmd, scan_cmd, generate_cmd, infer_cmd, simulate_cmd, design_cmd}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (analyze_cmd->parsed()) {
            if (!analyze_strata.empty()) {
                std::stringstream ss(analyze_strata);
                std::string name;
                while (std::getline(ss, name, ',')) analyze.strata.push_back(name);
            }
            emit(simpson::cmd_analyze(analyze), format);
        } else if (scan_cmd->parsed()) {
            emit(simpson::cmd_scan(scan), format);
        } else if (generate_cmd->parsed()) {
            if (!generate_spec.empty()) generate.source.spec_path = generate_spec;
            if (generate_cmd->count("--n") > 0) generate.source.n = generate_n;
            if (!generate_npt.empty()) generate.npt_csv_path = generate_npt;
            emit(simpson::cmd_generate(generate), format);
        } else if (infer_cmd->parsed()) {
            if (!infer_spec.empty()) infer.source.spec_path = infer_spec;
            if (infer_cmd->count("--n") > 0) infer.source.n = infer_n;
            if (!infer_xn.empty()) infer.xn = parse_bool_flag(infer_xn, "--xn");
            infer.d = parse_bool_flag(infer_d, "--d");
            emit(simpson::cmd_infer(infer), format);
        } else if (simulate_cmd->parsed()) {
            if (!simulate_spec.empty()) simulate.source.spec_path = simulate_spec;
            if (simulate_cmd->count("--n") > 0) simulate.source.n = simulate_n;
            emit(simpson::cmd_simulate(simulate), format);
        } else if (design_cmd->parsed()) {
            if (total_opt->count() > 0) design.total = design_total;
            if (!design_plan_csv.empty()) design.plan_csv_path = design_plan_csv;
            emit(simpson::cmd_design(design), format);
        }
    } catch (const simpson::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const simpson::UndefinedRate& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const simpson::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const simpson::CountOverflow& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
