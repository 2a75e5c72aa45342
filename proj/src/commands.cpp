#include "simpson/commands.hpp"

#include "simpson/csv.hpp"
#include "simpson/rct_design.hpp"
#include "simpson/trial_sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace simpson {

namespace {

std::string format_number(double value, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), spec, value);
    return buf;
}

std::string percent(double rate) {
    if (std::isnan(rate)) return "undefined";
    return format_number(rate * 100.0, "%.1f") + "%";
}

std::string delta_pp(double delta) {
    if (std::isnan(delta)) return "undefined";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%+.1f pp", delta * 100.0);
    return buf;
}

nlohmann::json rate_or_null(double value) {
    if (std::isnan(value)) return nullptr;
    return value;
}

nlohmann::json summary_to_json(const AssociationSummary& s) {
    return nlohmann::json{{"treated_recovered", s.treated_recovered},
                          {"treated_total", s.treated_total},
                          {"control_recovered", s.control_recovered},
                          {"control_total", s.control_total},
                          {"treated_rate", rate_or_null(s.treated_rate)},
                          {"control_rate", rate_or_null(s.control_rate)},
                          {"delta", rate_or_null(s.delta)}};
}

nlohmann::json stratified_to_json(const StratifiedAssociation& result) {
    nlohmann::json strata = nlohmann::json::array();
    for (const auto& stratum : result.strata) {
        strata.push_back({{"key", stratum.key}, {"summary", summary_to_json(stratum.summary)}});
    }
    return nlohmann::json{{"strata_variables", result.strata_variables},
                          {"aggregate", summary_to_json(result.aggregate)},
                          {"strata", strata},
                          {"undefined_strata", result.undefined_strata},
                          {"full_reversal", result.full_reversal}};
}

std::string summary_line(const AssociationSummary& s) {
    std::ostringstream os;
    os << "treated " << s.treated_recovered << "/" << s.treated_total << " ("
       << percent(s.treated_rate) << ") vs control " << s.control_recovered << "/"
       << s.control_total << " (" << percent(s.control_rate) << ")   delta "
       << delta_pp(s.delta);
    return os.str();
}

std::string key_to_text(const std::vector<std::string>& variables,
                        const std::vector<std::string>& key) {
    std::string out;
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (i > 0) out += ", ";
        out += variables[i] + "=" + key[i];
    }
    return out;
}

std::string stratified_to_text(const StratifiedAssociation& result) {
    std::ostringstream os;
    os << "aggregate: " << summary_line(result.aggregate) << "\n";
    if (!result.strata_variables.empty()) {
        std::string names;
        for (std::size_t i = 0; i < result.strata_variables.size(); ++i) {
            if (i > 0) names += ", ";
            names += result.strata_variables[i];
        }
        os << "strata (" << names << "):\n";
        for (const auto& stratum : result.strata) {
            os << "  " << key_to_text(result.strata_variables, stratum.key) << ": "
               << summary_line(stratum.summary) << "\n";
        }
        if (!result.undefined_strata.empty()) {
            os << "undefined strata (zero denominator):\n";
            for (const auto& key : result.undefined_strata) {
                os << "  " << key_to_text(result.strata_variables, key) << "\n";
            }
        }
        os << "full reversal: " << (result.full_reversal ? "yes" : "no") << "\n";
    }
    return os.str();
}

ContingencyTable ingest(const std::string& path, bool counts_mode) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return table_from_csv(in, counts_mode, path);
}

// A column or state the user named but the file does not carry is a data
// mismatch (exit 2), not a usage error.
void require_roles_in(const ContingencyTable& table, const TreatmentSpec& treatment,
                      const OutcomeSpec& outcome, const std::vector<std::string>& strata,
                      const std::string& path) {
    auto require_column = [&](const std::string& name) {
        if (!table.has_variable(name)) {
            throw DataError("column '" + name + "' not found in " + path);
        }
    };
    auto require_state = [&](const std::string& column, const std::string& state) {
        const auto& states = table.variables()[table.variable_index(column)].states;
        if (std::find(states.begin(), states.end(), state) == states.end()) {
            throw DataError("state '" + state + "' never occurs in column '" + column + "' of " +
                            path);
        }
    };
    require_column(treatment.variable);
    require_column(outcome.variable);
    for (const auto& name : strata) require_column(name);
    require_state(treatment.variable, treatment.treated_state);
    require_state(treatment.variable, treatment.control_state);
    require_state(outcome.variable, outcome.success_state);
}

nlohmann::json treatment_to_json(const TreatmentSpec& t) {
    return {{"variable", t.variable}, {"treated", t.treated_state}, {"control", t.control_state}};
}

nlohmann::json outcome_to_json(const OutcomeSpec& o) {
    return {{"variable", o.variable}, {"success", o.success_state}};
}

std::string spec_to_text(const ParadoxBnSpec& spec) {
    std::ostringstream os;
    os << "n=" << spec.n << " p1=" << format_number(spec.p1) << " p2=" << format_number(spec.p2)
       << " p3=" << format_number(spec.p3) << " p4=" << format_number(spec.p4)
       << " p=" << format_number(spec.p) << " q=" << format_number(spec.q)
       << " prior_xn=" << format_number(spec.prior_xn);
    return os.str();
}

std::string fingerprint_hex(std::uint64_t fp) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fp));
    return buf;
}

DesignFactor parse_factor(const std::string& text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size()) {
        throw InvalidInput("factor '" + text + "' must look like name:cardinality or name:a,b,c");
    }
    DesignFactor factor;
    factor.name = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    const bool numeric = std::all_of(rest.begin(), rest.end(),
                                     [](unsigned char c) { return std::isdigit(c) != 0; });
    if (numeric) {
        const std::uint64_t cardinality = std::stoull(rest);
        if (cardinality < 2) {
            throw InvalidInput("factor '" + factor.name + "' needs cardinality of at least 2");
        }
        return DesignFactor::with_cardinality(factor.name, cardinality);
    }
    std::stringstream ss(rest);
    std::string state;
    while (std::getline(ss, state, ',')) {
        factor.states.push_back(state);
    }
    return factor;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    out << contents;
    if (!out) {
        throw DataError("failed while writing '" + path + "'");
    }
}

} // namespace

ParadoxBnSpec load_spec(const SpecSource& source) {
    if (source.spec_path && source.n) {
        throw InvalidInput("give either a spec file or --n, not both");
    }
    if (source.spec_path) {
        std::ifstream in(*source.spec_path);
        if (!in) {
            throw DataError("cannot open '" + *source.spec_path + "'");
        }
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw InvalidInput("spec file '" + *source.spec_path + "' is not valid JSON: " +
                               e.what());
        }
        return ParadoxBnSpec::from_json(doc);
    }
    if (source.n) {
        return ParadoxBnSpec::defaults(*source.n);
    }
    throw InvalidInput("a spec file or --n is required");
}

Report cmd_analyze(const AnalyzeArgs& args) {
    const ContingencyTable table = ingest(args.csv_path, args.counts_mode);
    require_roles_in(table, args.treatment, args.outcome, args.strata, args.csv_path);
    const std::set<std::string> strata(args.strata.begin(), args.strata.end());
    const StratifiedAssociation result =
        detect_reversal(table, args.treatment, args.outcome, strata);

    Report report;
    report.doc = {{"command", "analyze"},
                  {"inputs",
                   {{"csv", args.csv_path},
                    {"counts_mode", args.counts_mode},
                    {"treatment", treatment_to_json(args.treatment)},
                    {"outcome", outcome_to_json(args.outcome)},
                    {"strata", args.strata}}},
                  {"results", stratified_to_json(result)}};

    std::ostringstream text;
    text << "table: " << args.csv_path << " (" << table.total() << " subjects)\n"
         << "treatment: " << args.treatment.variable << " (treated=" << args.treatment.treated_state
         << ", control=" << args.treatment.control_state << ")   outcome: "
         << args.outcome.variable << " (success=" << args.outcome.success_state << ")\n"
         << stratified_to_text(result);
    report.text = text.str();
    return report;
}

Report cmd_scan(const ScanArgs& args) {
    const ContingencyTable table = ingest(args.csv_path, args.counts_mode);
    require_roles_in(table, args.treatment, args.outcome, {}, args.csv_path);
    const auto hits = scan_confounders(table, args.treatment, args.outcome, args.max_subset_size);

    Report report;
    nlohmann::json hits_doc = nlohmann::json::array();
    for (const auto& hit : hits) {
        hits_doc.push_back({{"subset", hit.subset}, {"analysis", stratified_to_json(hit.analysis)}});
    }
    report.doc = {{"command", "scan"},
                  {"inputs",
                   {{"csv", args.csv_path},
                    {"counts_mode", args.counts_mode},
                    {"treatment", treatment_to_json(args.treatment)},
                    {"outcome", outcome_to_json(args.outcome)},
                    {"max_subset_size", args.max_subset_size}}},
                  {"results", {{"hits", hits_doc}}}};

    std::ostringstream text;
    text << "table: " << args.csv_path << "\n"
         << "reversing stratifications up to size " << args.max_subset_size << ": " << hits.size()
         << "\n";
    for (const auto& hit : hits) {
        std::string names;
        for (std::size_t i = 0; i < hit.subset.size(); ++i) {
            if (i > 0) names += ", ";
            names += hit.subset[i];
        }
        text << "  {" << names << "}: aggregate delta " << delta_pp(hit.analysis.aggregate.delta)
             << ", " << hit.analysis.strata.size() << " strata all opposite\n";
    }
    report.text = text.str();
    return report;
}

Report cmd_generate(const GenerateArgs& args) {
    const ParadoxBnSpec spec = load_spec(args.source);
    const auto warnings = spec.regime_warnings();
    const ReversalCertificate cert = certify_reversal(spec);

    if (args.npt_csv_path) {
        const NptView npt = build_npt(spec);
        std::ostringstream csv;
        write_npt_csv(npt, csv);
        write_file(*args.npt_csv_path, csv.str());
    }

    Report report;
    report.doc = {{"command", "generate"},
                  {"inputs",
                   {{"spec_file", args.source.spec_path ? nlohmann::json(*args.source.spec_path)
                                                        : nlohmann::json(nullptr)},
                    {"n", args.source.n ? nlohmann::json(*args.source.n) : nlohmann::json(nullptr)}}},
                  {"results",
                   {{"spec", spec.to_json()},
                    {"warnings", warnings},
                    {"certificate",
                     {{"stratified_drug_worse", cert.stratified_drug_worse},
                      {"hidden_drug_better", cert.hidden_drug_better},
                      {"case2_drug_rate", cert.case2_drug_rate},
                      {"case2_placebo_rate", cert.case2_placebo_rate},
                      {"paradox", cert.paradox}}},
                    {"npt_csv", args.npt_csv_path ? nlohmann::json(*args.npt_csv_path)
                                                  : nlohmann::json(nullptr)}}}};

    std::ostringstream text;
    text << "spec: " << spec_to_text(spec) << "\n";
    for (const auto& warning : warnings) {
        text << "warning: " << warning << "\n";
    }
    text << "certificate:\n"
         << "  drug worse in every observed stratum: "
         << (cert.stratified_drug_worse ? "yes" : "no") << "\n"
         << "  drug better with Xn hidden: " << (cert.hidden_drug_better ? "yes" : "no") << " ("
         << format_number(cert.case2_drug_rate) << " vs " << format_number(cert.case2_placebo_rate)
         << ")\n"
         << "  paradox: " << (cert.paradox ? "yes" : "no") << "\n";
    if (args.npt_csv_path) {
        text << "npt csv: " << *args.npt_csv_path << "\n";
    }
    report.text = text.str();
    return report;
}

Report cmd_infer(const InferArgs& args) {
    const ParadoxBnSpec spec = load_spec(args.source);
    if (args.case_number != 1 && args.case_number != 2) {
        throw InvalidInput("--case must be 1 (Xn observed) or 2 (Xn hidden)");
    }
    double probability = 0.0;
    if (args.case_number == 1) {
        if (!args.xn) {
            throw InvalidInput("case 1 needs --xn true|false");
        }
        probability = case1_recovery(spec, *args.xn, args.d);
    } else {
        if (args.xn) {
            throw InvalidInput("case 2 leaves Xn unobserved; drop --xn");
        }
        probability = case2_recovery(spec, args.d);
    }

    Report report;
    report.doc = {{"command", "infer"},
                  {"inputs",
                   {{"spec_file", args.source.spec_path ? nlohmann::json(*args.source.spec_path)
                                                        : nlohmann::json(nullptr)},
                    {"n", args.source.n ? nlohmann::json(*args.source.n) : nlohmann::json(nullptr)},
                    {"case", args.case_number},
                    {"xn", args.xn ? nlohmann::json(*args.xn) : nlohmann::json(nullptr)},
                    {"d", args.d}}},
                  {"results", {{"probability", probability}}}};

    std::ostringstream text;
    if (args.case_number == 1) {
        text << "P(Recovered=true | Xn=" << (*args.xn ? "true" : "false")
             << ", D=" << (args.d ? "true" : "false") << ") = " << format_number(probability)
             << "\n";
    } else {
        text << "P(Recovered=true | D=" << (args.d ? "true" : "false")
             << ") = " << format_number(probability) << "   (Xn unobserved)\n";
    }
    report.text = text.str();
    return report;
}

Report cmd_simulate(const SimulateArgs& args) {
    const ParadoxBnSpec spec = load_spec(args.source);
    const TrialDataset dataset = sample(spec, args.size, args.seed);
    std::ostringstream csv;
    write_dataset_csv(dataset, csv);
    write_file(args.out_path, csv.str());

    Report report;
    report.doc = {{"command", "simulate"},
                  {"inputs",
                   {{"spec_file", args.source.spec_path ? nlohmann::json(*args.source.spec_path)
                                                        : nlohmann::json(nullptr)},
                    {"n", args.source.n ? nlohmann::json(*args.source.n) : nlohmann::json(nullptr)},
                    {"size", args.size},
                    {"seed", args.seed}}},
                  {"results",
                   {{"rows", dataset.records.size()},
                    {"n", dataset.n},
                    {"spec_fingerprint", fingerprint_hex(dataset.spec_fingerprint)},
                    {"csv", args.out_path}}}};

    std::ostringstream text;
    text << "wrote " << dataset.records.size() << " records to " << args.out_path
         << " (n=" << dataset.n << ", seed=" << args.seed << ", spec "
         << fingerprint_hex(dataset.spec_fingerprint) << ")\n";
    report.text = text.str();
    return report;
}

Report cmd_design(const DesignArgs& args) {
    if (args.factors.empty()) {
        throw InvalidInput("at least one factor is required");
    }
    DesignSpec spec;
    for (const auto& text : args.factors) {
        spec.factors.push_back(parse_factor(text));
    }
    spec.min_per_group = args.min_per_group;
    spec.validate();

    const BigCount groups = group_count(spec);
    const BigCount subjects = subjects_required(spec);

    std::optional<DesignPlan> plan;
    if (args.total) {
        plan = allocate(spec, *args.total);
        if (args.plan_csv_path) {
            std::ostringstream csv;
            write_plan_csv(spec, *plan, csv);
            write_file(*args.plan_csv_path, csv.str());
        }
    } else if (args.plan_csv_path) {
        throw InvalidInput("--plan-csv needs --total to materialize groups");
    }

    Report report;
    nlohmann::json results = {{"group_count", groups.str()},
                              {"subjects_required", subjects.str()},
                              {"min_per_group", spec.min_per_group}};
    if (plan) {
        nlohmann::json groups_doc = nlohmann::json::array();
        for (const auto& group : plan->groups) {
            groups_doc.push_back({{"states", group.states}, {"size", group.size}});
        }
        results["plan"] = {{"total", *args.total}, {"groups", groups_doc}};
        results["plan_csv"] = args.plan_csv_path ? nlohmann::json(*args.plan_csv_path)
                                                 : nlohmann::json(nullptr);
    }
    report.doc = {{"command", "design"},
                  {"inputs",
                   {{"factors", args.factors},
                    {"min_per_group", args.min_per_group},
                    {"total", args.total ? nlohmann::json(*args.total) : nlohmann::json(nullptr)}}},
                  {"results", results}};

    std::ostringstream text;
    text << "factors:";
    for (const auto& factor : spec.factors) {
        text << " " << factor.name << "(" << factor.cardinality() << ")";
    }
    text << "\ncontrol groups: " << groups.str() << "\n"
         << "subjects required (min " << spec.min_per_group << " per group): " << subjects.str()
         << "\n";
    if (plan) {
        text << "allocation of " << *args.total << " subjects (" << plan->groups.size()
             << " groups of " << (plan->groups.empty() ? 0 : plan->groups.front().size) << "):\n";
        for (const auto& group : plan->groups) {
            text << "  (";
            for (std::size_t i = 0; i < group.states.size(); ++i) {
                if (i > 0) text << ", ";
                text << group.states[i];
            }
            text << "): " << group.size << "\n";
        }
        if (args.plan_csv_path) {
            text << "plan csv: " << *args.plan_csv_path << "\n";
        }
    }
    report.text = text.str();
    return report;
}

} // namespace simpson
