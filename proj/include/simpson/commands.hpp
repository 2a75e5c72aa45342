#pragma once

#include "simpson/paradox_bn.hpp"
#include "simpson/tables.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace simpson {

// Every command yields the same report twice: a schema-stable JSON document
// ({command, inputs, results}) and a human-readable text rendering. The
// caller picks one. Errors surface as exceptions; the CLI maps them to exit
// codes (1 usage/validation, 2 data).
struct Report {
    nlohmann::json doc;
    std::string text;
};

struct AnalyzeArgs {
    std::string csv_path;
    bool counts_mode = false;
    TreatmentSpec treatment;
    OutcomeSpec outcome;
    std::vector<std::string> strata;
};

struct ScanArgs {
    std::string csv_path;
    bool counts_mode = false;
    TreatmentSpec treatment;
    OutcomeSpec outcome;
    std::size_t max_subset_size = 1;
};

// A network spec comes from a JSON file or as canonical defaults for a
// given n; exactly one of the two must be set.
struct SpecSource {
    std::optional<std::string> spec_path;
    std::optional<int> n;
};

ParadoxBnSpec load_spec(const SpecSource& source);

struct GenerateArgs {
    SpecSource source;
    std::optional<std::string> npt_csv_path;
};

struct InferArgs {
    SpecSource source;
    int case_number = 2; // 1 = Xn observed, 2 = Xn hidden
    std::optional<bool> xn;
    bool d = true;
};

struct SimulateArgs {
    SpecSource source;
    std::uint64_t size = 0;
    std::uint64_t seed = 0;
    std::string out_path;
};

struct DesignArgs {
    std::vector<std::string> factors; // "name:cardinality" or "name:a,b,c"
    std::uint64_t min_per_group = 1;
    std::optional<std::uint64_t> total;
    std::optional<std::string> plan_csv_path;
};

Report cmd_analyze(const AnalyzeArgs& args);
Report cmd_scan(const ScanArgs& args);
Report cmd_generate(const GenerateArgs& args);
Report cmd_infer(const InferArgs& args);
Report cmd_simulate(const SimulateArgs& args);
Report cmd_design(const DesignArgs& args);

} // namespace simpson
