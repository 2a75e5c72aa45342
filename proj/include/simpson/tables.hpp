#pragma once

#include "simpson/errors.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace simpson {

// One categorical variable: a name plus its ordered state vocabulary.
// A variable needs at least two states; state labels are unique.
struct Variable {
    std::string name;
    std::vector<std::string> states;
};

// Weighted mean of (value, weight) pairs. Weights are non-negative and must
// not all be zero.
double weighted_average(const std::vector<std::pair<double, double>>& pairs);

// An n-way count table over named categorical variables. Cells are addressed
// by one state label per variable, in variable order. Storage is sparse and
// ordered, so iteration is deterministic (lexicographic by state indices,
// last variable fastest). Missing cells count as zero. All count arithmetic
// is overflow-checked 64-bit.
class ContingencyTable {
  public:
    explicit ContingencyTable(std::vector<Variable> variables);

    const std::vector<Variable>& variables() const { return variables_; }
    std::size_t dimension() const { return variables_.size(); }
    bool has_variable(std::string_view name) const;
    std::size_t variable_index(std::string_view name) const;

    void add(const std::vector<std::string>& key, std::uint64_t count);
    void add_indices(const std::vector<std::size_t>& indices, std::uint64_t count);
    std::uint64_t at(const std::vector<std::string>& key) const;
    std::uint64_t total() const;

    // Sums cells over the dropped variables. The drop set may be empty; it
    // may not contain unknown names or cover every variable.
    ContingencyTable marginalize(const std::set<std::string>& drop) const;

    // Visits every nonzero cell as (state indices, count).
    void for_each_cell(
        const std::function<void(const std::vector<std::size_t>&, std::uint64_t)>& fn) const;

    std::vector<std::string> labels_for(const std::vector<std::size_t>& indices) const;

    bool operator==(const ContingencyTable& other) const;

  private:
    std::uint64_t flat_index(const std::vector<std::size_t>& indices) const;
    std::vector<std::size_t> unflatten(std::uint64_t flat) const;
    std::size_t state_index(std::size_t var, std::string_view label) const;

    std::vector<Variable> variables_;
    std::vector<std::uint64_t> strides_;
    std::map<std::uint64_t, std::uint64_t> cells_;
};

// Names the treated/control arms inside a treatment variable. States other
// than the two named ones are ignored by association analyses.
struct TreatmentSpec {
    std::string variable;
    std::string treated_state;
    std::string control_state;
};

struct OutcomeSpec {
    std::string variable;
    std::string success_state;
};

// Pooled two-arm counts and rates. Rates are NaN when the matching
// denominator is zero; delta is treated_rate - control_rate.
struct AssociationSummary {
    std::uint64_t treated_recovered = 0;
    std::uint64_t treated_total = 0;
    std::uint64_t control_recovered = 0;
    std::uint64_t control_total = 0;
    double treated_rate = 0.0;
    double control_rate = 0.0;
    double delta = 0.0;

    bool defined() const { return treated_total > 0 && control_total > 0; }
};

// Sign of delta decided by exact integer cross-multiplication
// (treated_recovered * control_total vs control_recovered * treated_total),
// so verdicts never depend on floating-point rounding. Requires defined().
int delta_sign(const AssociationSummary& s);

// Pools the table over everything except the treatment and outcome variables
// and summarizes the two arms. Throws UndefinedRate if either arm is empty.
AssociationSummary association(const ContingencyTable& table, const TreatmentSpec& treatment,
                               const OutcomeSpec& outcome);

struct StratumResult {
    std::vector<std::string> key; // one state per stratum variable
    AssociationSummary summary;
};

// Aggregate association plus one association per stratum (full cross-product
// of the stratum variables' states, enumerated in table order).
//
// full_reversal holds iff the aggregate delta is nonzero, every stratum has
// both denominators positive, and every stratum delta has strictly the
// opposite sign of the aggregate. Strata with a zero denominator are listed
// in undefined_strata and force full_reversal to false.
struct StratifiedAssociation {
    std::vector<std::string> strata_variables; // in table order
    AssociationSummary aggregate;
    std::vector<StratumResult> strata;
    std::vector<std::vector<std::string>> undefined_strata;
    bool full_reversal = false;
};

StratifiedAssociation detect_reversal(const ContingencyTable& table,
                                      const TreatmentSpec& treatment, const OutcomeSpec& outcome,
                                      const std::set<std::string>& strata);

struct ConfounderHit {
    std::vector<std::string> subset; // sorted by name
    StratifiedAssociation analysis;
};

// Enumerates all non-empty subsets of the non-treatment, non-outcome
// variables up to max_subset_size (ordered by size, then lexicographically
// by name) and returns those whose stratification fully reverses the
// aggregate association. A bound larger than the candidate count is clamped.
std::vector<ConfounderHit> scan_confounders(const ContingencyTable& table,
                                            const TreatmentSpec& treatment,
                                            const OutcomeSpec& outcome,
                                            std::size_t max_subset_size);

// Builds a table from raw rows (one subject per row, one column per schema
// variable). Reports the offending row index on bad input.
ContingencyTable from_records(const std::vector<std::vector<std::string>>& rows,
                              const std::vector<Variable>& schema);

} // namespace simpson
