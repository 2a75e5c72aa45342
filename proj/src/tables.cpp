#include "simpson/tables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace simpson {

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b, const char* context) {
    std::uint64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) {
        throw CountOverflow(std::string(context) + ": count sum exceeds 64-bit range");
    }
    return out;
}

void validate_variables(const std::vector<Variable>& variables) {
    if (variables.empty()) {
        throw InvalidInput("a contingency table needs at least one variable");
    }
    std::set<std::string_view> names;
    for (const auto& v : variables) {
        if (v.name.empty()) {
            throw InvalidInput("variable names must be non-empty");
        }
        if (!names.insert(v.name).second) {
            throw InvalidInput("duplicate variable name '" + v.name + "'");
        }
        if (v.states.size() < 2) {
            throw InvalidInput("variable '" + v.name + "' needs at least 2 states");
        }
        std::set<std::string_view> states;
        for (const auto& s : v.states) {
            if (!states.insert(s).second) {
                throw InvalidInput("variable '" + v.name + "' has duplicate state '" + s + "'");
            }
        }
    }
}

} // namespace

double weighted_average(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) {
        throw InvalidInput("weighted_average needs at least one (value, weight) pair");
    }
    double weighted_sum = 0.0;
    double weight_total = 0.0;
    for (const auto& [value, weight] : pairs) {
        if (!(weight >= 0.0)) {
            throw InvalidInput("weighted_average weights must be non-negative");
        }
        weighted_sum += value * weight;
        weight_total += weight;
    }
    if (weight_total <= 0.0) {
        throw InvalidInput("weighted_average total weight must be positive");
    }
    return weighted_sum / weight_total;
}

ContingencyTable::ContingencyTable(std::vector<Variable> variables)
    : variables_(std::move(variables)) {
    validate_variables(variables_);
    strides_.assign(variables_.size(), 1);
    for (std::size_t i = variables_.size(); i-- > 1;) {
        std::uint64_t stride = 0;
        if (__builtin_mul_overflow(strides_[i], static_cast<std::uint64_t>(variables_[i].states.size()),
                                   &stride)) {
            throw InvalidInput("table state space too large to index");
        }
        strides_[i - 1] = stride;
    }
    std::uint64_t capacity = 0;
    if (__builtin_mul_overflow(strides_[0], static_cast<std::uint64_t>(variables_[0].states.size()),
                               &capacity)) {
        throw InvalidInput("table state space too large to index");
    }
}

bool ContingencyTable::has_variable(std::string_view name) const {
    return std::any_of(variables_.begin(), variables_.end(),
                       [&](const Variable& v) { return v.name == name; });
}

std::size_t ContingencyTable::variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i].name == name) return i;
    }
    throw InvalidInput("unknown variable '" + std::string(name) + "'");
}

std::size_t ContingencyTable::state_index(std::size_t var, std::string_view label) const {
    const auto& states = variables_[var].states;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == label) return i;
    }
    throw InvalidInput("unknown state '" + std::string(label) + "' for variable '" +
                       variables_[var].name + "'");
}

std::uint64_t ContingencyTable::flat_index(const std::vector<std::size_t>& indices) const {
    std::uint64_t flat = 0;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        flat += strides_[i] * static_cast<std::uint64_t>(indices[i]);
    }
    return flat;
}

std::vector<std::size_t> ContingencyTable::unflatten(std::uint64_t flat) const {
    std::vector<std::size_t> indices(variables_.size());
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        indices[i] = static_cast<std::size_t>((flat / strides_[i]) % variables_[i].states.size());
    }
    return indices;
}

void ContingencyTable::add(const std::vector<std::string>& key, std::uint64_t count) {
    if (key.size() != variables_.size()) {
        throw InvalidInput("cell key has " + std::to_string(key.size()) + " components, table has " +
                           std::to_string(variables_.size()) + " variables");
    }
    std::vector<std::size_t> indices(key.size());
    for (std::size_t i = 0; i < key.size(); ++i) {
        indices[i] = state_index(i, key[i]);
    }
    add_indices(indices, count);
}

void ContingencyTable::add_indices(const std::vector<std::size_t>& indices, std::uint64_t count) {
    if (indices.size() != variables_.size()) {
        throw InvalidInput("cell key has " + std::to_string(indices.size()) +
                           " components, table has " + std::to_string(variables_.size()) +
                           " variables");
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= variables_[i].states.size()) {
            throw InvalidInput("state index out of range for variable '" + variables_[i].name +
                               "'");
        }
    }
    if (count == 0) return;
    const std::uint64_t flat = flat_index(indices);
    auto [it, inserted] = cells_.try_emplace(flat, 0);
    it->second = checked_add(it->second, count, "cell");
}

std::uint64_t ContingencyTable::at(const std::vector<std::string>& key) const {
    if (key.size() != variables_.size()) {
        throw InvalidInput("cell key has " + std::to_string(key.size()) + " components, table has " +
                           std::to_string(variables_.size()) + " variables");
    }
    std::vector<std::size_t> indices(key.size());
    for (std::size_t i = 0; i < key.size(); ++i) {
        indices[i] = state_index(i, key[i]);
    }
    auto it = cells_.find(flat_index(indices));
    return it == cells_.end() ? 0 : it->second;
}

std::uint64_t ContingencyTable::total() const {
    std::uint64_t sum = 0;
    for (const auto& [flat, count] : cells_) {
        sum = checked_add(sum, count, "total");
    }
    return sum;
}

ContingencyTable ContingencyTable::marginalize(const std::set<std::string>& drop) const {
    for (const auto& name : drop) {
        if (!has_variable(name)) {
            throw InvalidInput("unknown variable '" + name + "' in drop set");
        }
    }
    std::vector<Variable> kept;
    std::vector<std::size_t> kept_positions;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (drop.count(variables_[i].name) == 0) {
            kept.push_back(variables_[i]);
            kept_positions.push_back(i);
        }
    }
    if (kept.empty()) {
        throw InvalidInput("marginalize would drop every variable");
    }
    ContingencyTable result(std::move(kept));
    std::vector<std::size_t> target(kept_positions.size());
    for (const auto& [flat, count] : cells_) {
        const auto indices = unflatten(flat);
        for (std::size_t k = 0; k < kept_positions.size(); ++k) {
            target[k] = indices[kept_positions[k]];
        }
        result.add_indices(target, count);
    }
    return result;
}

void ContingencyTable::for_each_cell(
    const std::function<void(const std::vector<std::size_t>&, std::uint64_t)>& fn) const {
    for (const auto& [flat, count] : cells_) {
        fn(unflatten(flat), count);
    }
}

std::vector<std::string> ContingencyTable::labels_for(const std::vector<std::size_t>& indices) const {
    std::vector<std::string> labels(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        labels[i] = variables_[i].states[indices[i]];
    }
    return labels;
}

bool ContingencyTable::operator==(const ContingencyTable& other) const {
    if (variables_.size() != other.variables_.size()) return false;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i].name != other.variables_[i].name ||
            variables_[i].states != other.variables_[i].states) {
            return false;
        }
    }
    return cells_ == other.cells_;
}

namespace {

AssociationSummary summarize(std::uint64_t treated_recovered, std::uint64_t treated_total,
                             std::uint64_t control_recovered, std::uint64_t control_total) {
    AssociationSummary s;
    s.treated_recovered = treated_recovered;
    s.treated_total = treated_total;
    s.control_recovered = control_recovered;
    s.control_total = control_total;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.treated_rate = treated_total > 0
                         ? static_cast<double>(treated_recovered) / static_cast<double>(treated_total)
                         : nan;
    s.control_rate = control_total > 0
                         ? static_cast<double>(control_recovered) / static_cast<double>(control_total)
                         : nan;
    s.delta = s.treated_rate - s.control_rate;
    return s;
}

struct ArmRoles {
    std::size_t treatment_var = 0;
    std::size_t outcome_var = 0;
    std::size_t treated_state = 0;
    std::size_t control_state = 0;
    std::size_t success_state = 0;
};

ArmRoles resolve_roles(const ContingencyTable& table, const TreatmentSpec& treatment,
                       const OutcomeSpec& outcome) {
    if (treatment.variable == outcome.variable) {
        throw InvalidInput("treatment and outcome must be distinct variables");
    }
    if (treatment.treated_state == treatment.control_state) {
        throw InvalidInput("treated and control states must differ");
    }
    ArmRoles roles;
    roles.treatment_var = table.variable_index(treatment.variable);
    roles.outcome_var = table.variable_index(outcome.variable);
    const auto& tstates = table.variables()[roles.treatment_var].states;
    const auto& ostates = table.variables()[roles.outcome_var].states;
    auto find_state = [](const std::vector<std::string>& states, const std::string& label,
                         const std::string& var) {
        auto it = std::find(states.begin(), states.end(), label);
        if (it == states.end()) {
            throw InvalidInput("unknown state '" + label + "' for variable '" + var + "'");
        }
        return static_cast<std::size_t>(it - states.begin());
    };
    roles.treated_state = find_state(tstates, treatment.treated_state, treatment.variable);
    roles.control_state = find_state(tstates, treatment.control_state, treatment.variable);
    roles.success_state = find_state(ostates, outcome.success_state, outcome.variable);
    return roles;
}

} // namespace

int delta_sign(const AssociationSummary& s) {
    const unsigned __int128 lhs =
        static_cast<unsigned __int128>(s.treated_recovered) * s.control_total;
    const unsigned __int128 rhs =
        static_cast<unsigned __int128>(s.control_recovered) * s.treated_total;
    if (lhs > rhs) return 1;
    if (lhs < rhs) return -1;
    return 0;
}

AssociationSummary association(const ContingencyTable& table, const TreatmentSpec& treatment,
                               const OutcomeSpec& outcome) {
    const ArmRoles roles = resolve_roles(table, treatment, outcome);
    std::uint64_t counts[2][2] = {{0, 0}, {0, 0}}; // [arm][0=total,1=recovered]
    table.for_each_cell([&](const std::vector<std::size_t>& idx, std::uint64_t count) {
        int arm;
        if (idx[roles.treatment_var] == roles.treated_state) {
            arm = 0;
        } else if (idx[roles.treatment_var] == roles.control_state) {
            arm = 1;
        } else {
            return;
        }
        counts[arm][0] = checked_add(counts[arm][0], count, "association");
        if (idx[roles.outcome_var] == roles.success_state) {
            counts[arm][1] = checked_add(counts[arm][1], count, "association");
        }
    });
    if (counts[0][0] == 0) {
        throw UndefinedRate("treated arm has no subjects; rate undefined");
    }
    if (counts[1][0] == 0) {
        throw UndefinedRate("control arm has no subjects; rate undefined");
    }
    return summarize(counts[0][1], counts[0][0], counts[1][1], counts[1][0]);
}

StratifiedAssociation detect_reversal(const ContingencyTable& table,
                                      const TreatmentSpec& treatment, const OutcomeSpec& outcome,
                                      const std::set<std::string>& strata) {
    const ArmRoles roles = resolve_roles(table, treatment, outcome);
    if (strata.count(treatment.variable) > 0 || strata.count(outcome.variable) > 0) {
        throw InvalidInput("strata must not include the treatment or outcome variable");
    }

    // Stratum variables in table order; combos enumerated row-major over
    // their states (first stratum variable slowest).
    std::vector<std::size_t> svars;
    for (std::size_t i = 0; i < table.dimension(); ++i) {
        if (strata.count(table.variables()[i].name) > 0) svars.push_back(i);
    }
    if (svars.size() != strata.size()) {
        for (const auto& name : strata) table.variable_index(name); // throws on the unknown one
    }

    std::size_t combo_count = 1;
    std::vector<std::size_t> combo_strides(svars.size(), 1);
    for (std::size_t k = svars.size(); k-- > 0;) {
        combo_strides[k] = combo_count;
        combo_count *= table.variables()[svars[k]].states.size();
    }

    struct Bucket {
        std::uint64_t treated_recovered = 0, treated_total = 0;
        std::uint64_t control_recovered = 0, control_total = 0;
    };
    std::vector<Bucket> buckets(svars.empty() ? 0 : combo_count);
    Bucket aggregate;

    table.for_each_cell([&](const std::vector<std::size_t>& idx, std::uint64_t count) {
        Bucket* stratum = nullptr;
        if (!svars.empty()) {
            std::size_t combo = 0;
            for (std::size_t k = 0; k < svars.size(); ++k) {
                combo += combo_strides[k] * idx[svars[k]];
            }
            stratum = &buckets[combo];
        }
        const bool success = idx[roles.outcome_var] == roles.success_state;
        auto tally = [&](Bucket& b) {
            if (idx[roles.treatment_var] == roles.treated_state) {
                b.treated_total = checked_add(b.treated_total, count, "stratum");
                if (success) b.treated_recovered = checked_add(b.treated_recovered, count, "stratum");
            } else if (idx[roles.treatment_var] == roles.control_state) {
                b.control_total = checked_add(b.control_total, count, "stratum");
                if (success) b.control_recovered = checked_add(b.control_recovered, count, "stratum");
            }
        };
        tally(aggregate);
        if (stratum != nullptr) tally(*stratum);
    });

    StratifiedAssociation result;
    for (std::size_t k : svars) result.strata_variables.push_back(table.variables()[k].name);
    result.aggregate = summarize(aggregate.treated_recovered, aggregate.treated_total,
                                 aggregate.control_recovered, aggregate.control_total);

    bool all_opposite = true;
    const int aggregate_sign = result.aggregate.defined() ? delta_sign(result.aggregate) : 0;
    for (std::size_t combo = 0; combo < buckets.size(); ++combo) {
        StratumResult sr;
        for (std::size_t k = 0; k < svars.size(); ++k) {
            const auto& var = table.variables()[svars[k]];
            sr.key.push_back(var.states[(combo / combo_strides[k]) % var.states.size()]);
        }
        const Bucket& b = buckets[combo];
        sr.summary =
            summarize(b.treated_recovered, b.treated_total, b.control_recovered, b.control_total);
        if (!sr.summary.defined()) {
            result.undefined_strata.push_back(sr.key);
            all_opposite = false;
        } else if (aggregate_sign == 0 || delta_sign(sr.summary) != -aggregate_sign) {
            all_opposite = false;
        }
        result.strata.push_back(std::move(sr));
    }

    result.full_reversal =
        !svars.empty() && result.aggregate.defined() && aggregate_sign != 0 && all_opposite;
    return result;
}

std::vector<ConfounderHit> scan_confounders(const ContingencyTable& table,
                                            const TreatmentSpec& treatment,
                                            const OutcomeSpec& outcome,
                                            std::size_t max_subset_size) {
    if (max_subset_size < 1) {
        throw InvalidInput("max_subset_size must be at least 1");
    }
    resolve_roles(table, treatment, outcome);

    std::vector<std::string> candidates;
    for (const auto& v : table.variables()) {
        if (v.name != treatment.variable && v.name != outcome.variable) {
            candidates.push_back(v.name);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    const std::size_t bound = std::min(max_subset_size, candidates.size());

    std::vector<ConfounderHit> hits;
    std::vector<std::size_t> pick;
    // Subsets by size, then lexicographically by the sorted candidate names.
    std::function<void(std::size_t, std::size_t)> enumerate = [&](std::size_t start,
                                                                  std::size_t remaining) {
        if (remaining == 0) {
            std::set<std::string> subset;
            for (std::size_t i : pick) subset.insert(candidates[i]);
            auto analysis = detect_reversal(table, treatment, outcome, subset);
            if (analysis.full_reversal) {
                ConfounderHit hit;
                hit.subset.assign(subset.begin(), subset.end());
                hit.analysis = std::move(analysis);
                hits.push_back(std::move(hit));
            }
            return;
        }
        for (std::size_t i = start; i + remaining <= candidates.size(); ++i) {
            pick.push_back(i);
            enumerate(i + 1, remaining - 1);
            pick.pop_back();
        }
    };
    for (std::size_t size = 1; size <= bound; ++size) {
        enumerate(0, size);
    }
    return hits;
}

ContingencyTable from_records(const std::vector<std::vector<std::string>>& rows,
                              const std::vector<Variable>& schema) {
    ContingencyTable table(schema);
    std::vector<std::size_t> indices(schema.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != schema.size()) {
            throw DataError("row " + std::to_string(r) + ": expected " +
                            std::to_string(schema.size()) + " values, got " +
                            std::to_string(row.size()));
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            const auto& states = schema[c].states;
            auto it = std::find(states.begin(), states.end(), row[c]);
            if (it == states.end()) {
                throw DataError("row " + std::to_string(r) + ": unknown state '" + row[c] +
                                "' for variable '" + schema[c].name + "'");
            }
            indices[c] = static_cast<std::size_t>(it - states.begin());
        }
        table.add_indices(indices, 1);
    }
    return table;
}

} // namespace simpson
