#include "simpson/rct_design.hpp"

#include <ostream>
#include <set>

namespace simpson {

namespace {

constexpr std::uint64_t kMaterializationCap = 1000000;

} // namespace

DesignFactor DesignFactor::with_cardinality(std::string name, std::uint64_t cardinality) {
    DesignFactor factor;
    factor.name = std::move(name);
    factor.states.reserve(cardinality);
    for (std::uint64_t i = 0; i < cardinality; ++i) {
        factor.states.push_back(std::to_string(i));
    }
    return factor;
}

void DesignSpec::validate() const {
    if (factors.empty()) {
        throw InvalidInput("a design needs at least one factor");
    }
    if (min_per_group < 1) {
        throw InvalidInput("min_per_group must be a positive integer");
    }
    std::set<std::string> names;
    for (const auto& factor : factors) {
        if (factor.name.empty()) {
            throw InvalidInput("factor names must be non-empty");
        }
        if (!names.insert(factor.name).second) {
            throw InvalidInput("duplicate factor name '" + factor.name + "'");
        }
        if (factor.states.size() < 2) {
            throw InvalidInput("factor '" + factor.name + "' needs cardinality of at least 2");
        }
        std::set<std::string> states(factor.states.begin(), factor.states.end());
        if (states.size() != factor.states.size()) {
            throw InvalidInput("factor '" + factor.name + "' has duplicate states");
        }
    }
}

nlohmann::json DesignSpec::to_json() const {
    nlohmann::json factors_doc = nlohmann::json::array();
    for (const auto& factor : factors) {
        factors_doc.push_back({{"name", factor.name},
                               {"cardinality", factor.cardinality()},
                               {"states", factor.states}});
    }
    return nlohmann::json{{"factors", factors_doc}, {"min_per_group", min_per_group}};
}

DesignSpec DesignSpec::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("factors") || !doc.at("factors").is_array()) {
        throw InvalidInput("design document must be an object with a 'factors' array");
    }
    DesignSpec spec;
    for (const auto& entry : doc.at("factors")) {
        if (!entry.is_object() || !entry.contains("name")) {
            throw InvalidInput("every factor needs a 'name'");
        }
        DesignFactor factor;
        factor.name = entry.at("name").get<std::string>();
        if (entry.contains("states")) {
            for (const auto& s : entry.at("states")) {
                factor.states.push_back(s.get<std::string>());
            }
        } else if (entry.contains("cardinality")) {
            if (!entry.at("cardinality").is_number_unsigned() &&
                !entry.at("cardinality").is_number_integer()) {
                throw InvalidInput("factor '" + factor.name + "': cardinality must be an integer");
            }
            const auto k = entry.at("cardinality").get<std::int64_t>();
            if (k < 2) {
                throw InvalidInput("factor '" + factor.name +
                                   "' needs cardinality of at least 2");
            }
            factor = DesignFactor::with_cardinality(factor.name,
                                                    static_cast<std::uint64_t>(k));
        } else {
            throw InvalidInput("factor '" + factor.name +
                               "' needs either 'cardinality' or 'states'");
        }
        spec.factors.push_back(std::move(factor));
    }
    if (doc.contains("min_per_group")) {
        spec.min_per_group = doc.at("min_per_group").get<std::uint64_t>();
    }
    spec.validate();
    return spec;
}

BigCount group_count(const DesignSpec& spec) {
    spec.validate();
    BigCount product = 1;
    for (const auto& factor : spec.factors) {
        product *= factor.cardinality();
    }
    return product;
}

BigCount subjects_required(const DesignSpec& spec) {
    return group_count(spec) * spec.min_per_group;
}

DesignPlan allocate(const DesignSpec& spec, std::uint64_t total) {
    DesignPlan plan;
    plan.group_count = group_count(spec);
    plan.subjects_required = plan.group_count * spec.min_per_group;
    if (total == 0) {
        throw InvalidInput("total must be a positive integer");
    }
    if (plan.group_count > kMaterializationCap) {
        throw InvalidInput("cannot materialize " + plan.group_count.str() +
                           " groups (cap " + std::to_string(kMaterializationCap) + ")");
    }
    const std::uint64_t groups = plan.group_count.convert_to<std::uint64_t>();
    if (total % groups != 0) {
        throw InvalidInput("total " + std::to_string(total) + " does not divide into " +
                           std::to_string(groups) + " equal groups (remainder " +
                           std::to_string(total % groups) + ")");
    }
    const std::uint64_t per_group = total / groups;

    std::vector<std::size_t> indices(spec.factors.size(), 0);
    plan.groups.reserve(groups);
    for (std::uint64_t g = 0; g < groups; ++g) {
        DesignGroup group;
        group.size = per_group;
        group.states.reserve(spec.factors.size());
        for (std::size_t f = 0; f < spec.factors.size(); ++f) {
            group.states.push_back(spec.factors[f].states[indices[f]]);
        }
        plan.groups.push_back(std::move(group));
        // odometer increment, last factor fastest
        for (std::size_t f = spec.factors.size(); f-- > 0;) {
            if (++indices[f] < spec.factors[f].states.size()) break;
            indices[f] = 0;
        }
    }
    return plan;
}

void write_plan_csv(const DesignSpec& spec, const DesignPlan& plan, std::ostream& os) {
    for (const auto& factor : spec.factors) {
        os << factor.name << ',';
    }
    os << "size\n";
    for (const auto& group : plan.groups) {
        for (const auto& state : group.states) {
            os << state << ',';
        }
        os << group.size << '\n';
    }
}

} // namespace simpson
