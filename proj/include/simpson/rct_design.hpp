#pragma once

#include "simpson/errors.hpp"

#include "json.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace simpson {

// Counts of groups and subjects grow multiplicatively, so they are kept in
// arbitrary precision; nothing here overflows silently.
using BigCount = boost::multiprecision::cpp_int;

struct DesignFactor {
    std::string name;
    std::vector<std::string> states; // size >= 2; defaults to "0".."k-1"

    static DesignFactor with_cardinality(std::string name, std::uint64_t cardinality);
    std::uint64_t cardinality() const { return states.size(); }
};

// A factorial layout: every factor (the treatment variable included) with its
// state count, plus the minimum subjects demanded per control group.
struct DesignSpec {
    std::vector<DesignFactor> factors;
    std::uint64_t min_per_group = 1;

    void validate() const;
    nlohmann::json to_json() const;
    static DesignSpec from_json(const nlohmann::json& doc);
};

// Number of equal-size control groups: the exact product of cardinalities.
BigCount group_count(const DesignSpec& spec);

// group_count * min_per_group, exact.
BigCount subjects_required(const DesignSpec& spec);

struct DesignGroup {
    std::vector<std::string> states; // one per factor
    std::uint64_t size = 0;
};

struct DesignPlan {
    BigCount group_count;
    BigCount subjects_required;
    std::vector<DesignGroup> groups; // empty unless materialized
};

// Materializes one group per state combination (factors enumerated in order,
// first factor slowest), splitting `total` evenly. The total must divide
// exactly; materialization is capped at 1e6 groups, beyond which only the
// arithmetic surfaces above are available.
DesignPlan allocate(const DesignSpec& spec, std::uint64_t total);

// CSV: one column per factor plus a size column.
void write_plan_csv(const DesignSpec& spec, const DesignPlan& plan, std::ostream& os);

} // namespace simpson
