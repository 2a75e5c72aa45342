// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion, including the measured runtime against the
// stated budget. Exits nonzero if any criterion fails.

#include "frozen_seeds.hpp"
#include "golden_tables.hpp"

#include "simpson/paradox_bn.hpp"
#include "simpson/rct_design.hpp"
#include "simpson/tables.hpp"
#include "simpson/trial_sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace simpson;

namespace {

int failures = 0;
std::vector<std::string> current_errors;

void expect(bool condition, const std::string& message) {
    if (!condition) current_errors.push_back(message);
}

void expect_near(double actual, double wanted, double tolerance, const std::string& label) {
    if (!(std::abs(actual - wanted) <= tolerance)) {
        std::ostringstream os;
        os << label << ": got " << actual << ", wanted " << wanted << " +/- " << tolerance;
        current_errors.push_back(os.str());
    }
}

void criterion(int number, const std::string& title, double budget_seconds,
               const std::function<void()>& body) {
    current_errors.clear();
    const auto start = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        current_errors.push_back(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > budget_seconds) {
        std::ostringstream os;
        os << "runtime " << elapsed << "s exceeds budget " << budget_seconds << "s";
        current_errors.push_back(os.str());
    }
    if (current_errors.empty()) {
        std::printf("PASS  criterion %d: %s  (%.3fs)\n", number, title.c_str(), elapsed);
    } else {
        ++failures;
        std::printf("FAIL  criterion %d: %s  (%.3fs)\n", number, title.c_str(), elapsed);
        for (const auto& error : current_errors) {
            std::printf("      - %s\n", error.c_str());
        }
    }
}

double joint_recovery(const JointDistribution& joint, std::uint64_t mask, std::uint64_t value) {
    const double denominator = joint.mass(mask, value);
    if (denominator <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return joint.mass(mask | joint.r_bit(), value | joint.r_bit()) / denominator;
}

ParadoxBnSpec random_spec(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    ParadoxBnSpec spec;
    spec.n = n;
    spec.p1 = prob(rng);
    spec.p2 = prob(rng);
    spec.p3 = prob(rng);
    spec.p4 = prob(rng);
    spec.p = prob(rng);
    spec.q = prob(rng);
    spec.prior_xn = prob(rng);
    spec.priors_x.clear();
    for (int i = 0; i + 1 < n; ++i) spec.priors_x.push_back(prob(rng));
    return spec;
}

void check_stratum(const StratifiedAssociation& result, std::size_t index, double treated,
                   double control, const std::string& label) {
    if (index >= result.strata.size()) {
        current_errors.push_back(label + ": stratum missing");
        return;
    }
    const auto& s = result.strata[index].summary;
    expect(s.treated_rate == treated, label + ": treated rate mismatch");
    expect(s.control_rate == control, label + ": control rate mismatch");
}

} // namespace

int main() {
    const auto treatment = golden::drug_treatment();
    const auto outcome = golden::recovered_outcome();

    criterion(1, "paper-table reproduction", 1.0, [&] {
        const auto table3 = golden::load(golden::kTable3Csv);
        const auto agg3 = association(table3, treatment, outcome);
        expect(agg3.control_rate == 0.40 && agg3.treated_rate == 0.50,
               "table 3 rates must be 40%/50%");

        const auto table4 = golden::load(golden::kTable4Csv);
        const auto by_sex = detect_reversal(table4, treatment, outcome, {"Sex"});
        check_stratum(by_sex, 0, 0.20, 0.30, "table 4 female");
        check_stratum(by_sex, 1, 0.60, 0.70, "table 4 male");
        expect(by_sex.full_reversal, "table 4 must fully reverse under {Sex}");

        const auto table5 = golden::load(golden::kTable5Csv);
        const auto agg5 = association(table5, treatment, outcome);
        expect(agg5.control_rate == 0.52 && agg5.treated_rate == 0.63,
               "table 5 rates must be 52%/63%");
        const auto t5_by_sex = detect_reversal(table5, treatment, outcome, {"Sex"});
        check_stratum(t5_by_sex, 0, 0.54, 0.46, "table 5 female");
        check_stratum(t5_by_sex, 1, 0.72, 0.58, "table 5 male");

        const auto table6 = golden::load(golden::kTable6Csv);
        const auto deep = detect_reversal(table6, treatment, outcome, {"Sex", "Age"});
        check_stratum(deep, 0, 0.30, 0.40, "table 6 old female");
        check_stratum(deep, 1, 0.40, 0.50, "table 6 old male");
        check_stratum(deep, 2, 0.60, 0.70, "table 6 young female");
        check_stratum(deep, 3, 0.80, 0.90, "table 6 young male");
        expect(deep.full_reversal, "table 6 must fully reverse under {Sex, Age}");

        const auto shallow = detect_reversal(table6, treatment, outcome, {"Sex"});
        expect(!shallow.full_reversal, "table 6 must not reverse under {Sex} alone");
    });

    criterion(2, "marginalization consistency", 1.0, [&] {
        const auto table4 = golden::load(golden::kTable4Csv);
        const auto table3 = golden::load(golden::kTable3Csv);
        expect(table4.marginalize({"Sex"}) == table3,
               "marginalize(table 4, {Sex}) must equal table 3 cell-exact");

        const auto table6 = golden::load(golden::kTable6Csv);
        const auto table5 = golden::load(golden::kTable5Csv);
        expect(table6.marginalize({"Age"}) == table5,
               "marginalize(table 6, {Age}) must equal table 5 cell-exact");
    });

    criterion(3, "generalized construction, n=3", 1.0, [&] {
        const ParadoxBnSpec spec = ParadoxBnSpec::defaults(3);
        const NptView npt = build_npt(spec);
        expect(npt.column_count() == 16, "n=3 NPT must have 16 columns");
        for (std::uint64_t c = 0; c < npt.column_count(); ++c) {
            const auto col = npt.column(c);
            const bool xn = col.x[2];
            const double wanted = xn ? (col.d ? 0.8 : 0.9) : (col.d ? 0.48 : 0.52);
            expect(col.p_true == wanted, "NPT true-row entry mismatch");
            expect_near(1.0 - col.p_true, 1.0 - wanted, 1e-15, "NPT false-row entry");
        }
        expect(case1_recovery(spec, true, true) == 0.8, "case 1 (T,T) must be 0.8");
        expect(case1_recovery(spec, true, false) == 0.9, "case 1 (T,F) must be 0.9");
        expect(case1_recovery(spec, false, true) == 0.48, "case 1 (F,T) must be 0.48");
        expect(case1_recovery(spec, false, false) == 0.52, "case 1 (F,F) must be 0.52");
        expect_near(case2_recovery(spec, true), 0.79968, 1e-12, "case 2 drug arm");
        expect_near(case2_recovery(spec, false), 0.52038, 1e-12, "case 2 placebo arm");
        expect(case2_recovery(spec, true) < 0.8, "case 2 drug arm must sit just below 0.8");
        expect(case2_recovery(spec, false) > 0.52, "case 2 placebo arm must sit just above 0.52");
    });

    criterion(4, "oracle equivalence over 200 randomized specs", 30.0, [&] {
        std::mt19937_64 rng(0x5ca1ab1e);
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 1 + static_cast<int>(rng() % 8);
            const ParadoxBnSpec spec = random_spec(rng, n);
            const auto joint = exact_joint(spec);
            const std::uint64_t xn = joint.x_bit(n);
            const std::uint64_t d = joint.d_bit();

            for (bool xn_value : {false, true}) {
                for (bool d_value : {false, true}) {
                    const std::uint64_t value = (xn_value ? xn : 0) | (d_value ? d : 0);
                    expect_near(case1_recovery(spec, xn_value, d_value),
                                joint_recovery(joint, xn | d, value), 1e-12,
                                "case 1 vs joint oracle");
                }
            }
            for (bool d_value : {false, true}) {
                expect_near(case2_recovery(spec, d_value),
                            joint_recovery(joint, d, d_value ? d : 0), 1e-12,
                            "case 2 vs joint oracle");
            }

            // Conditioning on any assignment of X1..X(n-1) must not move
            // P(R | Xn, D).
            std::uint64_t others = 0;
            for (int i = 1; i < n; ++i) others |= joint.x_bit(i);
            for (std::uint64_t assignment = 0; assignment < (std::uint64_t{1} << (n - 1));
                 ++assignment) {
                for (bool xn_value : {false, true}) {
                    for (bool d_value : {false, true}) {
                        const std::uint64_t value =
                            assignment | (xn_value ? xn : 0) | (d_value ? d : 0);
                        expect_near(joint_recovery(joint, others | xn | d, value),
                                    case1_recovery(spec, xn_value, d_value), 1e-12,
                                    "P(R|Xn,D) must ignore the other covariates");
                    }
                }
            }
            if (!current_errors.empty()) break; // one bad spec is enough to report
        }
    });

    criterion(5, "universal reversal for n = 1..8", 1.0, [&] {
        for (int n = 1; n <= 8; ++n) {
            const auto cert = certify_reversal(ParadoxBnSpec::defaults(n));
            expect(cert.paradox, "defaults must certify the paradox at n=" + std::to_string(n));
        }
    });

    criterion(6, "simulation convergence and end-to-end reversal", 10.0, [&] {
        const ParadoxBnSpec spec = ParadoxBnSpec::defaults(2);
        const TrialDataset dataset = sample(spec, 200000, frozen::kSeedCells);

        std::uint64_t recovered[2][2] = {{0, 0}, {0, 0}};
        std::uint64_t totals[2][2] = {{0, 0}, {0, 0}};
        for (const auto& record : dataset.records) {
            const bool xn = record.x[1];
            ++totals[xn][record.d];
            if (record.r) ++recovered[xn][record.d];
        }
        for (bool xn : {false, true}) {
            for (bool d : {false, true}) {
                expect(totals[xn][d] > 0, "every (Xn, D) cell must be populated");
                const double rate = static_cast<double>(recovered[xn][d]) /
                                    static_cast<double>(totals[xn][d]);
                expect_near(rate, case1_recovery(spec, xn, d), 0.02,
                            "empirical P(R|Xn,D) within 0.02");
            }
        }

        const auto result = detect_reversal(to_table(dataset), {"Drug", "true", "false"},
                                            {"Recovered", "true"}, {"X2"});
        expect(result.aggregate.defined() && delta_sign(result.aggregate) > 0,
               "aggregate must favour the drug");
        for (const auto& stratum : result.strata) {
            expect(stratum.summary.defined() && delta_sign(stratum.summary) < 0,
                   "every Xn stratum must favour the placebo");
        }
        expect(result.full_reversal, "full reversal must hold end to end");
    });

    criterion(7, "design arithmetic", 1.0, [&] {
        DesignSpec twenty;
        for (int i = 0; i < 20; ++i) {
            twenty.factors.push_back(DesignFactor::with_cardinality("b" + std::to_string(i), 2));
        }
        twenty.min_per_group = 50;
        expect(group_count(twenty) == 1048576, "2^20 groups");

        DesignSpec fine;
        for (int i = 0; i < 19; ++i) {
            fine.factors.push_back(DesignFactor::with_cardinality("b" + std::to_string(i), 2));
        }
        fine.factors.push_back(DesignFactor::with_cardinality("age", 10));
        fine.min_per_group = 50;
        expect(subjects_required(fine) == 262144000, "2^19 * 10 * 50 subjects");
    });

    if (failures == 0) {
        std::printf("all %d criteria passed\n", 7);
        return 0;
    }
    std::printf("%d criteria failed\n", failures);
    return 1;
}
