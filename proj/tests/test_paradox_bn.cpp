#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "simpson/paradox_bn.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace simpson;

namespace {

// P(R=true | constraint) read off the enumerated joint; the independent
// check for the closed-form inference paths.
double joint_recovery(const JointDistribution& joint, std::uint64_t mask, std::uint64_t value) {
    const double denominator = joint.mass(mask, value);
    REQUIRE(denominator > 0.0);
    const double numerator = joint.mass(mask | joint.r_bit(), value | joint.r_bit());
    return numerator / denominator;
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
    spec.validate();
    return spec;
}

} // namespace

TEST_CASE("spec validation names the offending field") {
    ParadoxBnSpec spec = ParadoxBnSpec::defaults(2);
    spec.p2 = 1.2;
    try {
        spec.validate();
        FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("p2") != std::string::npos);
    }
    spec = ParadoxBnSpec::defaults(2);
    spec.priors_x.push_back(0.5);
    CHECK_THROWS_AS(spec.validate(), InvalidInput);
    spec = ParadoxBnSpec::defaults(2);
    spec.n = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidInput);
}

TEST_CASE("defaults sit inside the canonical regime, departures warn") {
    CHECK(ParadoxBnSpec::defaults(3).regime_warnings().empty());
    ParadoxBnSpec spec = ParadoxBnSpec::defaults(3);
    spec.q = 0.5;
    const auto warnings = spec.regime_warnings();
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("q") != std::string::npos);
    CHECK_NOTHROW(spec.validate()); // warned, not rejected
}

TEST_CASE("spec json round-trips with exact field names") {
    const ParadoxBnSpec spec = ParadoxBnSpec::defaults(3);
    const auto doc = spec.to_json();
    for (const char* field : {"n", "p1", "p2", "p3", "p4", "p", "q", "prior_xn", "priors_x"}) {
        CHECK(doc.contains(field));
    }
    const ParadoxBnSpec back = ParadoxBnSpec::from_json(doc);
    CHECK(back.to_json() == doc);
    CHECK(back.fingerprint() == spec.fingerprint());

    CHECK_THROWS_AS(ParadoxBnSpec::from_json(nlohmann::json::object()), InvalidInput);
    nlohmann::json bad = doc;
    bad["p1"] = 1.2;
    CHECK_THROWS_AS(ParadoxBnSpec::from_json(bad), InvalidInput);
}

TEST_CASE("n=3 NPT matches the 16-column layout") {
    const NptView npt = build_npt(ParadoxBnSpec::defaults(3));
    REQUIRE(npt.column_count() == 16);
    // Column blocks of four: (D=F,X3=F) -> p1, (D=F,X3=T) -> p2,
    // (D=T,X3=F) -> p3, (D=T,X3=T) -> p4.
    const double expected[16] = {0.52, 0.52, 0.52, 0.52, 0.9, 0.9, 0.9, 0.9,
                                 0.48, 0.48, 0.48, 0.48, 0.8, 0.8, 0.8, 0.8};
    for (std::uint64_t c = 0; c < 16; ++c) {
        const auto col = npt.column(c);
        CHECK(col.d == (c >= 8));
        CHECK(col.x[2] == (((c >> 2) & 1) != 0));
        CHECK(col.x[1] == (((c >> 1) & 1) != 0));
        CHECK(col.x[0] == ((c & 1) != 0));
        CHECK(col.p_true == expected[c]);
        CHECK(1.0 - col.p_true == doctest::Approx(1.0 - expected[c]).epsilon(1e-15));
    }
}

TEST_CASE("NPT csv export matches the display layout") {
    std::ostringstream os;
    write_npt_csv(build_npt(ParadoxBnSpec::defaults(3)), os);
    const std::string expected =
        "Drug taken,False,False,False,False,False,False,False,False,"
        "True,True,True,True,True,True,True,True\n"
        "X3,False,False,False,False,True,True,True,True,"
        "False,False,False,False,True,True,True,True\n"
        "X2,False,False,True,True,False,False,True,True,"
        "False,False,True,True,False,False,True,True\n"
        "X1,False,True,False,True,False,True,False,True,"
        "False,True,False,True,False,True,False,True\n"
        "False,0.48,0.48,0.48,0.48,0.1,0.1,0.1,0.1,0.52,0.52,0.52,0.52,0.2,0.2,0.2,0.2\n"
        "True,0.52,0.52,0.52,0.52,0.9,0.9,0.9,0.9,0.48,0.48,0.48,0.48,0.8,0.8,0.8,0.8\n";
    CHECK(os.str() == expected);
}

TEST_CASE("NPT degenerate shapes") {
    const NptView flat = build_npt([] {
        ParadoxBnSpec spec = ParadoxBnSpec::defaults(2);
        spec.p1 = spec.p2 = spec.p3 = spec.p4 = 0.5;
        return spec;
    }());
    for (std::uint64_t c = 0; c < flat.column_count(); ++c) {
        CHECK(flat.column(c).p_true == 0.5);
    }

    const NptView tiny = build_npt(ParadoxBnSpec::defaults(1));
    REQUIRE(tiny.column_count() == 4); // (Xn, D) only
    CHECK(tiny.column(0).p_true == 0.52);
    CHECK(tiny.column(1).p_true == 0.9);
    CHECK(tiny.column(2).p_true == 0.48);
    CHECK(tiny.column(3).p_true == 0.8);

    ParadoxBnSpec big = ParadoxBnSpec::defaults(25);
    CHECK_THROWS_AS(build_npt(big), InvalidInput);
}

TEST_CASE("case 1 picks the stratum probabilities") {
    const ParadoxBnSpec spec = ParadoxBnSpec::defaults(3);
    CHECK(case1_recovery(spec, false, false) == 0.52);
    CHECK(case1_recovery(spec, true, false) == 0.9);
    CHECK(case1_recovery(spec, false, true) == 0.48);
    CHECK(case1_recovery(spec, true, true) == 0.8);
}

TEST_CASE("posterior of the confounder given the drug is exact") {
    const ParadoxBnSpec spec = ParadoxBnSpec::defaults(3);
    CHECK(posterior_xn_given_d(spec, true) == 0.999);
    CHECK(posterior_xn_given_d(spec, false) == doctest::Approx(0.001).epsilon(1e-12));
}

TEST_CASE("case 2 marginalizes over the hidden confounder") {
    const ParadoxBnSpec spec = ParadoxBnSpec::defaults(3);
    CHECK(case2_recovery(spec, true) == doctest::Approx(0.79968).epsilon(1e-12));
    CHECK(case2_recovery(spec, false) == doctest::Approx(0.52038).epsilon(1e-12));
    // just below 0.8, just above 0.52
    CHECK(case2_recovery(spec, true) < 0.8);
    CHECK(case2_recovery(spec, false) > 0.52);
}

TEST_CASE("case 2 with D independent of Xn averages the arms") {
    ParadoxBnSpec spec = ParadoxBnSpec::defaults(2);
    spec.p = spec.q = spec.prior_xn = 0.5;
    CHECK(case2_recovery(spec, true) == (spec.p3 + spec.p4) / 2);
    CHECK(case2_recovery(spec, false) == (spec.p1 + spec.p2) / 2);
}

TEST_CASE("case 2 rejects conditioning on an impossible arm") {
    ParadoxBnSpec spec = ParadoxBnSpec::defaults(1);
    spec.p = 0.0;
    spec.q = 0.0;
    CHECK_THROWS_AS(case2_recovery(spec, true), InvalidInput);
    CHECK_NOTHROW(case2_recovery(spec, false));
}

TEST_CASE("certificate on the defaults") {
    const ReversalCertificate cert = certify_reversal(ParadoxBnSpec::defaults(3));
    CHECK(cert.stratified_drug_worse);
    CHECK(cert.hidden_drug_better);
    CHECK(cert.paradox);
    CHECK(cert.case2_drug_rate == doctest::Approx(0.79968).epsilon(1e-12));
    CHECK(cert.case2_placebo_rate == doctest::Approx(0.52038).epsilon(1e-12));
}

TEST_CASE("certificate collapses when D is independent of Xn") {
    ParadoxBnSpec spec = ParadoxBnSpec::defaults(2);
    spec.q = spec.p; // equal rows: D carries no information about Xn
    const ReversalCertificate cert = certify_reversal(spec);
    CHECK(cert.stratified_drug_worse);
    CHECK_FALSE(cert.hidden_drug_better);
    CHECK(cert.case2_drug_rate == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(cert.case2_placebo_rate == doctest::Approx(0.71).epsilon(1e-12));
    CHECK_FALSE(cert.paradox);
}

TEST_CASE("certificate needs a stratified effect") {
    ParadoxBnSpec spec = ParadoxBnSpec::defaults(2);
    spec.p3 = spec.p1;
    spec.p4 = spec.p2;
    const ReversalCertificate cert = certify_reversal(spec);
    CHECK_FALSE(cert.stratified_drug_worse);
    CHECK_FALSE(cert.paradox);
}

TEST_CASE("defaults reverse for every n up to eight") {
    for (int n = 1; n <= 8; ++n) {
        CHECK(certify_reversal(ParadoxBnSpec::defaults(n)).paradox);
    }
}

TEST_CASE("joint enumeration basics") {
    const auto joint = exact_joint(ParadoxBnSpec::defaults(1));
    // P(X1=T, D=T, R=T) = 0.5 * 0.999 * 0.8
    CHECK(joint.probability(0b111) == doctest::Approx(0.3996).epsilon(1e-12));
    CHECK(joint.mass(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    ParadoxBnSpec certain = ParadoxBnSpec::defaults(2);
    certain.p1 = certain.p2 = certain.p3 = certain.p4 = 1.0;
    const auto sure = exact_joint(certain);
    CHECK(sure.mass(sure.r_bit(), sure.r_bit()) == doctest::Approx(1.0).epsilon(1e-12));

    ParadoxBnSpec big = ParadoxBnSpec::defaults(25);
    CHECK_THROWS_AS(exact_joint(big), InvalidInput);
}

TEST_CASE("joint sums to one for randomized specs") {
    std::mt19937_64 rng(424344);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const auto joint = exact_joint(random_spec(rng, n));
        CHECK(joint.mass(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("closed-form inference agrees with the joint oracle") {
    std::mt19937_64 rng(987654321);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 8);
        const auto spec = random_spec(rng, n);
        const auto joint = exact_joint(spec);
        const std::uint64_t xn = joint.x_bit(n);
        const std::uint64_t d = joint.d_bit();
        for (bool xn_value : {false, true}) {
            for (bool d_value : {false, true}) {
                const std::uint64_t value = (xn_value ? xn : 0) | (d_value ? d : 0);
                CHECK(case1_recovery(spec, xn_value, d_value) ==
                      doctest::Approx(joint_recovery(joint, xn | d, value)).epsilon(1e-12));
            }
        }
        for (bool d_value : {false, true}) {
            CHECK(case2_recovery(spec, d_value) ==
                  doctest::Approx(joint_recovery(joint, d, d_value ? d : 0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("conditioning on the other covariates changes nothing") {
    std::mt19937_64 rng(1357911);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        const auto spec = random_spec(rng, n);
        const auto joint = exact_joint(spec);
        const std::uint64_t xn = joint.x_bit(n);
        const std::uint64_t d = joint.d_bit();
        std::uint64_t others = 0;
        for (int i = 1; i < n; ++i) others |= joint.x_bit(i);

        for (std::uint64_t assignment = 0; assignment < (std::uint64_t{1} << (n - 1));
             ++assignment) {
            for (bool xn_value : {false, true}) {
                for (bool d_value : {false, true}) {
                    const std::uint64_t value =
                        assignment | (xn_value ? xn : 0) | (d_value ? d : 0);
                    CHECK(joint_recovery(joint, others | xn | d, value) ==
                          doctest::Approx(case1_recovery(spec, xn_value, d_value))
                              .epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("hidden-confounder rates sit strictly between the stratum rates") {
    const ParadoxBnSpec spec = ParadoxBnSpec::defaults(4);
    const double drug = case2_recovery(spec, true);
    const double placebo = case2_recovery(spec, false);
    CHECK(drug > spec.p3);
    CHECK(drug < spec.p4);
    CHECK(placebo > spec.p1);
    CHECK(placebo < spec.p2);
}
