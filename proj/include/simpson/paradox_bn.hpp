#pragma once

#include "simpson/errors.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace simpson {

// Parameters of the confounded-trial network over X1..Xn, D (drug taken) and
// R (recovered): each Xi parents R, Xn also parents D. The recovery table is
// constant across X1..X(n-1), so it is stored as just four probabilities:
//
//   p1 = P(R | Xn=false, D=false)    p3 = P(R | Xn=false, D=true)
//   p2 = P(R | Xn=true,  D=false)    p4 = P(R | Xn=true,  D=true)
//
// The drug node takes P(D=true | Xn=true) = p and P(D=true | Xn=false) = q.
// Defaults are the canonical reversing configuration.
struct ParadoxBnSpec {
    int n = 1;
    double p1 = 0.52;
    double p2 = 0.9;
    double p3 = 0.48;
    double p4 = 0.8;
    double p = 0.999;
    double q = 0.001;
    double prior_xn = 0.5;
    std::vector<double> priors_x; // P(Xi=true) for i = 1..n-1

    // Canonical configuration for a given n (uniform priors on X1..Xn-1).
    static ParadoxBnSpec defaults(int n);

    // Hard validation: n >= 1, priors_x sized n-1, all probabilities in
    // [0,1]. Throws InvalidInput naming the offending field.
    void validate() const;

    // Soft regime checks: notes where the spec leaves the canonical
    // reversing configuration. Never rejects; certify_reversal evaluates
    // the actual condition.
    std::vector<std::string> regime_warnings() const;

    // Stable 64-bit hash of the canonical JSON form.
    std::uint64_t fingerprint() const;

    nlohmann::json to_json() const;
    static ParadoxBnSpec from_json(const nlohmann::json& doc);
};

// P(R=true | Xn=xn, D=d) with the confounder observed. Picks the matching
// p1..p4; independent of X1..Xn-1 by construction.
double case1_recovery(const ParadoxBnSpec& spec, bool xn, bool d);

// Bayes posterior P(Xn=true | D=d) from prior_xn, p, q.
double posterior_xn_given_d(const ParadoxBnSpec& spec, bool d);

// P(R=true | D=d) with the confounder hidden: the two-term marginalization
// over the Xn posterior. Throws InvalidInput when P(D=d) is zero.
double case2_recovery(const ParadoxBnSpec& spec, bool d);

// Verdict on the construction: the drug looks strictly worse in every
// observed stratum while looking strictly better once Xn is hidden.
struct ReversalCertificate {
    bool stratified_drug_worse = false;
    bool hidden_drug_better = false;
    double case2_drug_rate = 0.0;
    double case2_placebo_rate = 0.0;
    bool paradox = false;
};

ReversalCertificate certify_reversal(const ParadoxBnSpec& spec);

// Materialized view of the recovery node's probability table: one column per
// (D, Xn, ..., X1) combination with D slowest and X1 fastest, matching the
// conventional display layout. Columns are computed on demand, so only the
// column index space (2^(n+1)) is bounded by the enumeration cap.
class NptView {
  public:
    explicit NptView(const ParadoxBnSpec& spec);

    struct Column {
        bool d = false;
        std::vector<bool> x; // x[i] is X(i+1)
        double p_true = 0.0; // P(R=true | this column)
    };

    int n() const { return n_; }
    std::uint64_t column_count() const { return std::uint64_t{1} << (n_ + 1); }
    Column column(std::uint64_t index) const;

  private:
    int n_;
    double probs_[4]; // indexed by (xn << 1) | d
};

NptView build_npt(const ParadoxBnSpec& spec);

// CSV in the display layout: one header line per parent variable (drug row
// first, then Xn down to X1), then the P(R=false) and P(R=true) rows.
void write_npt_csv(const NptView& npt, std::ostream& os);

// Full joint over (X1..Xn, D, R) by chain rule. States are bit-packed:
// bit i-1 holds Xi, bit n holds D, bit n+1 holds R.
class JointDistribution {
  public:
    JointDistribution(int n, std::vector<double> probs);

    int n() const { return n_; }
    std::uint64_t state_count() const { return std::uint64_t{1} << (n_ + 2); }
    double probability(std::uint64_t state) const { return probs_.at(state); }

    std::uint64_t x_bit(int i) const; // bit mask for Xi, i in 1..n
    std::uint64_t d_bit() const { return std::uint64_t{1} << n_; }
    std::uint64_t r_bit() const { return std::uint64_t{1} << (n_ + 1); }

    // Total mass of states matching `value` on the bits set in `mask`.
    double mass(std::uint64_t mask, std::uint64_t value) const;

  private:
    int n_;
    std::vector<double> probs_;
};

// Enumerates the joint explicitly. Capped at n <= 24 (~67M states); the
// closed-form paths above have no cap.
JointDistribution exact_joint(const ParadoxBnSpec& spec);

} // namespace simpson
