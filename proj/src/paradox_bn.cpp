#include "simpson/paradox_bn.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

namespace simpson {

namespace {

constexpr int kEnumerationCapN = 24;

void check_probability(double value, const char* field) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw InvalidInput(std::string("field '") + field + "' must be a probability in [0,1]");
    }
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char byte : data) {
        hash ^= byte;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

// Shortest-ish decimal that still reads like the source probabilities;
// 12 significant digits round-trips everything we emit here.
std::string format_probability(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

} // namespace

ParadoxBnSpec ParadoxBnSpec::defaults(int n) {
    ParadoxBnSpec spec;
    spec.n = n;
    if (n >= 1) {
        spec.priors_x.assign(static_cast<std::size_t>(n - 1), 0.5);
    }
    spec.validate();
    return spec;
}

void ParadoxBnSpec::validate() const {
    if (n < 1) {
        throw InvalidInput("field 'n' must be at least 1");
    }
    check_probability(p1, "p1");
    check_probability(p2, "p2");
    check_probability(p3, "p3");
    check_probability(p4, "p4");
    check_probability(p, "p");
    check_probability(q, "q");
    check_probability(prior_xn, "prior_xn");
    if (priors_x.size() != static_cast<std::size_t>(n - 1)) {
        throw InvalidInput("field 'priors_x' must hold exactly n-1 entries (" +
                           std::to_string(n - 1) + "), got " + std::to_string(priors_x.size()));
    }
    for (std::size_t i = 0; i < priors_x.size(); ++i) {
        check_probability(priors_x[i], ("priors_x[" + std::to_string(i) + "]").c_str());
    }
}

std::vector<std::string> ParadoxBnSpec::regime_warnings() const {
    std::vector<std::string> warnings;
    if (!(p1 > 0.5 && p1 < 0.6)) {
        warnings.push_back("p1 is not just above 0.5 (canonical 0.52)");
    }
    if (!(p2 >= 0.8)) {
        warnings.push_back("p2 is not close to 1 (canonical 0.9)");
    }
    if (!(p3 < 0.5 && p3 > 0.4)) {
        warnings.push_back("p3 is not just below 0.5 (canonical 0.48)");
    }
    if (!(p4 < p2 && p4 >= 0.7)) {
        warnings.push_back("p4 is not below p2 while staying close to 1 (canonical 0.8)");
    }
    if (!(p >= 0.9)) {
        warnings.push_back("p is not close to 1 (canonical 0.999)");
    }
    if (!(q <= 0.1)) {
        warnings.push_back("q is not close to 0 (canonical 0.001)");
    }
    return warnings;
}

std::uint64_t ParadoxBnSpec::fingerprint() const {
    return fnv1a64(to_json().dump());
}

nlohmann::json ParadoxBnSpec::to_json() const {
    return nlohmann::json{{"n", n},   {"p1", p1}, {"p2", p2},
                          {"p3", p3}, {"p4", p4}, {"p", p},
                          {"q", q},   {"prior_xn", prior_xn}, {"priors_x", priors_x}};
}

ParadoxBnSpec ParadoxBnSpec::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw InvalidInput("spec document must be a JSON object");
    }
    if (!doc.contains("n")) {
        throw InvalidInput("spec document is missing field 'n'");
    }
    ParadoxBnSpec spec;
    auto read_number = [&](const char* field, double& out) {
        if (!doc.contains(field)) return;
        const auto& v = doc.at(field);
        if (!v.is_number()) {
            throw InvalidInput(std::string("field '") + field + "' must be a number");
        }
        out = v.get<double>();
    };
    const auto& n_field = doc.at("n");
    if (!n_field.is_number_integer()) {
        throw InvalidInput("field 'n' must be an integer");
    }
    spec.n = n_field.get<int>();
    read_number("p1", spec.p1);
    read_number("p2", spec.p2);
    read_number("p3", spec.p3);
    read_number("p4", spec.p4);
    read_number("p", spec.p);
    read_number("q", spec.q);
    read_number("prior_xn", spec.prior_xn);
    if (doc.contains("priors_x")) {
        const auto& arr = doc.at("priors_x");
        if (!arr.is_array()) {
            throw InvalidInput("field 'priors_x' must be an array of probabilities");
        }
        spec.priors_x.clear();
        for (const auto& v : arr) {
            if (!v.is_number()) {
                throw InvalidInput("field 'priors_x' must contain only numbers");
            }
            spec.priors_x.push_back(v.get<double>());
        }
    } else if (spec.n >= 1) {
        spec.priors_x.assign(static_cast<std::size_t>(spec.n - 1), 0.5);
    }
    spec.validate();
    return spec;
}

double case1_recovery(const ParadoxBnSpec& spec, bool xn, bool d) {
    spec.validate();
    if (!xn && !d) return spec.p1;
    if (xn && !d) return spec.p2;
    if (!xn && d) return spec.p3;
    return spec.p4;
}

double posterior_xn_given_d(const ParadoxBnSpec& spec, bool d) {
    spec.validate();
    const double pi = spec.prior_xn;
    const double likely_true = d ? spec.p : 1.0 - spec.p;
    const double likely_false = d ? spec.q : 1.0 - spec.q;
    const double evidence = likely_true * pi + likely_false * (1.0 - pi);
    if (evidence <= 0.0) {
        throw InvalidInput(std::string("P(D=") + (d ? "true" : "false") +
                           ") is zero under this spec; cannot condition on it");
    }
    return likely_true * pi / evidence;
}

double case2_recovery(const ParadoxBnSpec& spec, bool d) {
    const double posterior = posterior_xn_given_d(spec, d);
    const double given_true = d ? spec.p4 : spec.p2;
    const double given_false = d ? spec.p3 : spec.p1;
    return posterior * given_true + (1.0 - posterior) * given_false;
}

ReversalCertificate certify_reversal(const ParadoxBnSpec& spec) {
    spec.validate();
    ReversalCertificate cert;
    // Strict comparisons, no epsilon: the construction is evaluated as is.
    cert.stratified_drug_worse = spec.p3 < spec.p1 && spec.p4 < spec.p2;
    cert.case2_drug_rate = case2_recovery(spec, true);
    cert.case2_placebo_rate = case2_recovery(spec, false);
    cert.hidden_drug_better = cert.case2_drug_rate > cert.case2_placebo_rate;
    cert.paradox = cert.stratified_drug_worse && cert.hidden_drug_better;
    return cert;
}

NptView::NptView(const ParadoxBnSpec& spec) : n_(spec.n) {
    spec.validate();
    if (spec.n > kEnumerationCapN) {
        throw InvalidInput("n exceeds the NPT materialization cap (" +
                           std::to_string(kEnumerationCapN) + ")");
    }
    probs_[0] = spec.p1; // xn=0, d=0
    probs_[1] = spec.p3; // xn=0, d=1
    probs_[2] = spec.p2; // xn=1, d=0
    probs_[3] = spec.p4; // xn=1, d=1
}

NptView::Column NptView::column(std::uint64_t index) const {
    if (index >= column_count()) {
        throw InvalidInput("NPT column index out of range");
    }
    Column col;
    col.d = ((index >> n_) & 1) != 0;
    col.x.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        col.x[static_cast<std::size_t>(i)] = ((index >> i) & 1) != 0;
    }
    const bool xn = col.x[static_cast<std::size_t>(n_ - 1)];
    col.p_true = probs_[(xn ? 2 : 0) | (col.d ? 1 : 0)];
    return col;
}

NptView build_npt(const ParadoxBnSpec& spec) {
    return NptView(spec);
}

void write_npt_csv(const NptView& npt, std::ostream& os) {
    const std::uint64_t cols = npt.column_count();
    auto write_row = [&](const std::string& label,
                         const std::function<std::string(const NptView::Column&)>& cell) {
        os << label;
        for (std::uint64_t c = 0; c < cols; ++c) {
            os << ',' << cell(npt.column(c));
        }
        os << '\n';
    };
    write_row("Drug taken", [](const NptView::Column& c) { return c.d ? "True" : "False"; });
    for (int i = npt.n(); i >= 1; --i) {
        write_row("X" + std::to_string(i), [i](const NptView::Column& c) {
            return c.x[static_cast<std::size_t>(i - 1)] ? "True" : "False";
        });
    }
    write_row("False",
              [](const NptView::Column& c) { return format_probability(1.0 - c.p_true); });
    write_row("True", [](const NptView::Column& c) { return format_probability(c.p_true); });
}

JointDistribution::JointDistribution(int n, std::vector<double> probs)
    : n_(n), probs_(std::move(probs)) {}

std::uint64_t JointDistribution::x_bit(int i) const {
    return std::uint64_t{1} << (i - 1);
}

double JointDistribution::mass(std::uint64_t mask, std::uint64_t value) const {
    double sum = 0.0;
    const std::uint64_t target = value & mask;
    for (std::uint64_t state = 0; state < probs_.size(); ++state) {
        if ((state & mask) == target) sum += probs_[state];
    }
    return sum;
}

JointDistribution exact_joint(const ParadoxBnSpec& spec) {
    spec.validate();
    if (spec.n > kEnumerationCapN) {
        throw InvalidInput("n exceeds the joint enumeration cap (" +
                           std::to_string(kEnumerationCapN) + ")");
    }
    const int n = spec.n;
    const std::uint64_t states = std::uint64_t{1} << (n + 2);
    std::vector<double> probs(states);
    for (std::uint64_t state = 0; state < states; ++state) {
        double prob = 1.0;
        for (int i = 0; i < n - 1; ++i) {
            const bool xi = ((state >> i) & 1) != 0;
            prob *= xi ? spec.priors_x[static_cast<std::size_t>(i)]
                       : 1.0 - spec.priors_x[static_cast<std::size_t>(i)];
        }
        const bool xn = ((state >> (n - 1)) & 1) != 0;
        prob *= xn ? spec.prior_xn : 1.0 - spec.prior_xn;
        const bool d = ((state >> n) & 1) != 0;
        const double d_true = xn ? spec.p : spec.q;
        prob *= d ? d_true : 1.0 - d_true;
        const bool r = ((state >> (n + 1)) & 1) != 0;
        const double r_true = xn ? (d ? spec.p4 : spec.p2) : (d ? spec.p3 : spec.p1);
        prob *= r ? r_true : 1.0 - r_true;
        probs[state] = prob;
    }
    return JointDistribution(n, std::move(probs));
}

} // namespace simpson
