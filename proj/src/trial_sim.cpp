#include "simpson/trial_sim.hpp"

#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace simpson {

namespace {

double uniform01(std::mt19937_64& rng) {
    // 53 random bits into [0, 1); exact and portable.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool bernoulli(std::mt19937_64& rng, double prob) {
    return uniform01(rng) < prob;
}

} // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

TrialDataset sample(const ParadoxBnSpec& spec, std::uint64_t size, std::uint64_t seed) {
    spec.validate();
    if (size == 0) {
        throw InvalidInput("sample size must be at least 1");
    }
    const std::size_t n = static_cast<std::size_t>(spec.n);
    TrialDataset dataset;
    dataset.spec_fingerprint = spec.fingerprint();
    dataset.seed = seed;
    dataset.n = spec.n;
    dataset.records.reserve(size);
    for (std::uint64_t i = 0; i < size; ++i) {
        // record i uses the (i+1)-th output of the SplitMix64 stream started
        // at `seed`; the golden-ratio step keeps streams of nearby seeds
        // unrelated (seed + i + 1 would alias (seed, i) pairs diagonally,
        // making neighbouring seeds produce shifted copies of one dataset)
        std::mt19937_64 rng(splitmix64(seed + (i + 1) * 0x9e3779b97f4a7c15ULL));
        TrialRecord record;
        record.x.resize(n);
        for (std::size_t j = 0; j + 1 < n; ++j) {
            record.x[j] = bernoulli(rng, spec.priors_x[j]);
        }
        record.x[n - 1] = bernoulli(rng, spec.prior_xn);
        record.d = bernoulli(rng, record.x[n - 1] ? spec.p : spec.q);
        const double recovery = record.x[n - 1] ? (record.d ? spec.p4 : spec.p2)
                                                : (record.d ? spec.p3 : spec.p1);
        record.r = bernoulli(rng, recovery);
        dataset.records.push_back(std::move(record));
    }
    return dataset;
}

ContingencyTable to_table(const TrialDataset& dataset) {
    if (dataset.records.empty()) {
        throw InvalidInput("cannot tabulate an empty dataset");
    }
    const std::size_t n = static_cast<std::size_t>(dataset.n);
    std::vector<Variable> schema;
    schema.reserve(n + 2);
    for (std::size_t i = 1; i <= n; ++i) {
        schema.push_back({"X" + std::to_string(i), {"false", "true"}});
    }
    schema.push_back({"Drug", {"false", "true"}});
    schema.push_back({"Recovered", {"false", "true"}});
    ContingencyTable table(std::move(schema));

    std::vector<std::size_t> indices(n + 2);
    for (const auto& record : dataset.records) {
        if (record.x.size() != n) {
            throw InvalidInput("record covariate arity does not match dataset n");
        }
        for (std::size_t i = 0; i < n; ++i) {
            indices[i] = record.x[i] ? 1 : 0;
        }
        indices[n] = record.d ? 1 : 0;
        indices[n + 1] = record.r ? 1 : 0;
        table.add_indices(indices, 1);
    }
    return table;
}

void write_dataset_csv(const TrialDataset& dataset, std::ostream& os) {
    for (int i = 1; i <= dataset.n; ++i) {
        os << 'X' << i << ',';
    }
    os << "Drug,Recovered\n";
    for (const auto& record : dataset.records) {
        for (bool xi : record.x) {
            os << (xi ? "true" : "false") << ',';
        }
        os << (record.d ? "true" : "false") << ',' << (record.r ? "true" : "false") << '\n';
    }
}

TrialDataset read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw DataError("dataset CSV is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) header.push_back(field);
        if (!line.empty() && line.back() == ',') header.push_back("");
    }
    const std::size_t cols = header.size();
    if (cols < 3 || header[cols - 2] != "Drug" || header[cols - 1] != "Recovered") {
        throw DataError("dataset CSV header must be X1,...,Xn,Drug,Recovered");
    }
    const std::size_t n = cols - 2;
    for (std::size_t i = 0; i < n; ++i) {
        if (header[i] != "X" + std::to_string(i + 1)) {
            throw DataError("dataset CSV header must be X1,...,Xn,Drug,Recovered");
        }
    }

    TrialDataset dataset;
    dataset.n = static_cast<int>(n);
    auto parse_bool = [](const std::string& field, std::size_t line_no) {
        if (field == "true") return true;
        if (field == "false") return false;
        throw DataError("line " + std::to_string(line_no) + ": expected true/false, got '" +
                        field + "'");
    };
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != cols) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(cols) + " fields, got " +
                            std::to_string(fields.size()));
        }
        TrialRecord record;
        record.x.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            record.x[i] = parse_bool(fields[i], line_no);
        }
        record.d = parse_bool(fields[n], line_no);
        record.r = parse_bool(fields[n + 1], line_no);
        dataset.records.push_back(std::move(record));
    }
    return dataset;
}

} // namespace simpson
