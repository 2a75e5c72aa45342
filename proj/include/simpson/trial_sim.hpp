#pragma once

#include "simpson/paradox_bn.hpp"
#include "simpson/tables.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace simpson {

// One sampled subject: covariates X1..Xn, drug arm, outcome.
struct TrialRecord {
    std::vector<bool> x;
    bool d = false;
    bool r = false;
};

struct TrialDataset {
    std::uint64_t spec_fingerprint = 0;
    std::uint64_t seed = 0;
    int n = 0;
    std::vector<TrialRecord> records;
};

// Ancestral sampling: X1..Xn from their priors, D from p/q given Xn, R from
// the recovery table. Reproducible byte-for-byte across platforms: record i
// draws from its own mt19937_64 seeded with the (i+1)-th output of the
// SplitMix64 stream started at `seed`, and uniforms come from the
// generator's top 53 bits rather than std::uniform_real_distribution (whose
// output is implementation-defined). The per-record substreams make output
// independent of evaluation order.
TrialDataset sample(const ParadoxBnSpec& spec, std::uint64_t size, std::uint64_t seed);

// Counts the dataset into a table over X1..Xn, Drug, Recovered, each with
// states {false, true}. Throws on an empty dataset.
ContingencyTable to_table(const TrialDataset& dataset);

// CSV surface: header X1,...,Xn,Drug,Recovered, one record per line,
// values spelled true/false. read_dataset_csv accepts exactly this format;
// provenance fields (fingerprint, seed) of an imported dataset are zero.
void write_dataset_csv(const TrialDataset& dataset, std::ostream& os);
TrialDataset read_dataset_csv(std::istream& is);

// SplitMix64 finalizer; the substream-derivation primitive used by sample().
std::uint64_t splitmix64(std::uint64_t x);

} // namespace simpson
