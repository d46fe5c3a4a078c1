#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pmf/evolution.hpp"
#include "pmf/sampler.hpp"

namespace pmf {

struct TestReport {
    std::string name;
    std::uint64_t samples = 0;
    double estimate = 0;
    double se = 0;
    double reference = 0;
    std::string provenance;
    double tolerance = 0;
    bool pass = false;
    double seconds = 0;
    std::string detail;
};

std::string to_json(const TestReport& r);
std::string summary_table(const std::vector<TestReport>& rs);

// Runs fn(i) for i in [0, n) on a worker pool; fn must only touch slot i of its outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned workers = 0);

struct KsResult {
    double statistic = 0;
    double pValue = 1;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Counts of the plane process: I1 hits of a segment, I2 hits of a disc in a plane,
// I3 pair points in a unit-normal window, I4 triple points in a cube.
TestReport check_i1(double lineLength, std::uint64_t replicates, std::uint64_t seed);
TestReport check_i2(double discRadius, std::uint64_t replicates, std::uint64_t seed);
TestReport check_i3(double windowArea, std::uint64_t replicates, std::uint64_t seed);
TestReport check_i4(double domainVolume, std::uint64_t replicates, std::uint64_t seed);

TestReport check_kappa(const Domain& d, const std::string& label, std::uint64_t samples, std::uint64_t seed);
TestReport check_empty_probability(const Domain& d, std::uint64_t replicates, std::uint64_t seed);

struct PartitionEstimate {
    double kappa = 0;
    double emptyTerm = 0;
    double stratum3 = 0;
    double stratum3Se = 0;
    double truncationBound = 0;
};
PartitionEstimate estimate_partition(const Domain& d, std::uint64_t replicates, std::uint64_t seed);
TestReport check_partition_truncated(const Domain& d, std::uint64_t replicates, std::uint64_t seed);
// Gibbs weight of the three-plane stratum against exp(-kappa) times the dynamic probability
// of a single three-face configuration.
TestReport check_stratum3(const Domain& d, std::uint64_t replicates, std::uint64_t seed);

struct EquivalenceOptions {
    std::size_t freshDraws = 10000;
    std::size_t chainSamples = 5000;
    std::size_t chains = 8;
    double thin = 5;
    double burnIn = 50;
    double alpha = 0.01;
    ResolveOptions freshOptions;
    ResolveOptions chainOptions;
};

TestReport check_equivalence(const Domain& d, const EntrySet& entries, std::uint64_t seed,
                             const EquivalenceOptions& o = {});
TestReport check_isometry(const Domain& a, const Domain& b, std::size_t draws, std::uint64_t seed, double alpha = 0.01);
TestReport check_detailed_balance(const Domain& d, double c, std::uint64_t jumps, std::uint64_t seed);

// A stable entry of the given kind on the facet y = 0 of the box [0,s]^3.
EntryEvent find_stable_entry(const Domain& d, EntryKind kind, double s, std::uint64_t seed);

std::vector<TestReport> run_suite(const std::string& name, std::uint64_t replicates, std::uint64_t seed);
std::vector<std::string> suite_names();

}  // namespace pmf
