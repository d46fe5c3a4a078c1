#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmf/evolution.hpp"
#include "pmf/fieldmodel.hpp"

namespace pmf {

struct HamiltonianError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Hamiltonian {
    std::string name;
    std::function<double(const PolyConfig&)> eval;
    double A = 0, B = 0;

    double operator()(const PolyConfig& c) const;
};

Hamiltonian zero_hamiltonian();
// Built-ins: "zero", "area:beta", "volume-clamp:A,B", "it-count:c".
Hamiltonian make_hamiltonian(const std::string& spec, const Domain& d);

struct ChainState {
    double s = 0;
    std::vector<BirthPackage> packages;
    EntrySet entries;
    PolyConfig cfg;
    double h = 0;
    Key key;
    std::uint64_t jumps = 0;
};

struct JumpInfo {
    bool birth = false;
    bool accepted = false;
    double hold = 0;
    double deltaH = 0;
    std::size_t countBefore = 0;
};

ChainState init_chain(const Domain& d, const EntrySet& entries, std::uint64_t seed, const ResolveOptions& opt = {});
JumpInfo bs_step(ChainState& st, const Domain& d, const ResolveOptions& opt = {});
JumpInfo bs_h_step(ChainState& st, const Domain& d, const Hamiltonian& h, const ResolveOptions& opt = {});

struct Observation {
    double s = 0;
    Stats stats;
    std::string serialized;
};

struct ChainOptions {
    double sMax = 0;
    double thin = 1;
    double burnIn = 0;
    bool keepConfigs = false;
    std::optional<Hamiltonian> hamiltonian;
    ResolveOptions resolve;
};

std::vector<Observation> run_chain(const Domain& d, const EntrySet& entries, std::uint64_t seed, const ChainOptions& o);

// Jump statistics between package-count levels k and k+1.
struct LevelFlux {
    std::uint64_t up = 0, down = 0;
    double timeLow = 0, timeHigh = 0;
};

struct BalanceAudit {
    std::map<std::size_t, LevelFlux> levels;
    std::uint64_t jumps = 0;
    double sTotal = 0;
    std::uint64_t birthProposals = 0, birthAccepted = 0;
    double expectedBirthAcceptance = 0;  // sum of min(1, exp(-dH)) over birth proposals
};

BalanceAudit audit_chain(const Domain& d, const Hamiltonian& h, std::uint64_t seed, std::uint64_t jumps,
                         const ResolveOptions& opt = {});

}  // namespace pmf
