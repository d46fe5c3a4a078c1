#include "pmf/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmf/detmath.hpp"
#include "pmf/stochgeom.hpp"

namespace pmf {

namespace {

enum : std::uint64_t { kTagChain = 0x8001, kTagJump, kTagHold, kTagChoice, kTagAccept, kTagNewPackage };

double parse_number(const std::string& s, const std::string& spec) {
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty() || !std::isfinite(v))
        throw InputError("hamiltonian '" + spec + "': bad number '" + s + "'");
    return v;
}

Vec3 uniform_in_domain(const Domain& d, RngStream& r) {
    Vec3 lo = d.vertices[0], hi = lo;
    for (const auto& v : d.vertices)
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], v[k]);
            hi[k] = std::max(hi[k], v[k]);
        }
    for (;;) {
        Vec3 p{r.uniform(lo.x, hi.x), r.uniform(lo.y, hi.y), r.uniform(lo.z, hi.z)};
        if (d.contains(p, 0)) return p;
    }
}

using BeforeApply = std::function<void(const ChainState&, double from, double to)>;

JumpInfo jump(ChainState& st, const Domain& d, const Hamiltonian* h, const ResolveOptions& opt,
              const BeforeApply& before = {}) {
    JumpInfo info;
    Key jk = split_key(st.key, kTagJump, st.jumps);
    RngStream hold(split_key(jk, kTagHold)), choice(split_key(jk, kTagChoice)), accept(split_key(jk, kTagAccept));
    const double lam = kIntensityTriple * d.volume;
    const std::size_t k = st.packages.size();
    info.countBefore = k;
    const double total = lam + static_cast<double>(k);
    info.hold = hold.exponential() / total;
    if (before) before(st, st.s, st.s + info.hold);
    st.s += info.hold;
    ++st.jumps;

    info.birth = choice.uniform() * total < lam;
    std::vector<BirthPackage> proposal = st.packages;
    if (info.birth) {
        Vec3 site = uniform_in_domain(d, choice);
        proposal.push_back(make_package(site, split_key(jk, kTagNewPackage)));
    } else {
        proposal.erase(proposal.begin() + static_cast<std::ptrdiff_t>(choice.below(k)));
    }
    PolyConfig next;
    try {
        next = resolve(d, st.entries, proposal, opt);
    } catch (const DegeneracyError&) {
        return info;
    }
    double hNext = 0;
    if (h) {
        double hCur = (*h)(st.cfg);
        hNext = (*h)(next);
        info.deltaH = hNext - hCur;
        double a = info.deltaH <= 0 ? 1.0 : detmath::exp(-info.deltaH);
        if (!(accept.uniform() < a)) return info;
    }
    info.accepted = true;
    st.packages = std::move(proposal);
    st.cfg = std::move(next);
    st.h = hNext;
    return info;
}

}  // namespace

double Hamiltonian::operator()(const PolyConfig& c) const {
    double v = eval ? eval(c) : 0.0;
    if (!std::isfinite(v)) throw HamiltonianError("hamiltonian '" + name + "' returned a non-finite value");
    return v;
}

Hamiltonian zero_hamiltonian() { return Hamiltonian{"zero", [](const PolyConfig&) { return 0.0; }, 0, 0}; }

Hamiltonian make_hamiltonian(const std::string& spec, const Domain& d) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "zero") {
        if (!args.empty()) throw InputError("hamiltonian 'zero' takes no parameters");
        return zero_hamiltonian();
    }
    if (name == "area") {
        double beta = parse_number(args, spec);
        if (beta < 0) throw InputError("hamiltonian 'area' needs beta >= 0");
        return Hamiltonian{spec, [beta](const PolyConfig& c) { return beta * stats(c).totalArea; }, 0, 0};
    }
    if (name == "volume-clamp") {
        auto comma = args.find(',');
        if (comma == std::string::npos) throw InputError("hamiltonian 'volume-clamp' needs A,B");
        double a = parse_number(args.substr(0, comma), spec);
        double b = parse_number(args.substr(comma + 1), spec);
        if (a < 0 || b < 0) throw InputError("hamiltonian 'volume-clamp' needs A,B >= 0");
        double cap = a * d.volume + b;
        return Hamiltonian{spec,
                           [cap](const PolyConfig& c) { return -std::min(cap, static_cast<double>(c.faces.size())); },
                           a, b};
    }
    if (name == "it-count") {
        double c = parse_number(args, spec);
        if (c < 0) throw InputError("hamiltonian 'it-count' needs c >= 0");
        return Hamiltonian{spec,
                           [c](const PolyConfig& cfg) {
                               int n = 0;
                               for (const auto& f : cfg.faces) n += f.tag.kind == BirthKind::IT;
                               return c * n / 3.0;
                           },
                           0, 0};
    }
    throw InputError("unknown hamiltonian '" + name + "'");
}

ChainState init_chain(const Domain& d, const EntrySet& entries, std::uint64_t seed, const ResolveOptions& opt) {
    ChainState st;
    st.entries = entries;
    st.key = split_key(seed_key(seed), kTagChain);
    st.cfg = resolve(d, entries, {}, opt);
    return st;
}

JumpInfo bs_step(ChainState& st, const Domain& d, const ResolveOptions& opt) { return jump(st, d, nullptr, opt); }

JumpInfo bs_h_step(ChainState& st, const Domain& d, const Hamiltonian& h, const ResolveOptions& opt) {
    return jump(st, d, &h, opt);
}

std::vector<Observation> run_chain(const Domain& d, const EntrySet& entries, std::uint64_t seed, const ChainOptions& o) {
    if (o.sMax < 0 || !(o.thin > 0) || o.burnIn < 0) throw InputError("run_chain: need s_max >= 0, thin > 0, burn-in >= 0");
    ChainState st = init_chain(d, entries, seed, o.resolve);
    if (o.hamiltonian) st.h = (*o.hamiltonian)(st.cfg);
    std::vector<Observation> out;
    double nextObs = o.burnIn;
    auto observe = [&](const ChainState& s, double from, double to) {
        while (nextObs <= o.sMax && nextObs >= from && nextObs < to) {
            Observation ob;
            ob.s = nextObs;
            ob.stats = stats(s.cfg);
            if (o.keepConfigs) ob.serialized = serialize(s.cfg);
            out.push_back(std::move(ob));
            nextObs += o.thin;
        }
    };
    while (nextObs <= o.sMax) jump(st, d, o.hamiltonian ? &*o.hamiltonian : nullptr, o.resolve, observe);
    return out;
}

BalanceAudit audit_chain(const Domain& d, const Hamiltonian& h, std::uint64_t seed, std::uint64_t jumps,
                         const ResolveOptions& opt) {
    BalanceAudit a;
    ChainState st = init_chain(d, {}, seed, opt);
    st.h = h(st.cfg);
    std::map<std::size_t, double> timeAt;
    for (std::uint64_t i = 0; i < jumps; ++i) {
        JumpInfo j = jump(st, d, &h, opt);
        timeAt[j.countBefore] += j.hold;
        a.sTotal += j.hold;
        if (j.birth) {
            ++a.birthProposals;
            a.expectedBirthAcceptance += j.deltaH <= 0 ? 1.0 : std::exp(-j.deltaH);
            if (j.accepted) {
                ++a.birthAccepted;
                ++a.levels[j.countBefore].up;
            }
        } else if (j.accepted) {
            ++a.levels[j.countBefore - 1].down;
        }
    }
    a.jumps = jumps;
    for (auto& [k, f] : a.levels) {
        f.timeLow = timeAt[k];
        f.timeHigh = timeAt[k + 1];
    }
    return a;
}

}  // namespace pmf
