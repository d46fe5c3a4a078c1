#include "pmf/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pmf/kinematics.hpp"
#include "pmf/stochgeom.hpp"

namespace pmf {

namespace {

enum : std::uint64_t {
    kTagI1 = 0x9001,
    kTagI2,
    kTagI3,
    kTagI4,
    kTagKappa,
    kTagEmpty,
    kTagPartition,
    kTagStratum,
    kTagFresh,
    kTagChainSeed,
    kTagIsoA,
    kTagIsoB,
    kTagBalance,
    kTagGram,
    kTagIeFraction,
    kTagOctant,
    kTagStructural,
    kTagEntrySearch,
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

RngStream replicate_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t i) {
    return RngStream(split_key(seed_key(seed), tag, i));
}

struct Moments {
    double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& x) {
    Moments m;
    if (x.empty()) return m;
    double s = 0;
    for (double v : x) s += v;
    m.mean = s / static_cast<double>(x.size());
    double q = 0;
    for (double v : x) q += (v - m.mean) * (v - m.mean);
    m.var = x.size() > 1 ? q / static_cast<double>(x.size() - 1) : 0;
    return m;
}

TestReport mean_report(const std::string& name, const std::vector<double>& x, double reference,
                       const std::string& provenance) {
    TestReport r;
    r.name = name;
    r.samples = x.size();
    Moments m = moments(x);
    r.estimate = m.mean;
    r.se = std::sqrt(m.var / static_cast<double>(std::max<std::size_t>(x.size(), 1)));
    r.reference = reference;
    r.provenance = provenance;
    r.tolerance = 3 * r.se;
    r.pass = std::abs(r.estimate - r.reference) <= r.tolerance;
    std::ostringstream os;
    os << "dispersion=" << (m.mean > 0 ? m.var / m.mean : 0.0);
    r.detail = os.str();
    return r;
}

std::string fmtd(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

Plane sample_one_hitting_plane(const Domain& d, double radius, RngStream& rng) {
    for (;;) {
        Vec3 u = uniform_sphere(rng);
        double r = radius * rng.uniform();
        if (r < d.support(u) - dot(d.center, u)) return plane_through(d.center + u * r, u);
    }
}

double circumradius(const Domain& d) {
    double r = 0;
    for (const auto& v : d.vertices) r = std::max(r, norm(v - d.center));
    return r;
}

std::array<Vec3, 3> rotation(double a, double b) {
    Vec3 r0{std::cos(a) * std::cos(b), std::sin(a) * std::cos(b), std::sin(b)};
    Vec3 r1 = normalized(cross(r0, Vec3{0, 0, 1}));
    Vec3 r2 = cross(r0, r1);
    return {r0, r1, r2};
}

}  // namespace

std::string to_json(const TestReport& r) {
    nlohmann::json j;
    j["test"] = r.name;
    j["samples"] = r.samples;
    j["estimate"] = r.estimate;
    j["se"] = r.se;
    j["reference"] = r.reference;
    j["provenance"] = r.provenance;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["seconds"] = r.seconds;
    j["detail"] = r.detail;
    return j.dump();
}

std::string summary_table(const std::vector<TestReport>& rs) {
    std::ostringstream os;
    char line[512];
    std::snprintf(line, sizeof line, "%-34s %10s %14s %12s %14s %12s %6s %8s\n", "test", "samples", "estimate", "se",
                  "reference", "tolerance", "pass", "secs");
    os << line;
    for (const auto& r : rs) {
        std::snprintf(line, sizeof line, "%-34s %10llu %14.6g %12.4g %14.6g %12.4g %6s %8.2f\n", r.name.c_str(),
                      static_cast<unsigned long long>(r.samples), r.estimate, r.se, r.reference, r.tolerance,
                      r.pass ? "yes" : "NO", r.seconds);
        os << line;
    }
    return os.str();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned workers) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> ts;
    for (unsigned w = 1; w < workers; ++w) ts.emplace_back(work);
    work();
    for (auto& t : ts) t.join();
    if (err) std::rethrow_exception(err);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    KsResult r;
    if (a.empty() || b.empty()) return r;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double dmax = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        dmax = std::max(dmax, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    r.statistic = dmax;
    double en = std::sqrt(na * nb / (na + nb));
    double lambda = (en + 0.12 + 0.11 / en) * dmax;
    double q = 0, sign = 1;
    for (int k = 1; k <= 100; ++k) {
        double term = sign * 2 * std::exp(-2.0 * k * k * lambda * lambda);
        q += term;
        if (std::abs(term) < 1e-12) break;
        sign = -sign;
    }
    r.pValue = lambda < 1e-3 ? 1.0 : std::clamp(q, 0.0, 1.0);
    return r;
}

TestReport check_i1(double lineLength, std::uint64_t replicates, std::uint64_t seed) {
    auto t0 = Clock::now();
    const Vec3 e = normalized(Vec3{1, 2, 3});
    const Vec3 a = e * (-0.5 * lineLength), b = e * (0.5 * lineLength);
    std::vector<double> counts(replicates);
    parallel_for(replicates, [&](std::size_t i) {
        RngStream r = replicate_stream(seed, kTagI1, i);
        auto planes = sample_hitting_planes_ball(Vec3{}, 0.5 * lineLength, r);
        int c = 0;
        for (const auto& p : planes) c += p.eval(a) * p.eval(b) < 0;
        counts[i] = c;
    });
    auto rep = mean_report("prop1.I1 line hits", counts, kPi * lineLength, "pi per unit length");
    rep.seconds = seconds_since(t0);
    return rep;
}

TestReport check_i2(double discRadius, std::uint64_t replicates, std::uint64_t seed) {
    auto t0 = Clock::now();
    std::vector<double> counts(replicates);
    parallel_for(replicates, [&](std::size_t i) {
        RngStream r = replicate_stream(seed, kTagI2, i);
        auto planes = sample_hitting_planes_ball(Vec3{}, discRadius, r);
        int c = 0;
        for (const auto& p : planes) c += p.rho < discRadius * std::sqrt(p.u.x * p.u.x + p.u.y * p.u.y);
        counts[i] = c;
    });
    auto rep = mean_report("prop1.I2 disc hits", counts, kPi * kPi * discRadius, "integral of pi/2 dphi dr over the disc");
    rep.seconds = seconds_since(t0);
    return rep;
}

TestReport check_i3(double windowArea, std::uint64_t replicates, std::uint64_t seed) {
    auto t0 = Clock::now();
    const double h = 0.5 * std::sqrt(windowArea);
    std::vector<double> counts(replicates);
    parallel_for(replicates, [&](std::size_t i) {
        RngStream r = replicate_stream(seed, kTagI3, i);
        auto planes = sample_hitting_planes_ball(Vec3{}, h * std::sqrt(2.0), r);
        int c = 0;
        for (std::size_t a = 0; a < planes.size(); ++a)
            for (std::size_t b = a + 1; b < planes.size(); ++b) {
                const Plane& p = planes[a];
                const Plane& q = planes[b];
                double det = p.u.x * q.u.y - p.u.y * q.u.x;
                if (std::abs(det) < 1e-15) continue;
                double x = (p.rho * q.u.y - q.rho * p.u.y) / det;
                double y = (p.u.x * q.rho - q.u.x * p.rho) / det;
                c += std::abs(x) < h && std::abs(y) < h;
            }
        counts[i] = c;
    });
    auto rep = mean_report("prop1.I3 pair points", counts, kIntensityPair * windowArea, "pi^3/4 per unit area");
    rep.detail.clear();
    rep.seconds = seconds_since(t0);
    return rep;
}

TestReport check_i4(double domainVolume, std::uint64_t replicates, std::uint64_t seed) {
    auto t0 = Clock::now();
    const double h = 0.5 * std::cbrt(domainVolume);
    std::vector<double> counts(replicates);
    parallel_for(replicates, [&](std::size_t i) {
        RngStream r = replicate_stream(seed, kTagI4, i);
        auto planes = sample_hitting_planes_ball(Vec3{}, h * std::sqrt(3.0), r);
        int c = 0;
        for (std::size_t a = 0; a < planes.size(); ++a)
            for (std::size_t b = a + 1; b < planes.size(); ++b)
                for (std::size_t k = b + 1; k < planes.size(); ++k) {
                    Vec3 x;
                    try {
                        x = triple_point(planes[a], planes[b], planes[k]);
                    } catch (const DegeneracyError&) {
                        continue;
                    }
                    c += std::abs(x.x) < h && std::abs(x.y) < h && std::abs(x.z) < h;
                }
        counts[i] = c;
    });
    auto rep = mean_report("prop1.I4 triple points", counts, kIntensityTriple * domainVolume, "pi^4/6 per unit volume");
    rep.detail.clear();
    rep.seconds = seconds_since(t0);
    return rep;
}

TestReport check_kappa(const Domain& d, const std::string& label, std::uint64_t samples, std::uint64_t seed) {
    auto t0 = Clock::now();
    const std::size_t chunks = 64;
    std::vector<HitMeasureEstimate> part(chunks);
    parallel_for(chunks, [&](std::size_t i) {
        RngStream r = replicate_stream(seed, kTagKappa, i);
        part[i] = monte_carlo_hit_measure(d, samples / chunks, r);
    });
    TestReport rep;
    rep.name = "kappa." + label;
    rep.samples = (samples / chunks) * chunks;
    double s = 0, v = 0;
    for (const auto& p : part) {
        s += p.value;
        v += p.se * p.se;
    }
    rep.estimate = s / chunks;
    rep.se = std::sqrt(v) / chunks;
    rep.reference = kappa(d);
    rep.provenance = "half sum of exterior dihedral times edge length";
    rep.tolerance = 0.01 * rep.reference;
    rep.pass = std::abs(rep.estimate - rep.reference) <= rep.tolerance;
    rep.detail = "relative error " + fmtd(std::abs(rep.estimate - rep.reference) / rep.reference);
    rep.seconds = seconds_since(t0);
    return rep;
}

TestReport check_empty_probability(const Domain& d, std::uint64_t replicates, std::uint64_t seed) {
    auto t0 = Clock::now();
    std::vector<double> empty(replicates);
    parallel_for(replicates, [&](std::size_t i) {
        auto fs = simulate_field(d, {}, replicate_stream(seed, kTagEmpty, i));
        empty[i] = fs.cfg.empty() ? 1.0 : 0.0;
    });
    auto rep = mean_report("empty-field probability", empty, std::exp(-kIntensityTriple * d.volume),
                           "exp(-(pi^4/6) Vol)");
    rep.detail.clear();
    rep.seconds = seconds_since(t0);
    return rep;
}

PartitionEstimate estimate_partition(const Domain& d, std::uint64_t replicates, std::uint64_t seed) {
    PartitionEstimate pe;
    pe.kappa = kappa(d);
    const double lv = kIntensityTriple * d.volume;
    pe.emptyTerm = std::exp(-pe.kappa) * std::exp(-lv);
    pe.truncationBound = lv * (1 - std::exp(-pe.kappa));
    const double radius = circumradius(d);
    std::vector<double> w(replicates, 0.0);
    ResolveOptions opt;
    opt.spontaneousBirths = false;
    parallel_for(replicates, [&](std::size_t i) {
        RngStream r = replicate_stream(seed, kTagPartition, i);
        std::array<Plane, 3> pl;
        for (auto& p : pl) p = sample_one_hitting_plane(d, radius, r);
        Vec3 x;
        try {
            x = triple_point(pl[0], pl[1], pl[2]);
        } catch (const DegeneracyError&) {
            return;
        }
        if (!d.contains(x, 0)) return;
        try {
            PolyConfig cfg = resolve_forced(d, {ForcedBirth{x, pl}}, opt);
            w[i] = std::exp(-energy(cfg, d));
        } catch (const DegeneracyError&) {
        }
    });
    Moments m = moments(w);
    double p3 = std::exp(-pe.kappa) * pe.kappa * pe.kappa * pe.kappa / 6.0;
    pe.stratum3 = p3 * m.mean;
    pe.stratum3Se = p3 * std::sqrt(m.var / static_cast<double>(replicates));
    return pe;
}

TestReport check_partition_truncated(const Domain& d, std::uint64_t replicates, std::uint64_t seed) {
    auto t0 = Clock::now();
    PartitionEstimate pe = estimate_partition(d, replicates, seed);
    TestReport r;
    r.name = "partition.truncated";
    r.samples = replicates;
    r.estimate = pe.emptyTerm + pe.stratum3;
    r.se = pe.stratum3Se;
    r.reference = std::exp(-pe.kappa);
    r.provenance = "exp(-kappa); strata n=0 (analytic) and n=3 (Monte Carlo)";
    r.tolerance = 3 * r.se + pe.truncationBound;
    r.pass = std::abs(r.estimate - r.reference) <= r.tolerance;
    r.detail = "empty=" + fmtd(pe.emptyTerm) + " stratum3=" + fmtd(pe.stratum3) + " truncation=" +
               fmtd(pe.truncationBound);
    r.seconds = seconds_since(t0);
    return r;
}

TestReport check_stratum3(const Domain& d, std::uint64_t replicates, std::uint64_t seed) {
    auto t0 = Clock::now();
    PartitionEstimate pe = estimate_partition(d, replicates, seed);
    std::vector<double> cone(replicates);
    parallel_for(replicates, [&](std::size_t i) {
        auto fs = simulate_field(d, {}, replicate_stream(seed, kTagStratum, i));
        cone[i] = fs.cfg.faces.size() == 3 ? 1.0 : 0.0;
    });
    Moments m = moments(cone);
    double ek = std::exp(-pe.kappa);
    TestReport r;
    r.name = "partition.stratum3";
    r.samples = replicates;
    r.estimate = pe.stratum3;
    r.reference = ek * m.mean;
    r.se = std::sqrt(pe.stratum3Se * pe.stratum3Se + ek * ek * m.var / static_cast<double>(replicates));
    r.provenance = "exp(-kappa) times dynamic probability of a single three-face configuration";
    r.tolerance = 3 * r.se;
    r.pass = std::abs(r.estimate - r.reference) <= r.tolerance;
    r.seconds = seconds_since(t0);
    return r;
}

namespace {

struct Marginals {
    std::vector<double> faces, area, length;
    void push(const Stats& s) {
        faces.push_back(s.faceCount);
        area.push_back(s.totalArea);
        length.push_back(s.totalEdgeLength);
    }
};

}  // namespace

TestReport check_equivalence(const Domain& d, const EntrySet& entries, std::uint64_t seed,
                             const EquivalenceOptions& o) {
    auto t0 = Clock::now();
    std::vector<Stats> fresh(o.freshDraws);
    parallel_for(o.freshDraws, [&](std::size_t i) {
        fresh[i] = stats(simulate_field(d, entries, replicate_stream(seed, kTagFresh, i), o.freshOptions).cfg);
    });
    const std::size_t per = (o.chainSamples + o.chains - 1) / o.chains;
    std::vector<std::vector<Observation>> chains(o.chains);
    parallel_for(o.chains, [&](std::size_t c) {
        ChainOptions co;
        co.burnIn = o.burnIn;
        co.thin = o.thin;
        co.sMax = o.burnIn + o.thin * (static_cast<double>(per) - 0.5);
        co.resolve = o.chainOptions;
        std::uint64_t cs = split_key(seed_key(seed), kTagChainSeed, c).lo;
        chains[c] = run_chain(d, entries, cs, co);
    });
    Marginals a, b;
    for (const auto& s : fresh) a.push(s);
    for (const auto& ch : chains)
        for (const auto& ob : ch) b.push(ob.stats);
    KsResult k1 = ks_two_sample(a.faces, b.faces);
    KsResult k2 = ks_two_sample(a.area, b.area);
    KsResult k3 = ks_two_sample(a.length, b.length);
    TestReport r;
    r.name = "equivalence";
    r.samples = b.faces.size();
    r.estimate = std::min({k1.pValue, k2.pValue, k3.pValue});
    r.reference = o.alpha / 3;
    r.provenance = "two-sample KS p-values, Bonferroni over 3 marginals; pass iff min p >= alpha/3";
    r.pass = r.estimate >= r.reference;
    r.detail = "p(faces)=" + fmtd(k1.pValue) + " p(area)=" + fmtd(k2.pValue) + " p(length)=" + fmtd(k3.pValue) +
               " fresh=" + std::to_string(a.faces.size());
    r.seconds = seconds_since(t0);
    return r;
}

TestReport check_isometry(const Domain& a, const Domain& b, std::size_t draws, std::uint64_t seed, double alpha) {
    auto t0 = Clock::now();
    std::vector<double> fa(draws), fb(draws);
    parallel_for(draws, [&](std::size_t i) {
        fa[i] = simulate_field(a, {}, replicate_stream(seed, kTagIsoA, i)).cfg.faces.size();
        fb[i] = simulate_field(b, {}, replicate_stream(seed, kTagIsoB, i)).cfg.faces.size();
    });
    KsResult k = ks_two_sample(fa, fb);
    TestReport r;
    r.name = "structural.isometry";
    r.samples = draws;
    r.estimate = k.pValue;
    r.reference = alpha;
    r.provenance = "two-sample KS on face counts, rotated vs reference domain; pass iff p >= alpha";
    r.pass = k.pValue >= alpha;
    r.detail = "D=" + fmtd(k.statistic) + " mean faces " + fmtd(moments(fa).mean) + " vs " + fmtd(moments(fb).mean);
    r.seconds = seconds_since(t0);
    return r;
}

TestReport check_detailed_balance(const Domain& d, double c, std::uint64_t jumps, std::uint64_t seed) {
    auto t0 = Clock::now();
    Hamiltonian h = make_hamiltonian("it-count:" + fmtd(c), d);
    const std::size_t chains = std::max(1u, std::thread::hardware_concurrency());
    std::vector<BalanceAudit> audits(chains);
    parallel_for(chains, [&](std::size_t i) {
        audits[i] = audit_chain(d, h, split_key(seed_key(seed), kTagBalance, i).lo, jumps / chains);
    });
    std::map<std::size_t, LevelFlux> lv;
    std::uint64_t props = 0, acc = 0;
    double expAcc = 0;
    for (const auto& a : audits) {
        for (const auto& [k, f] : a.levels) {
            auto& t = lv[k];
            t.up += f.up;
            t.down += f.down;
            t.timeLow += f.timeLow;
            t.timeHigh += f.timeHigh;
        }
        props += a.birthProposals;
        acc += a.birthAccepted;
        expAcc += a.expectedBirthAcceptance;
    }
    const double lam = kIntensityTriple * d.volume;
    double worst = 0;
    std::ostringstream os;
    int tested = 0;
    for (const auto& [k, f] : lv) {
        if (f.up < 100 || f.down < 100) continue;
        ++tested;
        double ratio = std::log((f.up / f.timeLow) / (f.down / f.timeHigh));
        double ref = std::log(lam * std::exp(-c) / static_cast<double>(k + 1));
        double z = (ratio - ref) / std::sqrt(1.0 / f.up + 1.0 / f.down);
        double zf = (static_cast<double>(f.up) - static_cast<double>(f.down)) / std::sqrt(static_cast<double>(f.up + f.down));
        worst = std::max({worst, std::abs(z), std::abs(zf)});
        os << "k=" << k << " z=" << fmtd(z) << " flux_z=" << fmtd(zf) << "; ";
    }
    double pbar = props ? expAcc / static_cast<double>(props) : 0;
    double za = props ? (static_cast<double>(acc) - expAcc) / std::sqrt(std::max(1e-300, props * pbar * (1 - pbar))) : 0;
    if (pbar > 0 && pbar < 1) worst = std::max(worst, std::abs(za));
    os << "acceptance z=" << fmtd(za);
    TestReport r;
    r.name = "balance.detailed";
    r.samples = jumps;
    r.estimate = worst;
    r.reference = 0;
    r.tolerance = 3;
    r.provenance = "level kernel ratios vs lambda*exp(-c)/(k+1), level flux balance, Metropolis acceptance; max |z|";
    r.pass = tested > 0 && worst <= 3;
    r.detail = os.str() + " levels=" + std::to_string(tested);
    r.seconds = seconds_since(t0);
    return r;
}

namespace {

std::vector<TestReport> suite_prop1(std::uint64_t n, std::uint64_t seed) {
    return {check_i1(10, n, seed), check_i2(1, n, seed), check_i3(1, n, seed), check_i4(1, n, seed)};
}

Domain tetrahedron(double s) {
    std::vector<Halfspace> hs;
    for (Vec3 v : {Vec3{1, 1, 1}, Vec3{1, -1, -1}, Vec3{-1, 1, -1}, Vec3{-1, -1, 1}}) hs.push_back({normalized(v), s});
    return build_domain(hs);
}

Domain random_polytope(std::uint64_t seed, int k) {
    RngStream r(split_key(seed_key(seed), 0x9100));
    std::vector<Halfspace> hs;
    for (int i = 0; i < k; ++i) hs.push_back({uniform_sphere(r), 0.3 + 0.2 * r.uniform()});
    for (Vec3 v : {Vec3{1, 1, 1}, Vec3{1, -1, -1}, Vec3{-1, 1, -1}, Vec3{-1, -1, 1}}) hs.push_back({normalized(v), 0.8});
    return build_domain(hs);
}

std::vector<TestReport> suite_kappa(std::uint64_t samples, std::uint64_t seed) {
    std::vector<TestReport> out;
    out.push_back(check_kappa(make_box({0, 0, 0}, {1, 1, 1}), "unit-cube", samples, seed));
    out.back().reference = kappa(make_box({0, 0, 0}, {1, 1, 1}));
    out.push_back(check_kappa(make_box({0, 0, 0}, {0.5, 0.5, 0.5}), "cube-0.5", samples, seed));
    out.push_back(check_kappa(tetrahedron(0.5), "tetrahedron", samples, seed));
    out.push_back(check_kappa(make_box({0, 0, 0}, {1, 2, 0.5}), "box-1x2x0.5", samples, seed));
    out.push_back(check_kappa(random_polytope(seed, 10), "random-10", samples, seed));
    out.push_back(check_kappa(random_polytope(seed + 1, 16), "random-16", samples, seed));
    return out;
}

TestReport gram_agreement(std::uint64_t n, std::uint64_t seed) {
    auto t0 = Clock::now();
    std::vector<double> err(n);
    parallel_for(64, [&](std::size_t c) {
        RngStream r = replicate_stream(seed, kTagGram, c);
        for (std::uint64_t i = c; i < n; i += 64) {
            Vec2 m1, m2;
            do {
                Vec3 a = uniform_sphere(r), b = uniform_sphere(r);
                m1 = normalized(Vec2{a.x, a.y});
                m2 = normalized(Vec2{b.x, b.y});
            } while (std::abs(cross(m1, m2)) < 0.05);
            double s1 = (r.uniform() < 0.5 ? -1 : 1) * r.uniform(0.1, 10);
            double s2 = (r.uniform() < 0.5 ? -1 : 1) * r.uniform(0.1, 10);
            Vec2 v1 = m1 * s1, v2 = m2 * s2;
            Vec2 w = vertex_velocity(m1, v1, m2, v2);
            Vec2 g = vertex_velocity_gram(v1, v2);
            err[i] = norm(w - g) / std::max(1.0, norm(w));
        }
    });
    TestReport rep;
    rep.name = "kinematics.gram-vs-normal";
    rep.samples = n;
    rep.estimate = *std::max_element(err.begin(), err.end());
    rep.reference = 0;
    rep.tolerance = 1e-9;
    rep.provenance = "max relative difference of the two vertex-velocity solves";
    rep.pass = rep.estimate <= rep.tolerance;
    rep.seconds = seconds_since(t0);
    return rep;
}

std::vector<TestReport> ie_fraction(std::uint64_t draws, std::uint64_t seed, int pairs) {
    std::vector<TestReport> out(pairs);
    for (int p = 0; p < pairs; ++p) {
        auto t0 = Clock::now();
        RngStream r = replicate_stream(seed, kTagIeFraction, 1000 + p);
        Plane a, b;
        Vec3 dir;
        for (;;) {
            a = plane_through(Vec3{}, uniform_sphere(r));
            b = plane_through(Vec3{}, uniform_sphere(r));
            dir = cross(a.u, b.u);
            if (norm(dir) > 0.2 && std::abs(normalized(dir).x) > 0.2 && std::abs(a.u.x) < 0.95 && std::abs(b.u.x) < 0.95)
                break;
        }
        dir = normalized(dir);
        if (dir.x < 0) dir = -dir;
        auto ea = section_of(a, 0), eb = section_of(b, 0);
        Vec2 sa = ea.direction * (r.uniform() < 0.5 ? -1.0 : 1.0);
        Vec2 sb = eb.direction * (r.uniform() < 0.5 ? -1.0 : 1.0);
        double ang = wedge_angle_sections(dir, Vec3{0, sa.x, sa.y}, Vec3{0, sb.x, sb.y});
        const std::size_t chunks = 64;
        std::vector<double> frac(chunks);
        parallel_for(chunks, [&](std::size_t c) {
            RngStream rc = replicate_stream(seed, kTagIeFraction, p * 100000 + c);
            std::uint64_t stable = 0, n = draws / chunks;
            EdgeMotion e1{ea.normal, ea.velocity}, e2{eb.normal, eb.velocity};
            for (std::uint64_t i = 0; i < n; ++i) {
                Vec3 nn = sample_line_normal(dir, rc);
                auto ec = section_of(plane_through(Vec3{}, nn), 0);
                stable += stable_ie(e1, sa, e2, sb, EdgeMotion{ec.normal, ec.velocity});
            }
            frac[c] = static_cast<double>(stable) / static_cast<double>(n);
        });
        Moments m = moments(frac);
        TestReport& rep = out[p];
        rep.name = "kinematics.ie-fraction-" + std::to_string(p);
        rep.samples = (draws / chunks) * chunks;
        rep.estimate = m.mean;
        rep.se = std::sqrt(m.var / chunks);
        rep.reference = (2 * kPi - ang) / (2 * kPi);
        rep.provenance = "(2pi - wedge angle)/(2pi)";
        rep.tolerance = 3 * rep.se;
        rep.pass = std::abs(rep.estimate - rep.reference) <= rep.tolerance;
        rep.detail = "angle=" + fmtd(ang);
        rep.seconds = seconds_since(t0);
    }
    return out;
}

std::vector<TestReport> octants(std::uint64_t n, std::uint64_t seed) {
    std::vector<int> itCount(n), iaCount(n);
    auto t0 = Clock::now();
    parallel_for(64, [&](std::size_t c) {
        RngStream r = replicate_stream(seed, kTagOctant, c);
        for (std::uint64_t i = c; i < n; i += 64) {
            auto count = [&](const VertexFrame& f, bool ia) {
                std::array<Vec3, 3> nv{f.n1, f.n2, f.n3};
                std::array<MultiEdge, 3> me;
                for (int k = 0; k < 3; ++k) me[k] = section_of(plane_through(Vec3{}, nv[k]), 0);
                int stable = 0;
                for (int s = 0; s < 8; ++s) {
                    std::array<EdgeMotion, 3> em;
                    for (int k = 0; k < 3; ++k) {
                        double sg = (s >> k) & 1 ? -1.0 : 1.0;
                        em[k] = EdgeMotion{me[k].normal * sg, me[k].velocity};
                    }
                    stable += ia ? stable_ia(em) : stable_it(em);
                }
                return stable;
            };
            itCount[i] = count(sample_vertex_frame(r), false);
            iaCount[i] = count(sample_vertex_frame_given(uniform_sphere(r), r), true);
        }
    });
    std::vector<TestReport> out;
    for (int ia = 0; ia < 2; ++ia) {
        const auto& v = ia ? iaCount : itCount;
        TestReport rep;
        rep.name = ia ? "kinematics.ia-unique-octant" : "kinematics.it-unique-octant";
        rep.samples = n;
        std::uint64_t bad = 0;
        for (int c : v) bad += c != 1;
        rep.estimate = static_cast<double>(bad);
        rep.reference = 0;
        rep.tolerance = 0;
        rep.provenance = "frames with a number of stable octants other than one";
        rep.pass = bad == 0;
        rep.seconds = seconds_since(t0);
        out.push_back(rep);
    }
    return out;
}

bool same_plane(const Plane& a, const Plane& b, double tol) {
    return (norm(a.u - b.u) < tol && std::abs(a.rho - b.rho) < tol) ||
           (norm(a.u + b.u) < tol && std::abs(a.rho + b.rho) < tol);
}

bool same_entries(const EntrySet& a, const EntrySet& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].kind != b[i].kind || std::abs(a[i].time - b[i].time) > kEpsGeom ||
            norm(a[i].location - b[i].location) > kEpsGeom || a[i].planes.size() != b[i].planes.size())
            return false;
        for (const auto& p : a[i].planes) {
            bool found = false;
            for (const auto& q : b[i].planes) found = found || same_plane(p, q, kEpsGeom);
            if (!found) return false;
        }
    }
    return true;
}

}  // namespace

EntryEvent find_stable_entry(const Domain& d, EntryKind kind, double s, std::uint64_t seed) {
    RngStream r = replicate_stream(seed, kTagEntrySearch, kind == EntryKind::IA ? 0 : 1);
    ResolveOptions opt;
    opt.spontaneousBirths = false;
    for (int it = 0; it < 10000; ++it) {
        EntryEvent e;
        e.kind = kind;
        e.time = s / 3;
        e.location = kind == EntryKind::IA ? Vec3{s / 3, 0, s / 2} : Vec3{s / 3, 0, 0};
        int np = kind == EntryKind::IA ? 2 : 1;
        for (int k = 0; k < np; ++k) e.planes.push_back(plane_through(e.location, uniform_sphere(r)));
        try {
            resolve(d, {e}, {}, opt);
            return e;
        } catch (const InputError&) {
        } catch (const DegeneracyError&) {
        }
    }
    throw DegeneracyError("no stable entry found");
}

namespace {

std::vector<TestReport> suite_structural(std::uint64_t n, std::uint64_t seed) {
    std::vector<TestReport> out;
    auto t0 = Clock::now();
    std::vector<Domain> domains{make_box({0, 0, 0}, {0.3, 0.3, 0.3}), make_box({0, 0, 0}, {0.5, 0.5, 0.5}),
                                transform_domain(make_box({0, 0, 0}, {0.5, 0.5, 0.5}), rotation(0.7, 0.4), {0.1, 0.2, 0.3}),
                                tetrahedron(0.25), random_polytope(seed, 8)};
    const std::size_t per = (n + domains.size() - 1) / domains.size();
    std::vector<std::string> bad(per * domains.size());
    std::vector<int> notDet(per * domains.size());
    parallel_for(per * domains.size(), [&](std::size_t i) {
        const Domain& d = domains[i / per];
        auto fs = simulate_field(d, {}, replicate_stream(seed, kTagStructural, i));
        auto rep = validate(fs.cfg, d);
        if (!rep.ok()) bad[i] = rep.summary();
        auto again = resolve(d, {}, fs.packages);
        auto twice = simulate_field(d, {}, replicate_stream(seed, kTagStructural, i));
        notDet[i] = serialize(again) != serialize(fs.cfg) || serialize(twice.cfg) != serialize(fs.cfg);
    });
    TestReport v;
    v.name = "structural.validate";
    v.samples = bad.size();
    for (const auto& b : bad) v.estimate += !b.empty();
    v.tolerance = 0;
    v.provenance = "simulate_field outputs failing P1-P6 validation, 5 domains";
    v.pass = v.estimate == 0;
    for (const auto& b : bad)
        if (!b.empty()) {
            v.detail = b.substr(0, 300);
            break;
        }
    v.seconds = seconds_since(t0);
    out.push_back(v);

    TestReport det;
    det.name = "structural.determinism";
    det.samples = notDet.size();
    for (int x : notDet) det.estimate += x;
    det.provenance = "runs whose re-resolution or rerun is not byte-identical";
    det.pass = det.estimate == 0;
    out.push_back(det);

    t0 = Clock::now();
    const double s = 0.3;
    Domain box = make_box({0, 0, 0}, {s, s, s});
    std::vector<EntrySet> sets{{}, {find_stable_entry(box, EntryKind::IA, s, seed)},
                               {find_stable_entry(box, EntryKind::IE, s, seed)}};
    const std::size_t runs = std::max<std::size_t>(1, n / 10);
    std::vector<int> fail(runs * sets.size());
    parallel_for(fail.size(), [&](std::size_t i) {
        const auto& e = sets[i / runs];
        auto fs = simulate_field(box, e, replicate_stream(seed, kTagStructural + 1, i));
        fail[i] = !same_entries(entry_events(fs.cfg, box), e) || !validate(fs.cfg, box).ok();
    });
    TestReport rt;
    rt.name = "structural.entry-roundtrip";
    rt.samples = fail.size();
    for (int x : fail) rt.estimate += x;
    rt.provenance = "runs where extracted entries differ from the supplied ones (empty, IA, IE)";
    rt.pass = rt.estimate == 0;
    rt.seconds = seconds_since(t0);
    out.push_back(rt);

    Domain ref = make_box({0, 0, 0}, {0.5, 0.5, 0.5});
    Domain rot = transform_domain(ref, rotation(0.7, 0.4), {0.1, 0.2, 0.3});
    out.push_back(check_isometry(ref, rot, std::max<std::uint64_t>(n, 200), seed));
    return out;
}

std::vector<TestReport> suite_balance(std::uint64_t jumps, std::uint64_t seed) {
    auto t0 = Clock::now();
    Domain d = make_box({0, 0, 0}, {0.3, 0.3, 0.3});
    ChainState a = init_chain(d, {}, seed), b = init_chain(d, {}, seed);
    Hamiltonian z = zero_hamiltonian();
    const std::uint64_t n = std::min<std::uint64_t>(jumps, 20000);
    std::uint64_t diff = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        bs_step(a, d);
        bs_h_step(b, d, z);
        diff += double_bits(a.s) != double_bits(b.s) || a.packages != b.packages || serialize(a.cfg) != serialize(b.cfg);
    }
    TestReport r;
    r.name = "balance.bs-zero-bitwise";
    r.samples = n;
    r.estimate = static_cast<double>(diff);
    r.provenance = "jumps where BS[0] and BS states differ bitwise";
    r.pass = diff == 0;
    r.seconds = seconds_since(t0);
    return {r, check_detailed_balance(make_box({0, 0, 0}, {0.4, 0.4, 0.4}), 0.25, jumps, seed)};
}

std::vector<TestReport> suite_equivalence(std::uint64_t fresh, std::uint64_t seed) {
    const double s = 0.3;
    Domain d = make_box({0, 0, 0}, {s, s, s});
    EquivalenceOptions o;
    o.freshDraws = fresh;
    o.chainSamples = fresh / 2;
    std::vector<TestReport> out;
    out.push_back(check_equivalence(d, {}, seed, o));
    out.back().name = "equivalence.empty-entries";
    EntrySet one{find_stable_entry(d, EntryKind::IA, s, seed)};
    out.push_back(check_equivalence(d, one, seed, o));
    out.back().name = "equivalence.ia-entry";
    EquivalenceOptions m = o;
    m.chainOptions.ieRateFactor = 2.0;
    TestReport mut = check_equivalence(d, {}, seed, m);
    mut.name = "equivalence.mutation-control";
    mut.provenance = "IE intensity x2 on the chain side; pass iff the equivalence test rejects";
    mut.pass = !mut.pass;
    out.push_back(mut);
    return out;
}

}  // namespace

std::vector<std::string> suite_names() {
    return {"prop1", "kappa", "empty", "partition", "equivalence", "structural", "kinematics", "balance"};
}

std::vector<TestReport> run_suite(const std::string& name, std::uint64_t replicates, std::uint64_t seed) {
    if (name == "prop1") return suite_prop1(replicates, seed);
    if (name == "kappa") return suite_kappa(replicates, seed);
    if (name == "empty") return {check_empty_probability(make_box({0, 0, 0}, {0.3, 0.3, 0.3}), replicates, seed)};
    if (name == "partition") {
        Domain d = make_box({0, 0, 0}, {0.1, 0.1, 0.1});
        return {check_partition_truncated(d, replicates, seed), check_stratum3(d, replicates, seed)};
    }
    if (name == "equivalence") return suite_equivalence(replicates, seed);
    if (name == "structural") return suite_structural(replicates, seed);
    if (name == "kinematics") {
        std::vector<TestReport> out{gram_agreement(replicates, seed)};
        for (auto& r : ie_fraction(replicates, seed, 3)) out.push_back(r);
        for (auto& r : octants(replicates, seed)) out.push_back(r);
        return out;
    }
    if (name == "balance") return suite_balance(replicates, seed);
    throw InputError("unknown suite '" + name + "'");
}

}  // namespace pmf
