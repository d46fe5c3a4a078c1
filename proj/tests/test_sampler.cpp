#include <doctest.h>

#include <cmath>
#include <limits>

#include "pmf/sampler.hpp"
#include "pmf/stochgeom.hpp"
#include "pmf/verify.hpp"

using namespace pmf;

TEST_CASE("first jump from an empty state is a birth") {
    Domain d = make_box({0, 0, 0}, {0.3, 0.3, 0.3});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ChainState st = init_chain(d, {}, seed);
        CHECK(st.cfg.empty());
        JumpInfo j = bs_step(st, d);
        CHECK(j.birth);
        CHECK(j.accepted);
        CHECK(st.packages.size() == 1);
        CHECK(st.s == j.hold);
    }
}

TEST_CASE("holding times and the stationary package count") {
    Domain d = make_box({0, 0, 0}, {0.3, 0.3, 0.3});
    const double lam = kIntensityTriple * d.volume;
    ChainState st = init_chain(d, {}, 12);
    std::map<std::size_t, std::pair<double, int>> hold;
    const int n = 100000, batches = 50;
    std::vector<double> batchMean;
    double area = 0, weight = 0;
    for (int i = 0; i < n; ++i) {
        JumpInfo j = bs_step(st, d);
        hold[j.countBefore].first += j.hold;
        ++hold[j.countBefore].second;
        area += j.hold * static_cast<double>(j.countBefore);
        weight += j.hold;
        if ((i + 1) % (n / batches) == 0) {
            batchMean.push_back(area / weight);
            area = weight = 0;
        }
    }
    for (const auto& [k, h] : hold) {
        if (h.second < 1000) continue;
        double mean = h.first / h.second, want = 1.0 / (lam + static_cast<double>(k));
        CHECK(std::abs(mean - want) <= 3 * want / std::sqrt(h.second));
    }
    double m = 0, v = 0;
    for (double b : batchMean) m += b;
    m /= batches;
    for (double b : batchMean) v += (b - m) * (b - m);
    v /= batches - 1;
    CHECK(std::abs(m - lam) <= 3 * std::sqrt(v / batches));
}

TEST_CASE("zero Hamiltonian reproduces the plain chain bit for bit") {
    Domain d = make_box({0, 0, 0}, {0.4, 0.4, 0.4});
    ChainState a = init_chain(d, {}, 5), b = init_chain(d, {}, 5);
    Hamiltonian z = make_hamiltonian("zero", d);
    for (int i = 0; i < 3000; ++i) {
        JumpInfo ja = bs_step(a, d);
        JumpInfo jb = bs_h_step(b, d, z);
        CHECK(jb.accepted == ja.accepted);
        REQUIRE(double_bits(a.s) == double_bits(b.s));
        REQUIRE(a.packages == b.packages);
        REQUIRE(serialize(a.cfg) == serialize(b.cfg));
    }
}

TEST_CASE("area Hamiltonian acceptance is exp(-beta dArea)") {
    Domain d = make_box({0, 0, 0}, {0.4, 0.4, 0.4});
    Hamiltonian h = make_hamiltonian("area:1", d);
    ChainState st = init_chain(d, {}, 8);
    st.h = h(st.cfg);
    int checked = 0;
    for (int i = 0; i < 3000; ++i) {
        double before = stats(st.cfg).totalArea;
        JumpInfo j = bs_h_step(st, d, h);
        if (j.birth && j.accepted) {
            CHECK(j.deltaH == doctest::Approx(stats(st.cfg).totalArea - before));
            ++checked;
        }
    }
    CHECK(checked > 0);

    BalanceAudit a = audit_chain(d, h, 9, 20000);
    double p = a.expectedBirthAcceptance / static_cast<double>(a.birthProposals);
    CHECK(p < 1);
    CHECK(std::abs(static_cast<double>(a.birthAccepted) - a.expectedBirthAcceptance) <=
          3 * std::sqrt(static_cast<double>(a.birthProposals) * p * (1 - p)));
}

TEST_CASE("detailed-balance audit on a small domain") {
    TestReport r = check_detailed_balance(make_box({0, 0, 0}, {0.4, 0.4, 0.4}), 0.25, 40000, 3);
    CHECK_MESSAGE(r.pass, r.detail);
}

TEST_CASE("run_chain observations") {
    Domain d = make_box({0, 0, 0}, {0.3, 0.3, 0.3});
    ChainOptions o;
    o.sMax = 0;
    auto obs = run_chain(d, {}, 1, o);
    REQUIRE(obs.size() == 1);
    CHECK(obs[0].s == 0);

    o.sMax = 40;
    o.thin = 5;
    o.burnIn = 10;
    o.keepConfigs = true;
    auto a = run_chain(d, {}, 2, o), b = run_chain(d, {}, 2, o);
    REQUIRE(a.size() == 7);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].s == doctest::Approx(10 + 5.0 * i));
        CHECK(a[i].serialized == b[i].serialized);
    }
    o.thin = 0;
    CHECK_THROWS_AS(run_chain(d, {}, 2, o), InputError);
}

TEST_CASE("Hamiltonian parsing and evaluation") {
    Domain d = make_box({0, 0, 0}, {0.3, 0.3, 0.3});
    CHECK_THROWS_AS(make_hamiltonian("nope", d), InputError);
    CHECK_THROWS_AS(make_hamiltonian("area:x", d), InputError);
    CHECK_THROWS_AS(make_hamiltonian("area:-1", d), InputError);
    CHECK_THROWS_AS(make_hamiltonian("volume-clamp:1", d), InputError);
    CHECK_THROWS_AS(make_hamiltonian("zero:1", d), InputError);

    Hamiltonian vc = make_hamiltonian("volume-clamp:10,1", d);
    CHECK(vc(PolyConfig{}) == 0);
    auto fs = simulate_field(make_box({0, 0, 0}, {1, 1, 1}), {}, RngStream(seed_key(3)));
    double cap = 10 * d.volume + 1;
    CHECK(vc(fs.cfg) == doctest::Approx(-std::min(cap, static_cast<double>(fs.cfg.faces.size()))));

    Hamiltonian bad{"bad", [](const PolyConfig&) { return std::numeric_limits<double>::quiet_NaN(); }, 0, 0};
    CHECK_THROWS_AS(bad(PolyConfig{}), HamiltonianError);
}

TEST_CASE("partition function of a bounded Hamiltonian is finite and positive") {
    Domain d = make_box({0, 0, 0}, {0.4, 0.4, 0.4});
    Hamiltonian h = make_hamiltonian("volume-clamp:5,1", d);
    ChainState st = init_chain(d, {}, 4);
    double z = 0, w = 0;
    for (int i = 0; i < 5000; ++i) {
        JumpInfo j = bs_step(st, d);
        z += j.hold * std::exp(-h(st.cfg));
        w += j.hold;
    }
    CHECK(std::isfinite(z / w));
    CHECK(z / w > 0);
}
