#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmf/evolution.hpp"
#include "pmf/mesh.hpp"
#include "pmf/sampler.hpp"
#include "pmf/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pmf;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string mode;
    std::string domainSpec;
    std::optional<Domain> domain;
    std::optional<std::uint64_t> seed;
    std::string entriesPath = "empty";
    EntrySet entries;
    std::string hamiltonian = "zero";
    double sMax = 100;
    double thin = 1;
    double burnIn = 0;
    std::uint64_t replicates = 0;
    std::string suite;
    std::string out = ".";
    std::string input;
    bool obj = false;
    bool keepConfigs = false;

    json to_json() const {
        json j;
        j["mode"] = mode;
        j["domain"] = domainSpec;
        j["seed"] = seed ? *seed : 0;
        j["entries"] = entriesPath;
        j["hamiltonian"] = hamiltonian;
        j["s_max"] = sMax;
        j["thin"] = thin;
        j["burn_in"] = burnIn;
        j["replicates"] = replicates;
        j["suite"] = suite;
        j["out"] = out;
        j["input"] = input;
        j["obj"] = obj;
        j["keep_configs"] = keepConfigs;
        return j;
    }
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<double> numbers(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    std::vector<double> v;
    std::string w;
    while (in >> w) {
        char* end = nullptr;
        double x = std::strtod(w.c_str(), &end);
        if (end == w.c_str() || *end || !std::isfinite(x)) throw InputError("key '" + key + "': bad number '" + w + "'");
        v.push_back(x);
    }
    return v;
}

double real_value(const std::string& key, const std::string& text) {
    auto v = numbers(key, text);
    if (v.size() != 1) throw InputError("key '" + key + "': expected one number");
    return v[0];
}

std::uint64_t uint_value(const std::string& key, const std::string& text) {
    std::size_t pos = 0;
    std::uint64_t v = 0;
    try {
        if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
        v = std::stoull(text, &pos, 0);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != text.size()) throw InputError("key '" + key + "': expected a non-negative integer, got '" + text + "'");
    return v;
}

bool bool_value(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw InputError("key '" + key + "': expected true or false");
}

Domain parse_domain(const std::string& spec) {
    std::istringstream in(spec);
    std::string kind;
    in >> kind;
    std::string rest;
    std::getline(in, rest);
    if (kind == "box") {
        auto v = numbers("domain", rest);
        if (v.size() != 6) throw InputError("key 'domain': box needs 6 numbers t0 y0 z0 t1 y1 z1");
        if (!(v[3] > v[0] && v[4] > v[1] && v[5] > v[2])) throw InputError("key 'domain': box needs lo < hi");
        return make_box({v[0], v[1], v[2]}, {v[3], v[4], v[5]});
    }
    if (kind == "halfspaces") {
        std::vector<Halfspace> hs;
        std::istringstream parts(rest);
        std::string part;
        while (std::getline(parts, part, ';')) {
            if (trim(part).empty()) continue;
            auto v = numbers("domain", part);
            if (v.size() != 4) throw InputError("key 'domain': each halfspace needs nt ny nz b");
            Vec3 n{v[0], v[1], v[2]};
            double len = norm(n);
            if (!(len > 0)) throw InputError("key 'domain': zero halfspace normal");
            hs.push_back({n / len, v[3] / len});
        }
        try {
            return build_domain(hs);
        } catch (const std::exception& e) {
            throw InputError(std::string("key 'domain': ") + e.what());
        }
    }
    throw InputError("key 'domain': expected 'box ...' or 'halfspaces ...'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "mode") c.mode = value;
    else if (key == "domain") c.domainSpec = value;
    else if (key == "seed") c.seed = uint_value(key, value);
    else if (key == "entries") c.entriesPath = value;
    else if (key == "hamiltonian") c.hamiltonian = value;
    else if (key == "s_max") c.sMax = real_value(key, value);
    else if (key == "thin") c.thin = real_value(key, value);
    else if (key == "burn_in") c.burnIn = real_value(key, value);
    else if (key == "replicates") c.replicates = uint_value(key, value);
    else if (key == "suite") c.suite = value;
    else if (key == "out") c.out = value;
    else if (key == "input") c.input = value;
    else if (key == "obj") c.obj = bool_value(key, value);
    else if (key == "keep_configs") c.keepConfigs = bool_value(key, value);
    else throw InputError("unknown key '" + key + "'");
}

void parse_config_text(RunConfig& c, const std::string& text, const std::string& path) {
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(path + ":" + std::to_string(lineNo) + ": expected key = value");
        apply_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::uint64_t default_replicates(const std::string& suite) {
    static const std::map<std::string, std::uint64_t> d{
        {"prop1", 10000},      {"kappa", 10000000},     {"empty", 10000},      {"partition", 1000000},
        {"equivalence", 10000}, {"structural", 1000}, {"kinematics", 1000000}, {"balance", 1000000}};
    auto it = d.find(suite);
    return it == d.end() ? 1 : it->second;
}

void finalize(RunConfig& c) {
    static const std::vector<std::string> modes{"sample", "chain", "verify", "export"};
    if (std::find(modes.begin(), modes.end(), c.mode) == modes.end())
        throw InputError("key 'mode': expected sample, chain, verify or export");
    if (!c.seed) throw InputError("key 'seed': a seed is required");
    if (!(c.thin > 0)) throw InputError("key 'thin': must be > 0");
    if (c.sMax < 0) throw InputError("key 's_max': must be >= 0");
    if (c.burnIn < 0) throw InputError("key 'burn_in': must be >= 0");
    if (c.mode == "verify") {
        auto names = suite_names();
        if (std::find(names.begin(), names.end(), c.suite) == names.end())
            throw InputError("key 'suite': unknown suite '" + c.suite + "'");
        if (c.replicates == 0) c.replicates = default_replicates(c.suite);
        return;
    }
    if (c.replicates == 0) c.replicates = 1;
    if (c.mode == "export" && !c.input.empty()) return;
    if (c.domainSpec.empty()) throw InputError("key 'domain': required for mode " + c.mode);
    c.domain = parse_domain(c.domainSpec);
    if (c.entriesPath != "empty") {
        try {
            c.entries = deserialize_entries(read_file(c.entriesPath));
        } catch (const InputError& e) {
            throw InputError("key 'entries': '" + c.entriesPath + "': " + e.what());
        }
    }
    if (c.mode == "chain") make_hamiltonian(c.hamiltonian, *c.domain);
}

std::vector<std::string> provenance(const RunConfig& c) {
    return {std::string("pmf ") + PMF_VERSION, "run-config " + c.to_json().dump()};
}

std::string with_comments(const std::vector<std::string>& lines, const std::string& body) {
    std::string out;
    for (const auto& l : lines) out += "# " + l + "\n";
    return out + body;
}

json header_record(const RunConfig& c) {
    return json{{"record", "run"}, {"version", PMF_VERSION}, {"config", c.to_json()}};
}

json stats_json(const PolyConfig& cfg, const Domain* d) {
    Stats s = stats(cfg);
    json j{{"faceCount", s.faceCount},
           {"internalEdgeCount", s.internalEdgeCount},
           {"boundaryEdgeCount", s.boundaryEdgeCount},
           {"vertexCount", s.vertexCount},
           {"internalVertexCount", s.internalVertexCount},
           {"totalArea", s.totalArea},
           {"totalEdgeLength", s.totalEdgeLength}};
    if (d) j["energy"] = energy(cfg, *d);
    return j;
}

RngStream replicate_rng(std::uint64_t seed, std::uint64_t i) { return RngStream(split_key(seed_key(seed), 0xc11, i)); }

int cmd_sample(const RunConfig& c) {
    const Domain& d = *c.domain;
    std::vector<PolyConfig> cfgs(c.replicates);
    parallel_for(c.replicates, [&](std::size_t i) { cfgs[i] = simulate_field(d, c.entries, replicate_rng(*c.seed, i)).cfg; });
    fs::path out(c.out);
    std::string lines = header_record(c).dump() + "\n";
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        json j = stats_json(cfgs[i], &d);
        j["record"] = "sample";
        j["replicate"] = i;
        lines += j.dump() + "\n";
        std::string stem = "sample_" + std::to_string(i);
        write_file(out / (stem + ".pmf"), with_comments(provenance(c), serialize(cfgs[i])));
        if (c.obj) write_file(out / (stem + ".obj"), write_obj(build_mesh(cfgs[i]), provenance(c)));
    }
    write_file(out / "stats.jsonl", lines);
    return 0;
}

int cmd_chain(const RunConfig& c) {
    const Domain& d = *c.domain;
    ChainOptions o;
    o.sMax = c.sMax;
    o.thin = c.thin;
    o.burnIn = c.burnIn;
    o.keepConfigs = c.keepConfigs;
    o.hamiltonian = make_hamiltonian(c.hamiltonian, d);
    std::vector<std::vector<Observation>> runs(c.replicates);
    parallel_for(c.replicates, [&](std::size_t i) {
        std::uint64_t s = c.replicates == 1 ? *c.seed : split_key(seed_key(*c.seed), 0xc12, i).lo;
        runs[i] = run_chain(d, c.entries, s, o);
    });
    fs::path out(c.out);
    std::string lines = header_record(c).dump() + "\n";
    std::string configs;
    for (std::size_t i = 0; i < runs.size(); ++i)
        for (std::size_t k = 0; k < runs[i].size(); ++k) {
            const auto& ob = runs[i][k];
            json j{{"record", "observation"},
                   {"chain", i},
                   {"s", ob.s},
                   {"faceCount", ob.stats.faceCount},
                   {"internalEdgeCount", ob.stats.internalEdgeCount},
                   {"boundaryEdgeCount", ob.stats.boundaryEdgeCount},
                   {"vertexCount", ob.stats.vertexCount},
                   {"internalVertexCount", ob.stats.internalVertexCount},
                   {"totalArea", ob.stats.totalArea},
                   {"totalEdgeLength", ob.stats.totalEdgeLength}};
            lines += j.dump() + "\n";
            if (c.keepConfigs)
                write_file(out / ("chain_" + std::to_string(i) + "_" + std::to_string(k) + ".pmf"),
                           with_comments(provenance(c), ob.serialized));
        }
    write_file(out / "chain.jsonl", lines);
    return 0;
}

int cmd_verify(const RunConfig& c) {
    auto reports = run_suite(c.suite, c.replicates, *c.seed);
    std::string lines = header_record(c).dump() + "\n";
    bool ok = true;
    for (const auto& r : reports) {
        lines += to_json(r) + "\n";
        ok = ok && r.pass;
    }
    std::string table = summary_table(reports);
    std::cout << table;
    fs::path out(c.out);
    write_file(out / ("verify_" + c.suite + ".jsonl"), lines);
    write_file(out / ("verify_" + c.suite + ".txt"), with_comments(provenance(c), table));
    return ok ? 0 : 1;
}

int cmd_export(const RunConfig& c) {
    PolyConfig cfg;
    if (!c.input.empty()) {
        try {
            cfg = deserialize(read_file(c.input));
        } catch (const InputError& e) {
            throw InputError("key 'input': '" + c.input + "': " + e.what());
        }
    } else {
        cfg = simulate_field(*c.domain, c.entries, replicate_rng(*c.seed, 0)).cfg;
    }
    write_file(fs::path(c.out) / "mesh.obj", write_obj(build_mesh(cfg), provenance(c)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polygonal Markov field sampler"};
    app.set_version_flag("--version", std::string(PMF_VERSION));
    std::string mode, configPath, suite, out, hamiltonian;
    std::string seedText, replicatesText, sMaxText, thinText;
    app.add_option("mode", mode, "sample | chain | verify | export (overrides the config key 'mode')");
    app.add_option("--config", configPath, "configuration file (key = value lines)");
    app.add_option("--seed", seedText, "64-bit seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--suite", suite, "verification suite");
    app.add_option("--replicates", replicatesText, "replicates / draws");
    app.add_option("--s-max", sMaxText, "chain s-time horizon");
    app.add_option("--thin", thinText, "chain thinning interval in s-time");
    app.add_option("--hamiltonian", hamiltonian, "NAME[:params]");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    RunConfig c;
    try {
        if (!configPath.empty()) parse_config_text(c, read_file(configPath), configPath);
        if (!mode.empty()) c.mode = mode;
        if (!seedText.empty()) apply_key(c, "seed", seedText);
        if (!out.empty()) c.out = out;
        if (!suite.empty()) c.suite = suite;
        if (!replicatesText.empty()) apply_key(c, "replicates", replicatesText);
        if (!sMaxText.empty()) apply_key(c, "s_max", sMaxText);
        if (!thinText.empty()) apply_key(c, "thin", thinText);
        if (!hamiltonian.empty()) c.hamiltonian = hamiltonian;
        finalize(c);
        std::error_code ec;
        fs::create_directories(c.out, ec);
        if (ec) throw IoError("cannot create output directory '" + c.out + "': " + ec.message());
        if (c.mode == "sample") return cmd_sample(c);
        if (c.mode == "chain") return cmd_chain(c);
        if (c.mode == "verify") return cmd_verify(c);
        return cmd_export(c);
    } catch (const InputError& e) {
        std::fprintf(stderr, "pmf: input error: %s\n", e.what());
        return 2;
    } catch (const HamiltonianError& e) {
        std::fprintf(stderr, "pmf: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "pmf: i/o error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pmf: error: %s\n", e.what());
        return 4;
    }
}
