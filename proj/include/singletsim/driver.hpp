#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "singletsim/analytics.hpp"

namespace singletsim::driver {

// Configuration problem: exit code 1, message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double start = -1.0;
    double stop = 1.0;
    unsigned points = 21;
};

struct ExperimentConfig {
    std::string command;
    Protocol protocol = Protocol::two_instance_sampled;
    UnitVector3 a = z_axis();
    UnitVector3 b = x_axis();
    ChshSettings chsh = chsh_optimal_settings();
    std::string chsh_preset = "optimal";            // "" when explicit vectors were given
    std::optional<Protocol> source = std::nullopt;  // nullopt = analytic
    std::uint64_t runs = 1'000'000;
    std::uint64_t seed = 0;
    std::string out;
    GridSpec grid;
    bool dump_hidden = false;
    unsigned partitions = 1;
};

inline UnitVector3 parse_vector3(const std::string& text, const std::string& field) {
    std::array<double, 3> c{};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        std::size_t next = i < 2 ? text.find(',', pos) : std::string::npos;
        const std::string tok =
            next == std::string::npos ? text.substr(pos) : text.substr(pos, next - pos);
        try {
            std::size_t used = 0;
            c[i] = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(field + ": expected three comma-separated numbers, got '" + text +
                              "'");
        }
        if (i < 2) {
            if (next == std::string::npos)
                throw ConfigError(field + ": expected three comma-separated numbers, got '" +
                                  text + "'");
            pos = next + 1;
        }
    }
    try {
        return UnitVector3(c[0], c[1], c[2]);
    } catch (const std::invalid_argument&) {
        throw ConfigError(field + ": zero vector");
    }
}

inline GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    unsigned long points = 0;
    const auto c1 = text.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ConfigError("grid: expected start:stop:points, got '" + text + "'");
    try {
        g.start = std::stod(text.substr(0, c1));
        g.stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        points = std::stoul(text.substr(c2 + 1));
    } catch (const std::exception&) {
        throw ConfigError("grid: expected start:stop:points, got '" + text + "'");
    }
    if (points < 2) throw ConfigError("grid: needs at least 2 points");
    if (g.start < -1.0 || g.stop > 1.0 || g.start > g.stop)
        throw ConfigError("grid: range must satisfy -1 <= start <= stop <= 1");
    g.points = static_cast<unsigned>(points);
    return g;
}

namespace detail {

inline UnitVector3 json_vector3(const nlohmann::json& v, const std::string& field) {
    if (v.is_string()) return parse_vector3(v.get<std::string>(), field);
    if (v.is_array() && v.size() == 3 && v[0].is_number() && v[1].is_number() && v[2].is_number()) {
        try {
            return UnitVector3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
        } catch (const std::invalid_argument&) {
            throw ConfigError(field + ": zero vector");
        }
    }
    throw ConfigError(field + ": expected an array of three numbers");
}

}  // namespace detail

// Apply a JSON config file. Unknown keys are rejected; command-line flags
// override whatever the file sets.
inline void apply_config_json(ExperimentConfig& cfg, const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config: malformed JSON");
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    for (const auto& [key, value] : j.items()) {
        if (key == "protocol") {
            const auto p = parse_protocol(value.get<std::string>());
            if (!p) throw ConfigError("protocol: unknown protocol '" + value.get<std::string>() + "'");
            cfg.protocol = *p;
        } else if (key == "a") {
            cfg.a = detail::json_vector3(value, "a");
        } else if (key == "b") {
            cfg.b = detail::json_vector3(value, "b");
        } else if (key == "a_prime") {
            cfg.chsh.a_prime = detail::json_vector3(value, "a_prime");
            cfg.chsh_preset.clear();
        } else if (key == "b_prime") {
            cfg.chsh.b_prime = detail::json_vector3(value, "b_prime");
            cfg.chsh_preset.clear();
        } else if (key == "runs") {
            if (!value.is_number_unsigned() || value.get<std::uint64_t>() < 1)
                throw ConfigError("runs: must be a positive integer");
            cfg.runs = value.get<std::uint64_t>();
        } else if (key == "seed") {
            if (!value.is_number_unsigned()) throw ConfigError("seed: must be a non-negative integer");
            cfg.seed = value.get<std::uint64_t>();
        } else if (key == "out") {
            cfg.out = value.get<std::string>();
        } else if (key == "preset") {
            cfg.chsh_preset = value.get<std::string>();
        } else if (key == "source") {
            const std::string s = value.get<std::string>();
            if (s == "analytic") {
                cfg.source = std::nullopt;
            } else {
                const auto p = parse_protocol(s);
                if (!p) throw ConfigError("source: expected 'analytic' or a protocol name, got '" + s + "'");
                cfg.source = p;
            }
        } else if (key == "grid") {
            cfg.grid = parse_grid(value.get<std::string>());
        } else if (key == "dump_hidden") {
            if (!value.is_boolean()) throw ConfigError("dump_hidden: must be a boolean");
            cfg.dump_hidden = value.get<bool>();
        } else if (key == "partitions") {
            if (!value.is_number_unsigned() || value.get<unsigned>() < 1)
                throw ConfigError("partitions: must be a positive integer");
            cfg.partitions = value.get<unsigned>();
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
}

struct ParseOutcome {
    std::optional<ExperimentConfig> config;
    int exit_code = 0;
    std::string message;  // error text, or help text for --help
};

// Parse a full command line (without the program name). Precedence:
// defaults < config file < flags.
inline ParseOutcome parse_command_line(const std::vector<std::string>& args) {
    CLI::App app{"Classical simulations of two-qubit singlet measurement statistics"};
    app.require_subcommand(1);

    struct Raw {
        std::string protocol, a, b, a_prime, b_prime, out, config, preset, source, grid;
        std::uint64_t runs = 0, seed = 0;
        unsigned partitions = 1;
        bool dump_hidden = false;
    } raw;

    std::vector<CLI::App*> subs;
    for (const char* name : {"simulate", "chsh", "verify", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--protocol", raw.protocol,
                        "toner-bacon | two-instance-sampled | two-instance-counted | dh-exact");
        sub->add_option("--a", raw.a, "Alice setting, x,y,z");
        sub->add_option("--b", raw.b, "Bob setting, x,y,z");
        sub->add_option("--a-prime", raw.a_prime, "Alice alternate setting (chsh)");
        sub->add_option("--b-prime", raw.b_prime, "Bob alternate setting (chsh)");
        sub->add_option("--runs", raw.runs, "number of protocol runs");
        sub->add_option("--seed", raw.seed, "master seed");
        sub->add_option("--out", raw.out, "output base path");
        sub->add_option("--config", raw.config, "JSON config file");
        sub->add_option("--preset", raw.preset, "chsh settings preset (optimal)");
        sub->add_option("--source", raw.source, "chsh source: analytic or a protocol name");
        sub->add_option("--grid", raw.grid, "sweep grid over a.b, start:stop:points");
        sub->add_flag("--dump-hidden", raw.dump_hidden, "include x0,x1 columns in the CSV");
        sub->add_option("--partitions", raw.partitions, "parallel partitions (output-invariant)");
        subs.push_back(sub);
    }

    std::vector<const char*> argv;
    argv.push_back("singletsim");
    for (const auto& s : args) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        return {std::nullopt, 0, app.help()};
    } catch (const CLI::ParseError& e) {
        return {std::nullopt, 1, e.what()};
    }

    CLI::App* sub = nullptr;
    for (CLI::App* s : subs)
        if (s->parsed()) sub = s;

    try {
        ExperimentConfig cfg;
        cfg.command = sub->get_name();

        if (sub->count("--config")) {
            std::ifstream in(raw.config);
            if (!in) throw ConfigError("config: cannot read '" + raw.config + "'");
            std::ostringstream text;
            text << in.rdbuf();
            apply_config_json(cfg, text.str());
        }

        if (sub->count("--protocol")) {
            const auto p = parse_protocol(raw.protocol);
            if (!p) throw ConfigError("protocol: unknown protocol '" + raw.protocol + "'");
            cfg.protocol = *p;
        }
        if (sub->count("--a")) cfg.a = parse_vector3(raw.a, "a");
        if (sub->count("--b")) cfg.b = parse_vector3(raw.b, "b");
        if (sub->count("--a-prime")) {
            cfg.chsh.a_prime = parse_vector3(raw.a_prime, "a-prime");
            cfg.chsh_preset.clear();
        }
        if (sub->count("--b-prime")) {
            cfg.chsh.b_prime = parse_vector3(raw.b_prime, "b-prime");
            cfg.chsh_preset.clear();
        }
        if (sub->count("--runs")) {
            if (raw.runs < 1) throw ConfigError("runs: must be >= 1");
            cfg.runs = raw.runs;
        }
        if (sub->count("--seed")) cfg.seed = raw.seed;
        if (sub->count("--out")) cfg.out = raw.out;
        if (sub->count("--preset")) cfg.chsh_preset = raw.preset;
        if (sub->count("--source")) {
            if (raw.source == "analytic") {
                cfg.source = std::nullopt;
            } else {
                const auto p = parse_protocol(raw.source);
                if (!p)
                    throw ConfigError("source: expected 'analytic' or a protocol name, got '" +
                                      raw.source + "'");
                cfg.source = p;
            }
        }
        if (sub->count("--grid")) cfg.grid = parse_grid(raw.grid);
        if (sub->count("--dump-hidden")) cfg.dump_hidden = true;
        if (sub->count("--partitions")) {
            if (raw.partitions < 1 || raw.partitions > 256)
                throw ConfigError("partitions: must be in [1, 256]");
            cfg.partitions = raw.partitions;
        }

        if (!cfg.chsh_preset.empty()) {
            if (cfg.chsh_preset != "optimal")
                throw ConfigError("preset: unknown preset '" + cfg.chsh_preset + "'");
            cfg.chsh = chsh_optimal_settings();
        } else {
            cfg.chsh.a = cfg.a;
            cfg.chsh.b = cfg.b;
        }

        return {cfg, 0, ""};
    } catch (const ConfigError& e) {
        return {std::nullopt, 1, e.what()};
    }
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline nlohmann::json vec_json(const UnitVector3& v) {
    return nlohmann::json::array({v.x(), v.y(), v.z()});
}

inline nlohmann::json ledger_json(const CommLedger& l) {
    return {{"bitsFromAlice", l.bits_from_alice},
            {"bitsFromBob", l.bits_from_bob},
            {"realParamsFromAlice", l.real_params_from_alice},
            {"realParamsFromBob", l.real_params_from_bob}};
}

inline nlohmann::json joint_json(const JointEstimate& est) {
    return {{"pp", est.frequency(Sign::plus(), Sign::plus())},
            {"pm", est.frequency(Sign::plus(), Sign::minus())},
            {"mp", est.frequency(Sign::minus(), Sign::plus())},
            {"mm", est.frequency(Sign::minus(), Sign::minus())}};
}

inline void append_hidden_columns(std::string& line, const SharedRandomness& sr) {
    for (const UnitVector3* v : {&sr.x0, &sr.x1}) {
        line += ',';
        line += fmt_double(v->x());
        line += ',';
        line += fmt_double(v->y());
        line += ',';
        line += fmt_double(v->z());
    }
}

}  // namespace detail

struct SimulateOutput {
    std::string csv;
    nlohmann::json summary;
};

// Per-run record CSV plus a JSON summary. Rows are emitted in run order
// whatever the partition count; the hidden shared vectors stay out of the
// CSV unless dump_hidden is set.
inline SimulateOutput run_simulate(const ExperimentConfig& cfg) {
    SimulateOutput out;

    if (cfg.protocol == Protocol::dh_exact) {
        // No per-run records exist; emit the exact four-cell table.
        const auto jw = deutsch_hayden::meeting_weights(cfg.a, cfg.b);
        out.csv = "sA,sB,weight\n";
        for (Sign sa : {Sign::plus(), Sign::minus()})
            for (Sign sb : {Sign::plus(), Sign::minus()}) {
                out.csv += std::to_string(sa.value()) + "," + std::to_string(sb.value()) + "," +
                           detail::fmt_double(jw.weight(sa, sb)) + "\n";
            }
        const JointEstimate est = estimate_joint(cfg.protocol, cfg.a, cfg.b, cfg.runs, cfg.seed);
        const auto corr = est.correlation();
        out.summary = {{"protocol", to_string(cfg.protocol)},
                       {"a", detail::vec_json(cfg.a)},
                       {"b", detail::vec_json(cfg.b)},
                       {"runs", cfg.runs},
                       {"seed", cfg.seed},
                       {"joint", detail::joint_json(est)},
                       {"corr", corr.value},
                       {"corr_stderr", corr.std_error},
                       {"ledger", detail::ledger_json(protocol_ledger(cfg.protocol))}};
        return out;
    }

    const bool single_world = cfg.protocol == Protocol::toner_bacon;
    const int entries_per_run = cfg.protocol == Protocol::two_instance_counted ? 2 : 1;

    struct Chunk {
        std::string csv;
        JointCounts counts;
    };

    auto produce = [&](std::uint64_t begin, std::uint64_t end) {
        Chunk chunk;
        chunk.counts.entries_per_run = entries_per_run;
        for (std::uint64_t i = begin; i < end; ++i) {
            RngStream rng = derive_substream(cfg.seed, i);
            const SharedRandomness sr = sample_shared_randomness(rng);
            std::string line = std::to_string(i);
            if (single_world) {
                const toner_bacon::Transcript t = toner_bacon::run(cfg.a, cfg.b, sr);
                ++chunk.counts.at(t.s_a, t.s_b);
                line += ',' + std::to_string(t.s_a.value());
                line += ',' + std::to_string(t.s_b.value());
                line += ',' + std::to_string(t.n_a.value());
            } else {
                const two_instance::AliceRecord ar = two_instance::alice(cfg.a, sr);
                const two_instance::BobRecord br = two_instance::bob(cfg.b, sr);
                const two_instance::PairedOutcomes po = two_instance::meeting(ar, br);
                const auto sample = select_instance_uniform(two_instance::to_instance_set(po), rng);
                if (entries_per_run == 2) {
                    ++chunk.counts.at(po.pair_plus.alice, po.pair_plus.bob);
                    ++chunk.counts.at(po.pair_minus.alice, po.pair_minus.bob);
                } else {
                    ++chunk.counts.at(sample.value.first, sample.value.second);
                }
                const Sign sampled_label = sample.instance_index == 0 ? Sign::plus() : Sign::minus();
                line += ',' + std::to_string(po.pair_plus.alice.value());
                line += ',' + std::to_string(po.pair_plus.bob.value());
                line += ',' + std::to_string(po.pair_minus.alice.value());
                line += ',' + std::to_string(po.pair_minus.bob.value());
                line += ',' + std::to_string(ar.message_bit().value());
                line += ',' + std::to_string(br.message_bit().value());
                line += ',' + std::to_string(po.swapped ? 1 : 0);
                line += ',' + std::to_string(sampled_label.value());
                line += ',' + std::to_string(sample.value.first.value());
                line += ',' + std::to_string(sample.value.second.value());
            }
            if (cfg.dump_hidden) detail::append_hidden_columns(line, sr);
            line += '\n';
            chunk.csv += line;
            ++chunk.counts.total_runs;
        }
        return chunk;
    };

    const char* hidden_header = ",x0_x,x0_y,x0_z,x1_x,x1_y,x1_z";
    out.csv = single_world
                  ? "run_index,sA,sB,nA"
                  : "run_index,sA_plus,sB_plus,sA_minus,sB_minus,nA,nB,swapped,sampled_instance,"
                    "sampled_sA,sampled_sB";
    if (cfg.dump_hidden) out.csv += hidden_header;
    out.csv += '\n';

    JointCounts counts;
    counts.entries_per_run = entries_per_run;
    const unsigned partitions = cfg.partitions == 0 ? 1 : cfg.partitions;
    if (partitions == 1) {
        Chunk c = produce(0, cfg.runs);
        out.csv += c.csv;
        counts = c.counts;
    } else {
        std::vector<std::future<Chunk>> futures;
        const std::uint64_t step = (cfg.runs + partitions - 1) / partitions;
        for (unsigned p = 0; p < partitions; ++p) {
            const std::uint64_t begin = std::min<std::uint64_t>(cfg.runs, p * step);
            const std::uint64_t end = std::min<std::uint64_t>(cfg.runs, begin + step);
            futures.push_back(std::async(std::launch::async, produce, begin, end));
        }
        for (auto& f : futures) {
            Chunk c = f.get();
            out.csv += c.csv;
            counts = merge_stats(counts, c.counts);
        }
    }

    JointEstimate est;
    est.protocol = cfg.protocol;
    est.counts = counts;
    est.n_runs = cfg.runs;
    est.seed = cfg.seed;
    for (Sign sa : {Sign::plus(), Sign::minus()})
        for (Sign sb : {Sign::plus(), Sign::minus()})
            est.freq[sa.index()][sb.index()] = counts.frequency(sa, sb);

    const auto corr = est.correlation();
    out.summary = {{"protocol", to_string(cfg.protocol)},
                   {"a", detail::vec_json(cfg.a)},
                   {"b", detail::vec_json(cfg.b)},
                   {"runs", cfg.runs},
                   {"seed", cfg.seed},
                   {"joint", detail::joint_json(est)},
                   {"corr", corr.value},
                   {"corr_stderr", corr.std_error},
                   {"ledger", detail::ledger_json(protocol_ledger(cfg.protocol))}};
    return out;
}

inline nlohmann::json run_chsh(const ExperimentConfig& cfg) {
    const ChshReport report = chsh(cfg.source, cfg.chsh, cfg.runs, cfg.seed, cfg.partitions);
    nlohmann::json corr = {
        {"ab", {{"value", report.correlations[0].value}, {"stderr", report.correlations[0].std_error}}},
        {"ab_prime",
         {{"value", report.correlations[1].value}, {"stderr", report.correlations[1].std_error}}},
        {"a_prime_b",
         {{"value", report.correlations[2].value}, {"stderr", report.correlations[2].std_error}}},
        {"a_prime_b_prime",
         {{"value", report.correlations[3].value}, {"stderr", report.correlations[3].std_error}}}};
    nlohmann::json j = {{"source", cfg.source ? to_string(*cfg.source) : "analytic"},
                        {"settings",
                         {{"a", detail::vec_json(cfg.chsh.a)},
                          {"a_prime", detail::vec_json(cfg.chsh.a_prime)},
                          {"b", detail::vec_json(cfg.chsh.b)},
                          {"b_prime", detail::vec_json(cfg.chsh.b_prime)}}},
                        {"runs", cfg.runs},
                        {"seed", cfg.seed},
                        {"chsh", report.s_value},
                        {"chsh_stderr", report.s_std_error},
                        {"correlations", corr}};
    if (!cfg.chsh_preset.empty()) j["preset"] = cfg.chsh_preset;
    if (cfg.source) j["ledger"] = detail::ledger_json(protocol_ledger(*cfg.source));
    return j;
}

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOutput {
    std::vector<VerifyCheck> checks;
    bool all_pass = true;

    std::string table() const {
        std::string t;
        for (const auto& c : checks) {
            t += c.pass ? "PASS  " : "FAIL  ";
            t += c.name;
            if (!c.detail.empty()) t += "  (" + c.detail + ")";
            t += '\n';
        }
        t += all_pass ? "verification: all checks passed\n" : "verification: FAILURES present\n";
        return t;
    }
};

// The library-level verification battery behind `singletsim verify`.
inline VerifyOutput run_verify(const ExperimentConfig& cfg) {
    VerifyOutput out;
    auto add = [&](std::string name, bool pass, std::string detail) {
        out.checks.push_back({std::move(name), pass, std::move(detail)});
        out.all_pass = out.all_pass && pass;
    };
    std::ostringstream detail;

    // Joint law and correlation against the analytic oracle, 5 random pairs.
    {
        bool joint_ok = true, corr_ok = true;
        double worst_joint = 0.0, worst_corr = 0.0;
        RngStream pair_rng(derive_seed(cfg.seed, 1), 0);
        for (int k = 0; k < 5; ++k) {
            const UnitVector3 a = sample_unit_vector(pair_rng);
            const UnitVector3 b = sample_unit_vector(pair_rng);
            const JointEstimate est = estimate_joint(cfg.protocol, a, b, cfg.runs,
                                                     derive_seed(cfg.seed, 100 + k), cfg.partitions);
            for (Sign sa : {Sign::plus(), Sign::minus()})
                for (Sign sb : {Sign::plus(), Sign::minus()}) {
                    const double p = analytic_joint(a, b, sa, sb);
                    const double tol = 5.0 * binomial_std_error(p, cfg.runs);
                    const double dev = std::abs(est.frequency(sa, sb) - p);
                    worst_joint = std::max(worst_joint, tol > 0 ? dev / tol : dev);
                    if (dev > tol && tol > 0.0) joint_ok = false;
                    if (tol == 0.0 && dev != 0.0) joint_ok = false;
                }
            const auto corr = est.correlation();
            const double e = analytic_corr(a, b);
            const double ctol =
                cfg.protocol == Protocol::dh_exact ? 1e-12 : 5.0 * corr.std_error;
            const double cdev = std::abs(corr.value - e);
            worst_corr = std::max(worst_corr, ctol > 0 ? cdev / ctol : cdev);
            if (cdev > ctol) corr_ok = false;
        }
        detail.str("");
        detail << "worst deviation " << worst_joint << " of tolerance";
        add("joint-law-oracle-agreement", joint_ok, detail.str());
        detail.str("");
        detail << "worst deviation " << worst_corr << " of tolerance";
        add("correlation-law", corr_ok, detail.str());
    }

    // Exact per-run equivalence between the two-instance pairing and the
    // single-world transcript.
    {
        const std::uint64_t mism = equivalence_audit(100'000, derive_seed(cfg.seed, 2));
        add("tb-equivalence", mism == 0, std::to_string(mism) + " mismatches in 100000 configs");
    }

    // Locality: structural invariance plus chi-square independence.
    {
        const LocalityReport lr =
            locality_audit(10'000, derive_seed(cfg.seed, 3), &singletsim::detail::honest_alice,
                           &singletsim::detail::honest_bob, std::min<std::uint64_t>(cfg.runs, 1'000'000));
        detail.str("");
        detail << lr.structural_failures << " structural failures in " << lr.structural_checks
               << " checks";
        add("locality-structural", lr.structural_failures == 0, detail.str());
        detail.str("");
        detail << "chi2 " << lr.chi_square << " < " << lr.chi_square_critical;
        add("locality-chi-square", lr.chi_square < lr.chi_square_critical, detail.str());
    }

    // No-signaling marginals for the Monte Carlo protocol and the exact law.
    {
        const JointEstimate est =
            estimate_joint(cfg.protocol == Protocol::dh_exact ? Protocol::two_instance_sampled
                                                              : cfg.protocol,
                           cfg.a, cfg.b, cfg.runs, derive_seed(cfg.seed, 4), cfg.partitions);
        const NoSignalingReport ns = no_signaling_check(est.counts);
        detail.str("");
        detail << "marginals " << ns.alice_marginal_plus << ", " << ns.bob_marginal_plus;
        add("no-signaling-mc", ns.pass, detail.str());

        const auto jw = deutsch_hayden::meeting_weights(cfg.a, cfg.b);
        const double dev = std::max(std::abs(jw.alice_marginal(Sign::plus()) - 0.5),
                                    std::abs(jw.bob_marginal(Sign::plus()) - 0.5));
        add("no-signaling-exact", dev <= 1e-12, "max deviation " + detail::fmt_double(dev));
    }

    // Half-sphere integral against its closed form at four alignments.
    {
        bool ok = true;
        double worst = 0.0;
        const std::array<double, 4> dots = {1.0, 0.5, 0.0, -1.0};
        RngStream rng(derive_seed(cfg.seed, 5), 0);
        for (std::size_t k = 0; k < dots.size(); ++k) {
            const double t = dots[k];
            const UnitVector3 a = z_axis();
            const UnitVector3 b(std::sqrt(std::max(0.0, 1.0 - t * t)), 0.0, t);
            RngStream sub = derive_substream(derive_seed(cfg.seed, 6), k);
            const McEstimate est = ks_halfsphere_integral_mc(a, b, cfg.runs, sub);
            const double expected = -(1.0 + t) / 2.0;
            const double dev = std::abs(est.value - expected);
            const double tol = 5.0 * est.std_error;
            worst = std::max(worst, tol > 0 ? dev / tol : dev);
            if (dev > tol) ok = false;
        }
        detail.str("");
        detail << "worst deviation " << worst << " of tolerance";
        add("ks-halfsphere-integral", ok, detail.str());
    }

    return out;
}

// One summary row per grid point of a.b; a is held at +z and b swept in the
// xz-plane.
inline std::string run_sweep_csv(const ExperimentConfig& cfg) {
    std::string csv = "a_dot_b,pp,pm,mp,mm,corr,corr_stderr,corr_exact\n";
    for (unsigned k = 0; k < cfg.grid.points; ++k) {
        const double t =
            cfg.grid.start + (cfg.grid.stop - cfg.grid.start) * static_cast<double>(k) /
                                 static_cast<double>(cfg.grid.points - 1);
        const UnitVector3 a = z_axis();
        const UnitVector3 b(std::sqrt(std::max(0.0, 1.0 - t * t)), 0.0, t);
        const JointEstimate est =
            estimate_joint(cfg.protocol, a, b, cfg.runs, derive_seed(cfg.seed, k), cfg.partitions);
        const auto corr = est.correlation();
        csv += detail::fmt_double(t);
        csv += ',' + detail::fmt_double(est.frequency(Sign::plus(), Sign::plus()));
        csv += ',' + detail::fmt_double(est.frequency(Sign::plus(), Sign::minus()));
        csv += ',' + detail::fmt_double(est.frequency(Sign::minus(), Sign::plus()));
        csv += ',' + detail::fmt_double(est.frequency(Sign::minus(), Sign::minus()));
        csv += ',' + detail::fmt_double(corr.value);
        csv += ',' + detail::fmt_double(corr.std_error);
        csv += ',' + detail::fmt_double(analytic_corr(a, b));
        csv += '\n';
    }
    return csv;
}

namespace detail {

inline bool write_file(const std::string& path, const std::string& content, std::ostream& err) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        err << "error: cannot open '" << path << "' for writing\n";
        return false;
    }
    f << content;
    if (!f) {
        err << "error: write to '" << path << "' failed\n";
        return false;
    }
    return true;
}

}  // namespace detail

// Exit codes: 0 success, 1 configuration or I/O error, 2 verification failure.
inline int execute(const ExperimentConfig& cfg, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    try {
        if (cfg.command == "simulate") {
            if (cfg.out.empty()) {
                err << "error: out: simulate requires --out BASEPATH\n";
                return 1;
            }
            const SimulateOutput so = run_simulate(cfg);
            if (!detail::write_file(cfg.out + ".csv", so.csv, err)) return 1;
            if (!detail::write_file(cfg.out + ".json", so.summary.dump(2) + "\n", err)) return 1;
            out << so.summary.dump(2) << '\n';
            return 0;
        }
        if (cfg.command == "chsh") {
            const nlohmann::json j = run_chsh(cfg);
            if (!cfg.out.empty() && !detail::write_file(cfg.out + ".json", j.dump(2) + "\n", err))
                return 1;
            out << j.dump(2) << '\n';
            return 0;
        }
        if (cfg.command == "verify") {
            const VerifyOutput vo = run_verify(cfg);
            out << vo.table();
            if (!cfg.out.empty()) {
                nlohmann::json j;
                j["all_pass"] = vo.all_pass;
                j["checks"] = nlohmann::json::array();
                for (const auto& c : vo.checks)
                    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
                if (!detail::write_file(cfg.out + ".json", j.dump(2) + "\n", err)) return 1;
            }
            return vo.all_pass ? 0 : 2;
        }
        if (cfg.command == "sweep") {
            const std::string csv = run_sweep_csv(cfg);
            if (!cfg.out.empty()) {
                if (!detail::write_file(cfg.out + ".csv", csv, err)) return 1;
            } else {
                out << csv;
            }
            return 0;
        }
        err << "error: unknown command '" << cfg.command << "'\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace singletsim::driver
