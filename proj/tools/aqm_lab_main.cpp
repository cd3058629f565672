// aqm-lab: single runs and two-scenario sweeps of the queue-management
// simulator, emitting plot-ready CSV.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "aqmlab/aqmlab.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw aqmlab::ConfigError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<aqmlab::Scheme> parse_schemes(const std::string& csv) {
    std::vector<aqmlab::Scheme> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(aqmlab::scheme_from_string(item));
    }
    if (out.empty()) throw aqmlab::ConfigError("--schemes must name at least one scheme");
    return out;
}

// "a:b:c" -> start a, stop b, step c.
void parse_flows_range(const std::string& text, aqmlab::SweepSpec& spec) {
    std::int64_t a = 0, b = 0, c = 0;
    char s1 = 0, s2 = 0;
    std::istringstream ss(text);
    if (!(ss >> a >> s1 >> b >> s2 >> c) || s1 != ':' || s2 != ':' || !ss.eof()) {
        throw aqmlab::ConfigError("--flows must look like start:stop:step, got '" + text + "'");
    }
    spec.flows_start = a;
    spec.flows_stop = b;
    spec.flows_step = c;
}

// "1..5" or "1,7,9".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    if (const auto pos = text.find(".."); pos != std::string::npos) {
        const std::uint64_t lo = std::stoull(text.substr(0, pos));
        const std::uint64_t hi = std::stoull(text.substr(pos + 2));
        if (hi < lo) throw aqmlab::ConfigError("--seeds range must be ascending");
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) seeds.push_back(std::stoull(item));
        }
    }
    if (seeds.empty()) throw aqmlab::ConfigError("--seeds must name at least one seed");
    return seeds;
}

void emit_defaults(const std::vector<std::string>& notes, bool verbose) {
    if (!verbose) return;
    for (const std::string& n : notes) std::cerr << "debug: " << n << '\n';
}

int run_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                const std::string& out_path, bool verbose) {
    aqmlab::ParsedConfig parsed = aqmlab::parse_config(read_file(config_path));
    emit_defaults(parsed.defaults_applied, verbose);
    if (seed) parsed.cfg.seed = *seed;

    const aqmlab::MetricsRecord record = aqmlab::run_once(parsed.cfg);
    const std::vector<aqmlab::MetricsRecord> records{record};
    if (out_path == "-") {
        aqmlab::write_csv(records, std::cout);
    } else {
        aqmlab::write_csv_file(records, out_path);
        std::cerr << "wrote " << out_path << " (1 row)\n";
    }
    return 0;
}

int sweep_command(const aqmlab::SweepSpec& spec, const std::string& out_dir, unsigned jobs,
                  bool verbose) {
    const auto records = aqmlab::run_sweep(spec, jobs);
    std::filesystem::create_directories(out_dir);
    const std::string path =
        (std::filesystem::path(out_dir) / ("scenario" + std::to_string(spec.scenario) + ".csv"))
            .string();
    aqmlab::write_csv_file(records, path);
    std::cerr << "wrote " << path << " (" << records.size() << " rows)\n";
    if (verbose) {
        std::cerr << "debug: " << sweep_cells(spec).size() << " cells, " << jobs << " jobs\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Queue-management comparison lab: dumbbell-topology simulations of "
                 "size-threshold dropping against RED, RIO, and PI"};
    app.set_version_flag("--version", std::string("aqm-lab ") + aqmlab::kVersion);
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "log applied defaults and progress to stderr");

    // run
    auto* run = app.add_subcommand("run", "execute one configured simulation run");
    std::string config_path;
    run->add_option("--config", config_path, "JSON run configuration")->required();
    std::optional<std::uint64_t> seed_override;
    run->add_option("--seed", seed_override, "override the config's seed");
    std::string out_path = "-";
    run->add_option("--out", out_path, "output CSV path ('-' for stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a scenario sweep and emit one CSV");
    int scenario = 1;
    sweep->add_option("--scenario", scenario, "1: fixed FTP, varied VoIP; 2: fixed VoIP, varied FTP")
        ->required()
        ->check(CLI::IsMember({1, 2}));
    std::string schemes_csv = "msqm,red,rio,pi";
    sweep->add_option("--schemes", schemes_csv, "comma-separated scheme list");
    std::string flows_range = "0:200:25";
    sweep->add_option("--flows", flows_range, "varied-flow grid start:stop:step");
    std::int64_t fixed_flows = 100;
    sweep->add_option("--fixed", fixed_flows, "fixed-flow count (pre-scale)");
    std::string seeds_text = "1..5";
    sweep->add_option("--seeds", seeds_text, "seed list, e.g. 1..5 or 1,7,9");
    double scale = 1.0;
    sweep->add_option("--scale", scale, "scales flow counts and bandwidths together");
    std::string sweep_config;
    sweep->add_option("--config", sweep_config, "base JSON config for scheme/traffic parameters");
    std::string out_dir = ".";
    sweep->add_option("--out", out_dir, "output directory for scenarioN.csv");
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    sweep->add_option("--jobs", jobs, "max parallel runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) {
            return run_command(config_path, seed_override, out_path, verbose);
        }
        aqmlab::SweepSpec spec;
        spec.scenario = scenario;
        spec.schemes = parse_schemes(schemes_csv);
        parse_flows_range(flows_range, spec);
        spec.fixed_flows = fixed_flows;
        spec.seeds = parse_seeds(seeds_text);
        spec.scale = scale;
        if (!sweep_config.empty()) {
            aqmlab::ParsedConfig parsed = aqmlab::parse_config(read_file(sweep_config));
            emit_defaults(parsed.defaults_applied, verbose);
            spec.base = parsed.cfg;
        }
        spec.validate();
        return sweep_command(spec, out_dir, std::max(1u, jobs), verbose);
    } catch (const aqmlab::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
