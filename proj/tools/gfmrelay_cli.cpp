#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "gfmrelay.hpp"

namespace {

using namespace gfmrelay;

constexpr int kOk = 0;
constexpr int kSolverFailure = 1;
constexpr int kConfigError = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int print_table1(unsigned threads) {
    const Table1Matrix m = table1_matrix(threads);
    std::cout << table1_csv(m);
    for (const auto& v : table1_pattern_violations(m)) std::cerr << "pattern: " << v << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequence-domain fault analysis of grid-forming inverters and relay supervising elements"};
    app.require_subcommand(1);

    std::string config, format = "csv", preset, param;
    bool oracle = false, logarithmic = false;
    double from = 0.0, to = 1.0;
    std::size_t steps = 2;
    unsigned threads = 1;

    auto* run = app.add_subcommand("run", "run one scenario document");
    run->add_option("--config", config, "scenario document")->required();
    run->add_option("--format", format, "csv | records")->check(CLI::IsMember({"csv", "records"}));
    run->add_flag("--oracle-check", oracle, "cross-check against the phase-domain solver");

    auto* replicate = app.add_subcommand("replicate", "run a named preset");
    replicate->add_option("--preset", preset, "preset name (see list-presets)")->required();
    replicate->add_option("--format", format, "csv | records")->check(CLI::IsMember({"csv", "records"}));
    replicate->add_flag("--oracle-check", oracle, "cross-check against the phase-domain solver");

    auto* sweep = app.add_subcommand("sweep", "sweep one numeric parameter of a scenario");
    sweep->add_option("--config", config, "base scenario document")->required();
    sweep->add_option("--param", param, "dotted key")->required();
    sweep->add_option("--from", from, "first value")->required();
    sweep->add_option("--to", to, "last value")->required();
    sweep->add_option("--steps", steps, "number of points (>= 2)")->required();
    sweep->add_flag("--log", logarithmic, "logarithmic spacing");
    sweep->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
    sweep->add_option("--format", format, "csv | records")->check(CLI::IsMember({"csv", "records"}));
    sweep->add_flag("--oracle-check", oracle, "cross-check against the phase-domain solver");

    auto* table1 = app.add_subcommand("table1", "supervising-element reliability matrix");
    table1->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));

    auto* list = app.add_subcommand("list-presets", "list replication presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        const ReportFormat fmt = parse_report_format(format);
        if (*run) {
            const Scenario s = load_scenario(read_file(config));
            write_report({run_scenario(s, oracle)}, fmt, std::cout);
        } else if (*replicate) {
            const Preset& p = find_preset(preset);
            if (p.kind == PresetKind::table) return print_table1(threads);
            write_report({run_scenario(load_scenario(p.document), oracle)}, fmt, std::cout);
        } else if (*sweep) {
            SweepSpec spec{read_file(config), param, from, to, steps, logarithmic, threads, oracle};
            write_report(run_sweep(spec), fmt, std::cout);
        } else if (*table1) {
            return print_table1(threads);
        } else if (*list) {
            for (const Preset& p : presets()) {
                std::cout << p.name << "  [" << p.anchor << "]  " << p.description << "\n    published:";
                for (const auto& k : p.published_keys) std::cout << ' ' << k;
                std::cout << '\n';
            }
        }
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n# parameter echo\n" << e.echo();
        return kSolverFailure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}
