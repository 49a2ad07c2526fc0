// Command-line front end: configure and run one experiment pipeline.
//
//   sletip <command> [--key value]... [--config FILE]
//
// Commands: simulate | moments | profiles | solve-fpk | verify | occupation | plot.
// Precedence: config file < command-line flags < SLE_TIP_SEED (seed only).
// Exit codes: 0 success, 2 validation failure, 3 numerical failure.

#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "sletip/cli.hpp"

namespace {

void usage(std::ostream& os) {
    os << "usage: sletip <command> [--key value]... [--config FILE]\n"
          "commands: simulate moments profiles solve-fpk verify occupation plot\n"
          "keys (config file uses key=value, one per line):\n";
    sletip::ExperimentConfig defaults;
    std::istringstream canon(sletip::config_canonical(defaults));
    std::string line;
    while (std::getline(canon, line)) os << "  --" << line.substr(0, line.find('=')) << " (default "
                                         << line.substr(line.find('=') + 1) << ")\n";
    os << "environment: SLE_TIP_SEED overrides the seed\n";
}

} // namespace

int main(int argc, char** argv) {
    using namespace sletip;
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h") {
        usage(args.empty() ? std::cerr : std::cout);
        return args.empty() ? 2 : 0;
    }

    ExperimentConfig cfg;
    try {
        std::size_t start = 0;
        std::optional<std::string> command_arg;
        if (!args[0].empty() && args[0][0] != '-') {
            command_arg = args[0];
            start = 1;
        }

        // first pass: locate --config and load the file, so flags override it
        for (std::size_t i = start; i < args.size(); ++i) {
            if (args[i] == "--config") {
                if (i + 1 >= args.size()) throw config_error("--config needs a file argument");
                config_load(cfg, args[i + 1]);
                ++i;
            }
        }
        if (command_arg) cfg.command = command_from_name(*command_arg);

        for (std::size_t i = start; i < args.size(); ++i) {
            const std::string& a = args[i];
            if (a == "--config") {
                ++i;
                continue;
            }
            if (a.rfind("--", 0) != 0) throw config_error("unexpected argument: " + a);
            if (i + 1 >= args.size()) throw config_error("flag needs a value: " + a);
            config_set(cfg, a.substr(2), args[i + 1]);
            ++i;
        }
        apply_env_overrides(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        const RunResult rr = run(cfg);
        return rr.exit_code;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const invalid_parameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        // numerical failures: no kernel, negative mass, t_max insufficient, ...
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
