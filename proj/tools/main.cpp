// tollsim command line: run scenarios, sweep horizons, verify invariants.
// Talks to the engine exclusively through the C API.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "tollsim.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCriteria = 1;
constexpr int kExitUsage = 2;

void usage(std::FILE* to) {
    std::fputs(
        "usage: tollsim <command> [options]\n"
        "\n"
        "commands:\n"
        "  run    --config <file> --out <dir>\n"
        "  sweep  --config <file> --horizons <t1,t2,...> --out <dir>\n"
        "  verify [--fast]\n"
        "\n"
        "Relative data paths in configs resolve against the config's directory,\n"
        "then against $TOLLSIM_DATA_DIR.\n",
        to);
}

int complain(const char* what) {
    std::fprintf(stderr, "tollsim: %s\n", what);
    return kExitUsage;
}

int engine_error(tollsim_status status) {
    std::fprintf(stderr, "tollsim: %s\n", tollsim_last_error());
    return status == TOLLSIM_ERR_CRITERIA ? kExitCriteria : kExitUsage;
}

struct Args {
    std::string config;
    std::string out;
    std::string horizons;
    bool fast = false;
};

bool parse_args(int argc, char** argv, Args& args) {
    for (int i = 2; i < argc; ++i) {
        const std::string flag = argv[i];
        auto next = [&]() -> const char* { return i + 1 < argc ? argv[++i] : nullptr; };
        if (flag == "--config") {
            const char* v = next();
            if (!v) return false;
            args.config = v;
        } else if (flag == "--out") {
            const char* v = next();
            if (!v) return false;
            args.out = v;
        } else if (flag == "--horizons") {
            const char* v = next();
            if (!v) return false;
            args.horizons = v;
        } else if (flag == "--fast") {
            args.fast = true;
        } else {
            return false;
        }
    }
    return true;
}

std::vector<int64_t> parse_horizons(const std::string& list) {
    std::vector<int64_t> out;
    std::string token;
    for (char c : list + ",") {
        if (c == ',') {
            if (!token.empty()) {
                out.push_back(std::strtoll(token.c_str(), nullptr, 10));
                token.clear();
            }
        } else {
            token += c;
        }
    }
    return out;
}

int cmd_run(const Args& args) {
    if (args.config.empty() || args.out.empty())
        return complain("run needs --config and --out");
    tollsim_scenario* scenario = nullptr;
    tollsim_status status = tollsim_scenario_load(args.config.c_str(), &scenario);
    if (status != TOLLSIM_OK) return engine_error(status);
    char* summary = nullptr;
    status = tollsim_run(scenario, args.out.c_str(), &summary);
    tollsim_scenario_free(scenario);
    if (status != TOLLSIM_OK) return engine_error(status);
    std::fputs(summary, stdout);
    tollsim_string_free(summary);
    std::printf("outputs written to %s\n", args.out.c_str());
    return kExitOk;
}

int cmd_sweep(const Args& args) {
    if (args.config.empty() || args.out.empty() || args.horizons.empty())
        return complain("sweep needs --config, --horizons and --out");
    const std::vector<int64_t> horizons = parse_horizons(args.horizons);
    if (horizons.size() < 3) return complain("sweep needs at least 3 horizons");
    tollsim_scenario* scenario = nullptr;
    tollsim_status status = tollsim_scenario_load(args.config.c_str(), &scenario);
    if (status != TOLLSIM_OK) return engine_error(status);
    char* summary = nullptr;
    status = tollsim_sweep(scenario, horizons.data(), static_cast<int32_t>(horizons.size()),
                           args.out.c_str(), &summary);
    tollsim_scenario_free(scenario);
    if (status != TOLLSIM_OK) return engine_error(status);
    std::fputs(summary, stdout);
    tollsim_string_free(summary);
    std::printf("outputs written to %s\n", args.out.c_str());
    return kExitOk;
}

int cmd_verify(const Args& args) {
    char* report = nullptr;
    const tollsim_status status = tollsim_verify(args.fast ? 1 : 0, &report);
    if (report) {
        std::fputs(report, stdout);
        tollsim_string_free(report);
    }
    if (status == TOLLSIM_OK) return kExitOk;
    if (status == TOLLSIM_ERR_CRITERIA) return kExitCriteria;
    return engine_error(status);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        usage(stderr);
        return kExitUsage;
    }
    const std::string command = argv[1];
    Args args;
    if (!parse_args(argc, argv, args)) {
        usage(stderr);
        return kExitUsage;
    }
    if (command == "run") return cmd_run(args);
    if (command == "sweep") return cmd_sweep(args);
    if (command == "verify") return cmd_verify(args);
    if (command == "--help" || command == "help") {
        usage(stdout);
        return kExitOk;
    }
    usage(stderr);
    return kExitUsage;
}
