// Command-line front end: strz <command> [flags]. Artifacts go to
// <out>/<command>/<UTC timestamp>-<config hash>/.
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "experiments.hpp"
#include "strichartz/grid.hpp"

namespace fs = std::filesystem;
using strz::cli::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUsage = 64;

std::string usage() {
    std::string s = "usage: strz <command> [options]\ncommands:";
    for (const auto& c : strz::cli::command_names()) s += " " + c;
    return s + "\nrun 'strz <command> --help' for the options of a command\n";
}

std::string utc_stamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw strz::ValidationError("cannot open config " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw strz::ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
}

struct Flags {
    std::string config, out = "runs", stamp, curve, check, mode, input;
    std::optional<double> L, T, eps;
    std::optional<int> n, n_times, jmax, ell, max_iter, directions;
    std::optional<long long> seed;
    bool conjugate = false;
};

void add_common(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config, "JSON config file");
    app.add_option("--out", f.out, "output root")->capture_default_str();
    app.add_option("--stamp", f.stamp, "run directory timestamp (default: current UTC time)");
    app.add_option("--curve", f.curve, "hom-odd:L, hom-even:L, inhom35, inhom-even35, schrod:[+-]c");
    app.add_option("--L", f.L, "half period of the spatial grid");
    app.add_option("--n", f.n, "spatial points");
    app.add_option("--T", f.T, "time window half width");
    app.add_option("--n-times", f.n_times, "time slices");
    app.add_option("--seed", f.seed, "random seed");
}

void apply_flags(const std::string& cmd, const Flags& f, json& user) {
    if (!f.curve.empty()) user["curve"] = f.curve;
    if (f.L) user["grid"]["L"] = *f.L;
    if (f.n) user["grid"]["n_points"] = *f.n;
    if (f.T) user["grid"]["T0"] = *f.T;
    if (f.n_times) user["grid"]["n_times"] = *f.n_times;
    if (f.seed) user["seed"] = *f.seed;
    if (f.eps) user["decompose"]["eps"] = *f.eps;
    if (f.jmax) user["decompose"]["J_max"] = *f.jmax;
    if (f.conjugate) user[cmd]["conjugate"] = true;
    if (f.ell) user["curve"] = "hom-odd:" + std::to_string(*f.ell);
    if (!f.check.empty()) user["geometry"]["check"] = f.check;
    if (!f.mode.empty()) user["classify"]["mode"] = f.mode;
    if (f.max_iter) user[cmd]["max_iter"] = *f.max_iter;
    if (f.directions) user["gradcheck"]["directions"] = *f.directions;
    if (!f.input.empty()) {
        if (cmd == "norm") {
            user["input"]["kind"] = "file";
            user["input"]["file"] = f.input;
        } else {
            user["decompose"]["input_file"] = f.input;
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << usage();
        return kExitUsage;
    }
    const std::string cmd = argv[1];
    if (cmd == "--help" || cmd == "-h") {
        std::cout << usage();
        return 0;
    }
    if (!strz::cli::is_command(cmd)) {
        std::cerr << "unknown command '" << cmd << "'\n" << usage();
        return kExitUsage;
    }

    CLI::App app{"strz " + cmd};
    app.name("strz " + cmd);
    Flags f;
    add_common(app, f);
    if (cmd == "sweep" || cmd == "homogenize") app.add_flag("--conjugate", f.conjugate, "conjugate the second profile");
    if (cmd == "decompose") {
        app.add_option("--eps", f.eps, "stop when the remainder norm falls below eps times the input norm");
        app.add_option("--jmax", f.jmax, "maximum number of pairs");
    }
    if (cmd == "decompose" || cmd == "norm") app.add_option("--input", f.input, "input function CSV (x,re,im)");
    if (cmd == "geometry") {
        app.add_option("--ell", f.ell, "odd degree; sets the curve to hom-odd:ell");
        app.add_option("--check", f.check, "all, coefficients, depth, containment or cover");
    }
    if (cmd == "classify") app.add_option("--mode", f.mode, "auto, odd, even or both");
    if (cmd == "extremize" || cmd == "threshold") app.add_option("--max-iter", f.max_iter, "ascent iteration cap");
    if (cmd == "gradcheck") app.add_option("--directions", f.directions, "random directions");

    try {
        app.parse(argc - 1, argv + 1);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        json user = f.config.empty() ? json::object() : read_config_file(f.config);
        apply_flags(cmd, f, user);
        json cfg = strz::cli::resolve_config(cmd, user);
        auto artifacts = strz::cli::run_command(cmd, cfg);

        fs::path dir = fs::path(f.out) / cmd / ((f.stamp.empty() ? utc_stamp() : f.stamp) + "-" + strz::cli::config_hash(cfg));
        fs::create_directories(dir);
        for (const auto& a : artifacts) {
            std::ofstream os(dir / a.name, std::ios::binary);
            os << a.content;
            if (!os) throw std::runtime_error("cannot write " + (dir / a.name).string());
        }
        std::cout << dir.string() << "\n";
        return 0;
    } catch (const strz::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const strz::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
