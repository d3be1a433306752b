#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kummer/presets.hpp"

namespace kummer::cli {

// Flags shared by every subcommand that needs a system.
struct SystemOptions {
    std::string preset;
    std::string config;  // path, or "-" for standard input
    std::optional<double> hbar, p, q, alpha;
    std::vector<double> frequencies;
    std::vector<int> vacuum;
    int truncation = 0;
    std::vector<double> momentum;  // c_1..c_N for the classical side
    std::optional<double> c1;
};

struct OutputOptions {
    std::string format;  // csv, json or (verify-all) table; empty selects the subcommand default
    std::string path;    // empty: standard output
    std::optional<std::uint64_t> seed;
};

void add_system_options(CLI::App* app, SystemOptions& opts);
void add_output_options(CLI::App* app, OutputOptions& opts, const std::string& default_format);

// The resolved system: a preset or a spec read from a configuration document, plus the sector data.
struct Context {
    SystemSpec spec;
    std::optional<PresetKind> kind;
    PresetParams params;
    std::vector<int> vacuum;  // may be empty for a bare spec without a sector
    int truncation = 0;
    std::vector<double> momentum;
    std::uint64_t seed = 1;
    std::string format;
    std::string path;

    // The sector over the vacuum; ValidationError "cli.vacuum" if none is known.
    Sector sector() const;
    Sector sector(int truncation) const;
    // c_1..c_N: explicit flags first, then the momentum of the sector.
    std::vector<double> classical_momentum() const;
};

// Reads the configuration (if any), applies flags on top and validates the combination.
// A configuration is either a bare system document (as emitted by `preset`) or
//   {"system": <system document> | {"preset": name, "hbar", "p", "q", "alpha", "frequencies"},
//    "sector": {"vacuum": [...], "truncation": M}, "seed": n, "output": {"path": ..., "format": ...}}
Context resolve(const SystemOptions& sys, const OutputOptions& out, const std::string& default_format);

// Writes text to the configured path or to standard output.
void emit(const Context& ctx, const std::string& text);

// Full-precision number formatting shared by all CSV writers.
std::string num(double v);

// One-line JSON diagnostic on standard error: {"code": ..., "exit": ..., "message": ..., extra...}.
void diagnostic(const std::string& code, const std::string& message, int exit_code,
                const nlohmann::json& extra = nlohmann::json::object());

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidation = 1;
inline constexpr int kNumerical = 2;

} // namespace kummer::cli
